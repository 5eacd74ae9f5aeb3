#include "geodec/strategy.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "geodec/error.hpp"

namespace geodec {

std::size_t ConsensusParams::grid_steps() const {
  if (!(time_step > 0.0)) throw ConfigError("consensus.time_step: must be positive");
  const double steps = cutoff / time_step;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps)) {
    throw ConfigError("consensus.time_step: must divide the cutoff into an integer grid");
  }
  return static_cast<std::size_t>(rounded);
}

void ConsensusParams::validate() const {
  if (!(slot_duration > 0.0)) throw ConfigError("consensus.slot_duration: must be positive");
  if (!(cutoff >= 0.0 && cutoff <= slot_duration)) {
    throw ConfigError("consensus.cutoff: must lie in [0, slot_duration]");
  }
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("consensus.gamma: must lie in (0, 1]");
  if (!(risk_tolerance > 0.0 && risk_tolerance <= 1.0)) {
    throw ConfigError("consensus.risk_tolerance: must lie in (0, 1]");
  }
  grid_steps();
}

namespace {

/// Group-level canonicalization check for one release time.
class CanonicalTest {
public:
  CanonicalTest(const Committee& committee, const ConsensusParams& params, const EvalOptions& options)
      : options_(options), risk_(params.risk_tolerance), fraction_(committee.threshold_fraction()),
        required_(committee.required()), n_(committee.size()) {
    counts_.reserve(committee.region_groups().size());
    for (const auto& g : committee.region_groups()) counts_.push_back(g.second);
  }

  double probability(std::span<const double> probs) const {
    if (options_.canonical == CanonicalMode::Lln) return indicator(probs);
    return poisson_binomial_tail(probs, counts_, required_);
  }

  bool meets(std::span<const double> probs) const {
    if (options_.canonical == CanonicalMode::Lln) return indicator(probs) >= risk_;
    if (options_.hoeffding_screen && n_ > 0) {
      // Pr[S <= m - t] and Pr[S >= m + t] are both below exp(-2 t^2 / n).
      const double m = expected_successes(probs);
      const double k = static_cast<double>(required_);
      const double n = static_cast<double>(n_);
      if (m > k - 1.0) {
        const double t = m - (k - 1.0);
        if (std::exp(-2.0 * t * t / n) < 0.5 * (1.0 - risk_)) return true;
      }
      if (m < k) {
        const double t = k - m;
        if (std::exp(-2.0 * t * t / n) < 0.5 * risk_) return false;
      }
    }
    return probability(probs) >= risk_;
  }

private:
  double expected_successes(std::span<const double> probs) const {
    double m = 0.0;
    for (std::size_t g = 0; g < probs.size(); ++g) m += probs[g] * static_cast<double>(counts_[g]);
    return m;
  }

  double indicator(std::span<const double> probs) const {
    if (n_ == 0) return 0.0;
    const double mean = expected_successes(probs) / static_cast<double>(n_);
    return mean >= fraction_ ? 1.0 : 0.0;
  }

  const EvalOptions& options_;
  double risk_;
  double fraction_;
  std::size_t required_;
  std::size_t n_;
  std::vector<std::size_t> counts_;
};

// With a finite `must_beat`, returns nothing when the plan provably pays less:
// payoff <= value(tau*) and Pi is nonincreasing on the grid, so if the first grid
// time whose value reaches `must_beat` already misses R, so does every later one.
template <class TimelyFn, class ValueFn>
std::optional<ReleasePlan> search_release(const Committee& committee, const ConsensusParams& params,
                                          const EvalOptions& options, TimelyFn&& timely,
                                          ValueFn&& value,
                                          double must_beat = -std::numeric_limits<double>::infinity()) {
  const CanonicalTest test(committee, params, options);
  const std::size_t groups = committee.region_groups().size();
  std::vector<double> probs(groups);

  auto fill = [&](double tau) {
    for (std::size_t g = 0; g < groups; ++g) probs[g] = timely(committee.region_groups()[g].first, tau);
  };
  auto meets_at = [&](std::size_t i) {
    fill(params.grid_time(i));
    return test.meets(probs);
  };

  const std::size_t steps = params.grid_steps();
  // The cutoff itself never qualifies: nobody can be on time.
  std::ptrdiff_t found = -1;
  if (committee.size() > 0 && steps > 0) {
    if (options.search == ReleaseSearch::Exhaustive) {
      for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(steps) - 1; i >= 0; --i) {
        if (meets_at(static_cast<std::size_t>(i))) {
          found = i;
          break;
        }
      }
    } else {
      std::ptrdiff_t lo = -1;
      auto hi = static_cast<std::ptrdiff_t>(steps);
      if (std::isfinite(must_beat)) {
        std::size_t first = 0;
        while (first < steps && value(params.grid_time(first)) < must_beat) ++first;
        if (first == steps) return std::nullopt;
        if (first > 0) {
          if (!meets_at(first)) return std::nullopt;
          lo = static_cast<std::ptrdiff_t>(first);
        }
      }
      while (hi - lo > 1) {
        const std::ptrdiff_t mid = lo + (hi - lo) / 2;
        if (meets_at(static_cast<std::size_t>(mid))) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      found = lo;
    }
  }

  ReleasePlan plan;
  plan.feasible = found >= 0;
  plan.tau_star = plan.feasible ? params.grid_time(static_cast<std::size_t>(found)) : 0.0;
  if (committee.size() > 0) {
    fill(plan.tau_star);
    plan.canonical_prob = test.probability(probs);
  }
  plan.value = value(plan.tau_star);
  plan.payoff = plan.canonical_prob * plan.value;
  return plan;
}

}  // namespace

ReleasePlan optimal_release_msp(RegionId region, const Committee& committee,
                                std::span<const InfoSource> sources, const LatencyModel& model,
                                const ConsensusParams& params, const EvalOptions& options) {
  const double cutoff = committee.cutoff();
  auto plan = *search_release(
      committee, params, options,
      [&](RegionId attester, double tau) { return timely_prob_msp(model, region, attester, tau, cutoff); },
      [&](double tau) { return aggregate_value_msp(region, tau, sources, model); });
  plan.location = region;
  return plan;
}

double payoff_msp(RegionId region, const Committee& committee, std::span<const InfoSource> sources,
                  const LatencyModel& model, const ConsensusParams& params,
                  const EvalOptions& options) {
  return optimal_release_msp(region, committee, sources, model, params, options).payoff;
}

MigrationDecision decide_migration(RegionId current_region, std::span<const ReleasePlan> region_plans,
                                   double cost) {
  MigrationDecision d;
  d.origin = current_region;
  d.destination = current_region;
  const double here = region_plans[current_region].payoff;
  double best = -std::numeric_limits<double>::infinity();
  RegionId best_region = current_region;
  for (RegionId r = 0; r < region_plans.size(); ++r) {
    if (r == current_region) continue;
    if (region_plans[r].payoff > best) {
      best = region_plans[r].payoff;
      best_region = r;
    }
  }
  if (best_region == current_region) {
    d.marginal_benefit = 0.0;
    d.plan = region_plans[current_region];
    return d;
  }
  d.marginal_benefit = best - here;
  d.move = d.marginal_benefit > cost;
  d.destination = d.move ? best_region : current_region;
  d.plan = region_plans[d.destination];
  return d;
}

MigrationDecision migrate_msp(RegionId current_region, std::size_t region_count,
                              const Committee& committee, std::span<const InfoSource> sources,
                              const LatencyModel& model, const ConsensusParams& params, double cost,
                              const EvalOptions& options) {
  std::vector<ReleasePlan> plans;
  plans.reserve(region_count);
  for (RegionId r = 0; r < region_count; ++r) {
    plans.push_back(optimal_release_msp(r, committee, sources, model, params, options));
  }
  return decide_migration(current_region, plans, cost);
}

namespace {

std::optional<ReleasePlan> release_ssp(const InfoSource& relay, RegionId proposer_region,
                                       const Committee& committee, const LatencyModel& model,
                                       const ConsensusParams& params, const EvalOptions& options,
                                       double must_beat) {
  const double cutoff = committee.cutoff();
  auto timely = [&](RegionId attester, double tau) {
    if (options.legs) return timely_prob_ssp(*options.legs, proposer_region, relay.region, attester, tau, cutoff);
    return timely_prob_ssp(model, proposer_region, relay.region, attester, tau, cutoff);
  };
  return search_release(
      committee, params, options, timely,
      [&](double tau) { return relay_effective_bid(relay, proposer_region, tau, model); }, must_beat);
}

}  // namespace

ReleasePlan optimal_release_ssp(const InfoSource& relay, RegionId proposer_region,
                                const Committee& committee, const LatencyModel& model,
                                const ConsensusParams& params, const EvalOptions& options) {
  return *release_ssp(relay, proposer_region, committee, model, params, options,
                      -std::numeric_limits<double>::infinity());
}

ReleasePlan best_relay_plan(RegionId proposer_region, std::span<const InfoSource> relays,
                            const Committee& committee, const LatencyModel& model,
                            const ConsensusParams& params, const EvalOptions& options) {
  if (relays.empty()) throw NoRelays();
  // Nearest relays first so the bound bites early.
  std::vector<std::size_t> order(relays.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return model.mu(proposer_region, relays[x].region) < model.mu(proposer_region, relays[y].region);
  });
  std::optional<ReleasePlan> best;
  for (std::size_t i : order) {
    const double bar = best ? best->payoff : -std::numeric_limits<double>::infinity();
    auto plan = release_ssp(relays[i], proposer_region, committee, model, params, options, bar);
    if (!plan) continue;
    plan->location = i;
    if (!best || plan->payoff > best->payoff || (plan->payoff == best->payoff && i < best->location)) {
      best = plan;
    }
  }
  return *best;
}

std::vector<ReleasePlan> relay_plans_ssp(RegionId proposer_region, std::span<const InfoSource> relays,
                                         const Committee& committee, const LatencyModel& model,
                                         const ConsensusParams& params, const EvalOptions& options) {
  std::vector<ReleasePlan> plans;
  plans.reserve(relays.size());
  for (std::size_t i = 0; i < relays.size(); ++i) {
    plans.push_back(optimal_release_ssp(relays[i], proposer_region, committee, model, params, options));
    plans.back().location = i;
  }
  return plans;
}

const ReleasePlan& best_plan(std::span<const ReleasePlan> plans) {
  if (plans.empty()) throw NoRelays();
  std::size_t best = 0;
  for (std::size_t i = 1; i < plans.size(); ++i) {
    if (plans[i].payoff > plans[best].payoff) best = i;
  }
  return plans[best];
}

MigrationDecision colocate_from_plans(RegionId current_region, std::span<const InfoSource> relays,
                                      std::span<const ReleasePlan> colocated,
                                      std::span<const ReleasePlan> best_by_region, double cost) {
  if (relays.empty()) throw NoRelays();
  MigrationDecision d;
  d.origin = current_region;
  d.destination = current_region;
  const ReleasePlan& stay = best_by_region[current_region];

  std::size_t target = 0;
  for (std::size_t i = 1; i < relays.size(); ++i) {
    if (colocated[i].payoff > colocated[target].payoff) target = i;
  }
  d.marginal_benefit = colocated[target].payoff - stay.payoff;
  const RegionId target_region = relays[target].region;
  d.move = d.marginal_benefit > cost && target_region != current_region;
  if (d.move) {
    d.destination = target_region;
    d.plan = best_by_region[target_region];
  } else {
    d.plan = stay;
  }
  return d;
}

MigrationDecision colocate_from_table(RegionId current_region, std::span<const InfoSource> relays,
                                      std::span<const std::vector<ReleasePlan>> table, double cost) {
  if (relays.empty()) throw NoRelays();
  std::vector<ReleasePlan> colocated;
  colocated.reserve(relays.size());
  for (std::size_t i = 0; i < relays.size(); ++i) colocated.push_back(table[relays[i].region][i]);
  std::vector<ReleasePlan> best(table.size());
  for (std::size_t r = 0; r < table.size(); ++r) {
    if (!table[r].empty()) best[r] = best_plan(table[r]);
  }
  return colocate_from_plans(current_region, relays, colocated, best, cost);
}

MigrationDecision colocate_ssp(RegionId current_region, std::span<const InfoSource> relays,
                               const Committee& committee, const LatencyModel& model,
                               const ConsensusParams& params, double cost,
                               const EvalOptions& options) {
  if (relays.empty()) throw NoRelays();
  std::vector<std::vector<ReleasePlan>> table(model.size());
  auto ensure = [&](RegionId r) {
    if (table[r].empty()) table[r] = relay_plans_ssp(r, relays, committee, model, params, options);
  };
  ensure(current_region);
  for (const auto& relay : relays) ensure(relay.region);
  return colocate_from_table(current_region, relays, table, cost);
}

}  // namespace geodec
