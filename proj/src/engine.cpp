#include "geodec/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>
#include <thread>

#include "geodec/error.hpp"

#ifndef GEODEC_DATA_DIR
#define GEODEC_DATA_DIR "data"
#endif

namespace geodec {

std::string default_latency_dataset() { return std::string(GEODEC_DATA_DIR) + "/gcp_latency.csv"; }
std::string default_real_world_shares() {
  return std::string(GEODEC_DATA_DIR) + "/real_world_shares.csv";
}

void ScenarioConfig::validate() const {
  if (slots < 1) throw ConfigError("slots: must be at least 1");
  if (validators < 1) throw ConfigError("validators.count: must be at least 1");
  if (!(migration_cost >= 0.0)) throw ConfigError("migration_cost: must be non-negative");
  if (!(dataset.sigma >= 0.0) || !std::isfinite(dataset.sigma)) {
    throw ConfigError("dataset.sigma: must be finite and non-negative");
  }
  if (!(dataset.intra_region_ms > 0.0)) throw ConfigError("dataset.intra_region_ms: must be positive");
  if (!(sources.a > 0.0)) throw ConfigError("sources.a: must be positive");
  if (!(sources.b > 0.0)) throw ConfigError("sources.b: must be positive");
  if (!sources.homogeneous && sources.regions.empty()) {
    throw ConfigError("sources.regions: at least one source is required");
  }
  if (!placement.homogeneous) {
    if (placement.shares.empty()) throw ConfigError("validators.placement: empty share table");
    double total = 0.0;
    for (const auto& [key, share] : placement.shares) {
      if (!(share >= 0.0)) throw ConfigError("validators.placement." + key + ": must be non-negative");
      total += share;
    }
    if (std::abs(total - 1.0) > 1e-6) {
      throw SharesDontSum("validators.placement: shares sum to " + std::to_string(total) + ", not 1");
    }
  }
  if (ssp_latency_cdf == SumCdfMode::MonteCarlo && mc_samples == 0) {
    throw ConfigError("attestation.mc_samples: must be positive");
  }
  consensus.validate();
}

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t slot, StreamPurpose purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(slot), static_cast<std::uint32_t>(slot >> 32),
                    static_cast<std::uint32_t>(purpose)};
  return std::mt19937_64(seq);
}

namespace {

/// Largest-remainder apportionment of `total` items by `weights`; ties go to
/// the lower index.
std::vector<std::size_t> apportion(const std::vector<double>& weights, std::size_t total) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> counts(weights.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double quota = sum > 0.0 ? weights[i] / sum * static_cast<double>(total) : 0.0;
    counts[i] = static_cast<std::size_t>(std::floor(quota));
    assigned += counts[i];
    remainders.emplace_back(quota - std::floor(quota), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  for (std::size_t i = 0; assigned < total; ++i, ++assigned) ++counts[remainders[i % remainders.size()].second];
  return counts;
}

/// Spreads `count` validators evenly over `regions`, with the remainder going
/// to randomly chosen regions.
void spread_within(std::vector<RegionId> regions, std::size_t count, std::mt19937_64& rng,
                   std::vector<RegionId>& out) {
  if (count == 0) return;
  const std::size_t base = count / regions.size();
  const std::size_t extra = count % regions.size();
  std::vector<std::size_t> per(regions.size(), base);
  std::vector<std::size_t> order(regions.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t i = 0; i < extra; ++i) ++per[order[i]];
  for (std::size_t i = 0; i < regions.size(); ++i) out.insert(out.end(), per[i], regions[i]);
}

std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("GEODEC_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

template <class Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
}

}  // namespace

std::vector<ValidatorState> init_population(const ScenarioConfig& config, const RegionTable& regions,
                                            std::mt19937_64& rng) {
  std::vector<RegionId> placed;
  placed.reserve(config.validators);
  if (config.placement.homogeneous) {
    std::vector<Macro> populated;
    for (Macro m : kAllMacros) {
      if (!regions.in_macro(m).empty()) populated.push_back(m);
    }
    if (populated.empty()) throw ConfigError("dataset: no regions");
    const std::size_t base = config.validators / populated.size();
    const std::size_t extra = config.validators % populated.size();
    for (std::size_t i = 0; i < populated.size(); ++i) {
      spread_within(regions.in_macro(populated[i]), base + (i < extra ? 1 : 0), rng, placed);
    }
  } else {
    std::vector<double> weights;
    std::vector<std::vector<RegionId>> targets;
    double total = 0.0;
    for (const auto& [key, share] : config.placement.shares) {
      total += share;
      weights.push_back(share);
      if (auto id = regions.find(key)) {
        targets.push_back({*id});
      } else if (auto macro = parse_macro(key)) {
        auto members = regions.in_macro(*macro);
        if (members.empty() && share > 0.0) {
          throw ConfigError("validators.placement." + key + ": macro-region has no regions");
        }
        targets.push_back(std::move(members));
      } else {
        throw ConfigError("validators.placement." + key + ": unknown region or macro-region");
      }
    }
    if (std::abs(total - 1.0) > 1e-6) {
      throw SharesDontSum("validators.placement: shares sum to " + std::to_string(total) + ", not 1");
    }
    const auto counts = apportion(weights, config.validators);
    for (std::size_t i = 0; i < counts.size(); ++i) spread_within(targets[i], counts[i], rng, placed);
  }
  std::vector<ValidatorState> validators(placed.size());
  for (std::size_t i = 0; i < placed.size(); ++i) validators[i] = {i, placed[i], 1.0};
  return validators;
}

std::vector<InfoSource> place_sources(const ScenarioConfig& config, const RegionTable& regions) {
  const bool relay = config.paradigm == Paradigm::Ssp;
  const auto kind = relay ? SourceKind::Relay : SourceKind::Signal;
  std::vector<InfoSource> sources;
  if (config.sources.homogeneous) {
    // A source in every region. Signal value is split evenly across the
    // populated macro-regions first, then across the regions of each.
    std::size_t populated = 0;
    for (Macro m : kAllMacros) populated += regions.in_macro(m).empty() ? 0 : 1;
    for (const auto& r : regions.regions()) {
      const double weight =
          relay ? 1.0 : 1.0 / (static_cast<double>(populated) * regions.in_macro(r.macro).size());
      sources.push_back({kind, r.id, config.sources.a * weight, config.sources.b * weight});
    }
    return sources;
  }
  const double split = relay ? 1.0 : static_cast<double>(config.sources.regions.size());
  for (const auto& name : config.sources.regions) {
    auto id = regions.find(name);
    if (!id) throw ConfigError("sources.regions: unknown region '" + name + "'");
    sources.push_back({kind, *id, config.sources.a / split, config.sources.b / split});
  }
  return sources;
}

ValidatorId select_proposer(std::size_t validator_count, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, validator_count - 1);
  return pick(rng);
}

MacroCounts macro_counts(const std::vector<ValidatorState>& validators, const RegionTable& regions) {
  MacroCounts counts{};
  for (const auto& v : validators) ++counts[static_cast<std::size_t>(regions[v.region].macro)];
  return counts;
}

Simulation::Simulation(ScenarioConfig config) : config_(std::move(config)) {
  config_.validate();
  DatasetOptions opts;
  opts.sigma = config_.dataset.sigma;
  opts.intra_region_ms = config_.dataset.intra_region_ms;
  opts.region_table_path = config_.dataset.regions_csv;
  const auto path =
      config_.dataset.latency_csv.empty() ? default_latency_dataset() : config_.dataset.latency_csv;
  dataset_ = load_latency_dataset(path, opts);
  init();
}

Simulation::Simulation(ScenarioConfig config, LatencyDataset dataset)
    : config_(std::move(config)), dataset_(std::move(dataset)) {
  config_.validate();
  init();
}

Simulation::~Simulation() = default;

void Simulation::init() {
  auto placement_rng = substream(config_.seed, 0, StreamPurpose::Placement);
  validators_ = init_population(config_, dataset_.regions, placement_rng);
  sources_ = place_sources(config_, dataset_.regions);
  options_.canonical = config_.canonical;
  if (config_.paradigm == Paradigm::Ssp && config_.ssp_latency_cdf == SumCdfMode::MonteCarlo) {
    legs_ = std::make_unique<TwoLegLatency>(dataset_.model, SumCdfMode::MonteCarlo, config_.mc_samples,
                                            config_.seed);
    options_.legs = legs_.get();
  }
  workers_ = resolve_workers(config_.workers);
}

Committee Simulation::build_committee(ValidatorId proposer) const {
  std::vector<Attester> attesters;
  attesters.reserve(validators_.size());
  for (const auto& v : validators_) {
    if (v.id != proposer) attesters.push_back({v.id, v.region});
  }
  if (config_.committee_size > 0 && config_.committee_size < attesters.size()) {
    auto rng = substream(config_.seed, slot_, StreamPurpose::Committee);
    std::vector<Attester> sample;
    std::sample(attesters.begin(), attesters.end(), std::back_inserter(sample), config_.committee_size,
                rng);
    attesters = std::move(sample);
  }
  return Committee(std::move(attesters), config_.consensus.threshold, config_.consensus.cutoff);
}

SlotOutcome Simulation::step_slot() {
  auto proposer_rng = substream(config_.seed, slot_, StreamPurpose::Proposer);
  const ValidatorId proposer = select_proposer(validators_.size(), proposer_rng);
  const RegionId origin = validators_[proposer].region;
  const Committee committee = build_committee(proposer);
  const std::size_t m = dataset_.regions.size();
  const auto& params = config_.consensus;

  SlotOutcome out;
  out.slot = slot_;
  out.proposer = proposer;
  out.origin_region = origin;
  last_payoffs_.resize(static_cast<Eigen::Index>(m));

  if (config_.paradigm == Paradigm::Msp) {
    std::vector<ReleasePlan> plans(m);
    parallel_for(m, workers_, [&](std::size_t r) {
      plans[r] = optimal_release_msp(r, committee, sources_, dataset_.model, params, options_);
    });
    for (std::size_t r = 0; r < m; ++r) last_payoffs_(static_cast<Eigen::Index>(r)) = plans[r].payoff;
    out.decision = decide_migration(origin, plans, config_.migration_cost);
  } else {
    std::vector<ReleasePlan> best(m);
    std::vector<ReleasePlan> colocated(sources_.size());
    parallel_for(m + sources_.size(), workers_, [&](std::size_t task) {
      if (task < m) {
        best[task] = best_relay_plan(task, sources_, committee, dataset_.model, params, options_);
      } else {
        const std::size_t i = task - m;
        colocated[i] = optimal_release_ssp(sources_[i], sources_[i].region, committee, dataset_.model,
                                           params, options_);
        colocated[i].location = i;
      }
    });
    for (std::size_t r = 0; r < m; ++r) last_payoffs_(static_cast<Eigen::Index>(r)) = best[r].payoff;
    out.decision = colocate_from_plans(origin, sources_, colocated, best, config_.migration_cost);
  }

  validators_[proposer].region = out.decision.destination;
  out.tau_star = out.decision.plan.tau_star;
  out.canonical_prob = out.decision.plan.canonical_prob;
  out.payoff = out.decision.plan.payoff;
  out.marginal_benefit = marginal_benefit_record(out.decision);

  std::vector<RegionId> where(validators_.size());
  for (std::size_t i = 0; i < validators_.size(); ++i) where[i] = validators_[i].region;
  last_metrics_ = snapshot(slot_, shares_from_regions(where, dataset_.regions, config_.granularity),
                           last_payoffs_);
  ++slot_;
  return out;
}

SimulationResult run_scenario(const ScenarioConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  Simulation sim(config);
  SimulationResult result;
  result.config = sim.config();
  result.regions = sim.regions();
  result.sources = sim.sources();
  result.initial_population = sim.validators();
  result.initial_histogram = macro_counts(sim.validators(), sim.regions());
  result.outcomes.reserve(config.slots);
  result.metrics.reserve(config.slots);
  result.macro_histogram.reserve(config.slots);
  for (std::size_t n = 0; n < config.slots; ++n) {
    result.outcomes.push_back(sim.step_slot());
    result.metrics.push_back(sim.last_metrics());
    result.macro_histogram.push_back(macro_counts(sim.validators(), sim.regions()));
  }
  result.final_population = sim.validators();
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace geodec
