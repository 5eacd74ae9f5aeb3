#include <doctest.h>

#include <random>

#include "geodec/error.hpp"
#include "geodec/strategy.hpp"

using namespace geodec;

namespace {

LatencyModel symmetric_model(std::size_t m, double inter, double intra = 2.0) {
  Eigen::MatrixXd means = Eigen::MatrixXd::Constant(m, m, inter);
  means.diagonal().setConstant(intra);
  return model_from_means(means, 0.5);
}

Committee committee_in(std::vector<RegionId> regions, double gamma = 2.0 / 3.0, double cutoff = 4.0) {
  std::vector<Attester> a;
  for (std::size_t i = 0; i < regions.size(); ++i) a.push_back({i, regions[i]});
  return Committee(std::move(a), gamma, cutoff);
}

struct Instance {
  LatencyModel model;
  std::vector<Attester> attesters;
  std::vector<InfoSource> signals;
  std::vector<InfoSource> relays;
  ConsensusParams params;
};

Instance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> regions(2, 6);
  std::uniform_real_distribution<double> lat(5.0, 600.0);
  const std::size_t m = regions(rng);
  Eigen::MatrixXd means(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) means(i, j) = i == j ? 2.0 : lat(rng);
  }
  Instance inst{model_from_means(means, 0.5), {}, {}, {}, {}};
  std::uniform_int_distribution<std::size_t> size(1, 80), where(0, m - 1);
  const std::size_t n = size(rng);
  for (std::size_t i = 0; i < n; ++i) inst.attesters.push_back({i, where(rng)});
  for (std::size_t s = 0; s < 3; ++s) {
    inst.signals.push_back({SourceKind::Signal, where(rng), 0.4 / 3, 0.04 / 3});
    inst.relays.push_back({SourceKind::Relay, where(rng), 0.4, 0.04});
  }
  const double gammas[] = {1.0 / 3.0, 0.5, 2.0 / 3.0, 0.8};
  inst.params.threshold = gammas[rng() % 4];
  inst.params.risk_tolerance = std::uniform_real_distribution<double>(0.5, 0.999)(rng);
  return inst;
}

}  // namespace

TEST_CASE("consensus parameter validation") {
  ConsensusParams p;
  CHECK(p.grid_steps() == 80);
  CHECK(p.grid_time(76) == doctest::Approx(3.8));
  p.time_step = 0.03;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.threshold = 1.5;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.cutoff = 13.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("intra-region committee releases one step before the cutoff") {
  const auto model = symmetric_model(2, 100.0);
  const auto c = committee_in(std::vector<RegionId>(20, 0));
  const std::vector<InfoSource> none;
  const auto plan = optimal_release_msp(0, c, none, model, {});
  CHECK(plan.feasible);
  CHECK(plan.tau_star == doctest::Approx(3.95));
  CHECK(plan.canonical_prob >= 0.99);
}

TEST_CASE("tiny threshold with a certain attester") {
  const auto model = symmetric_model(1, 2.0);
  const auto c = committee_in({0}, 1e-6);
  CHECK(c.required() == 1);
  const std::vector<InfoSource> src{{SourceKind::Signal, 0, 0.4, 0.04}};
  const auto plan = optimal_release_msp(0, c, src, model, {});
  CHECK(plan.tau_star == doctest::Approx(3.95));
}

TEST_CASE("certainty is out of reach with a distant committee") {
  const auto model = symmetric_model(2, 1000.0);
  ConsensusParams p;
  p.risk_tolerance = 1.0;
  const std::vector<InfoSource> src{{SourceKind::Signal, 0, 0.4, 0.04}};
  const auto plan = optimal_release_msp(0, committee_in({1, 1, 1}), src, model, p);
  CHECK_FALSE(plan.feasible);
  CHECK(plan.tau_star == 0.0);
  CHECK(plan.canonical_prob < 1.0);
  CHECK(plan.value == doctest::Approx(0.04));
  CHECK(plan.payoff == doctest::Approx(plan.canonical_prob * 0.04));
}

TEST_CASE("zero cutoff is infeasible") {
  const auto model = symmetric_model(2, 100.0);
  ConsensusParams p;
  p.cutoff = 0.0;
  const auto c = committee_in({0, 1}, 2.0 / 3.0, 0.0);
  const std::vector<InfoSource> src{{SourceKind::Signal, 0, 0.4, 0.04}};
  const auto plan = optimal_release_msp(0, c, src, model, p);
  CHECK_FALSE(plan.feasible);
  CHECK(plan.tau_star == 0.0);
  CHECK(plan.canonical_prob == 0.0);
  CHECK(plan.payoff == 0.0);
  const InfoSource relay{SourceKind::Relay, 0, 0.4, 0.04};
  CHECK(optimal_release_ssp(relay, 0, c, model, p).payoff == 0.0);
}

TEST_CASE("payoff is probability times value") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto inst = random_instance(rng);
    Committee c(inst.attesters, inst.params.threshold, inst.params.cutoff);
    const auto plan = optimal_release_msp(0, c, inst.signals, inst.model, inst.params);
    CHECK(plan.payoff == doctest::Approx(plan.canonical_prob * plan.value));
    CHECK(plan.value == doctest::Approx(aggregate_value_msp(0, plan.tau_star, inst.signals, inst.model)));
    CHECK(payoff_msp(0, c, inst.signals, inst.model, inst.params) == plan.payoff);
    CHECK(plan.tau_star >= 0.0);
    CHECK(plan.tau_star < inst.params.cutoff);
  }
}

TEST_CASE("binary search agrees with the exhaustive scan and the screen changes nothing") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 150; ++trial) {
    auto inst = random_instance(rng);
    Committee c(inst.attesters, inst.params.threshold, inst.params.cutoff);
    EvalOptions scan;
    scan.search = ReleaseSearch::Exhaustive;
    EvalOptions plain;
    plain.hoeffding_screen = false;
    for (RegionId r = 0; r < inst.model.size(); ++r) {
      const auto fast = optimal_release_msp(r, c, inst.signals, inst.model, inst.params);
      const auto slow = optimal_release_msp(r, c, inst.signals, inst.model, inst.params, scan);
      const auto unscreened = optimal_release_msp(r, c, inst.signals, inst.model, inst.params, plain);
      CHECK(fast.tau_star == slow.tau_star);
      CHECK(fast.tau_star == unscreened.tau_star);
      CHECK(fast.payoff == slow.payoff);
      const auto relay_fast = optimal_release_ssp(inst.relays[0], r, c, inst.model, inst.params);
      const auto relay_slow = optimal_release_ssp(inst.relays[0], r, c, inst.model, inst.params, scan);
      CHECK(relay_fast.tau_star == relay_slow.tau_star);
    }
  }
}

TEST_CASE("canonical probability is nonincreasing on the grid") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    auto inst = random_instance(rng);
    Committee c(inst.attesters, inst.params.threshold, inst.params.cutoff);
    double prev = 1.0;
    for (std::size_t i = 0; i <= inst.params.grid_steps(); ++i) {
      std::vector<double> q;
      for (const auto& a : c.attesters()) {
        q.push_back(timely_prob_msp(inst.model, 0, a.region, inst.params.grid_time(i), inst.params.cutoff));
      }
      const double pi = canonical_prob(c, q);
      CHECK(pi <= prev + 1e-12);
      prev = pi;
    }
  }
}

TEST_CASE("a region closer to everything dominates") {
  // Region 0 is strictly closer than region 1 to every attester and source.
  Eigen::MatrixXd means(3, 3);
  means << 2, 40, 60, 40, 2, 150, 60, 150, 2;
  const auto model = model_from_means(means, 0.5);
  const auto c = committee_in({0, 1, 2, 2, 2, 1});
  const std::vector<InfoSource> src{{SourceKind::Signal, 2, 0.2, 0.02}, {SourceKind::Signal, 0, 0.2, 0.02}};
  const double w0 = payoff_msp(0, c, src, model, {});
  const double w1 = payoff_msp(1, c, src, model, {});
  CHECK(w0 >= w1);
}

TEST_CASE("migration decision rule") {
  std::vector<ReleasePlan> plans(3);
  plans[0].payoff = 1.0;
  plans[1].payoff = 1.0015;
  plans[2].payoff = 0.9;
  auto d = decide_migration(0, plans, 0.002);
  CHECK_FALSE(d.move);
  CHECK(d.destination == 0);
  CHECK(d.marginal_benefit == doctest::Approx(0.0015));
  CHECK(marginal_benefit_record(d) == doctest::Approx(0.0015));
  d = decide_migration(0, plans, 0.0);
  CHECK(d.move);
  CHECK(d.destination == 1);
  CHECK(d.plan.payoff == plans[1].payoff);
  // nothing better elsewhere: benefit recorded as zero
  d = decide_migration(1, plans, 0.0);
  CHECK_FALSE(d.move);
  CHECK(d.marginal_benefit < 0.0);
  CHECK(marginal_benefit_record(d) == 0.0);
  // ties go to the lowest region id
  plans[2].payoff = plans[1].payoff;
  CHECK(decide_migration(0, plans, 0.0).destination == 1);
}

TEST_CASE("symmetric topology never moves") {
  const auto model = symmetric_model(4, 120.0);
  const auto c = committee_in({0, 1, 2, 3, 0, 1, 2, 3});
  std::vector<InfoSource> src;
  for (RegionId r = 0; r < 4; ++r) src.push_back({SourceKind::Signal, r, 0.1, 0.01});
  for (RegionId r = 0; r < 4; ++r) {
    const auto d = migrate_msp(r, 4, c, src, model, {}, 0.0);
    CHECK_FALSE(d.move);
    CHECK(d.marginal_benefit == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("scaling values and cost together keeps every decision") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    auto inst = random_instance(rng);
    Committee c(inst.attesters, inst.params.threshold, inst.params.cutoff);
    auto scaled = inst.signals;
    auto scaled_relays = inst.relays;
    for (auto& s : scaled) s.a *= 7.5, s.b *= 7.5;
    for (auto& s : scaled_relays) s.a *= 7.5, s.b *= 7.5;
    const double cost = 0.002;
    for (RegionId r = 0; r < inst.model.size(); ++r) {
      const auto a = migrate_msp(r, inst.model.size(), c, inst.signals, inst.model, inst.params, cost);
      const auto b = migrate_msp(r, inst.model.size(), c, scaled, inst.model, inst.params, cost * 7.5);
      CHECK(a.move == b.move);
      CHECK(a.destination == b.destination);
      const auto x = colocate_ssp(r, inst.relays, c, inst.model, inst.params, cost);
      const auto y = colocate_ssp(r, scaled_relays, c, inst.model, inst.params, cost * 7.5);
      CHECK(x.move == y.move);
      CHECK(x.destination == y.destination);
    }
  }
}

TEST_CASE("with zero cost the destination is a pure argmax") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    auto inst = random_instance(rng);
    Committee c(inst.attesters, inst.params.threshold, inst.params.cutoff);
    const auto d = migrate_msp(0, inst.model.size(), c, inst.signals, inst.model, inst.params, 0.0);
    for (RegionId r = 0; r < inst.model.size(); ++r) {
      CHECK(d.plan.payoff >= payoff_msp(r, c, inst.signals, inst.model, inst.params) - 1e-15);
    }
  }
}

TEST_CASE("relay routing costs time") {
  const auto model = symmetric_model(3, 300.0);
  const auto c = committee_in({0, 1, 2, 0, 1, 2});
  const InfoSource far{SourceKind::Relay, 1, 0.4, 0.04};
  const InfoSource near{SourceKind::Relay, 0, 0.4, 0.04};
  const auto remote = optimal_release_ssp(far, 0, c, model, {});
  const auto local = optimal_release_ssp(near, 0, c, model, {});
  CHECK(remote.tau_star < local.tau_star);
  CHECK(remote.value == doctest::Approx(relay_effective_bid(far, 0, remote.tau_star, model)));

  // A co-located relay behaves like direct release, up to the extra hop.
  const auto intra = symmetric_model(1, 2.0);
  const auto home = committee_in(std::vector<RegionId>(10, 0));
  const std::vector<InfoSource> none;
  const auto direct = optimal_release_msp(0, home, none, intra, {});
  const auto routed = optimal_release_ssp(near, 0, home, intra, {});
  CHECK(std::abs(direct.tau_star - routed.tau_star) <= 0.05 + 1e-12);
}

TEST_CASE("co-location") {
  const auto model = symmetric_model(3, 200.0);
  const auto c = committee_in({0, 1, 2, 0, 1, 2, 2});
  SUBCASE("a relay in the proposer's region leaves nothing to gain") {
    const std::vector<InfoSource> relays{{SourceKind::Relay, 1, 0.4, 0.04}};
    for (double cost : {0.0, 0.002}) {
      const auto d = colocate_ssp(1, relays, c, model, {}, cost);
      CHECK_FALSE(d.move);
      CHECK(d.marginal_benefit == doctest::Approx(0.0));
    }
  }
  SUBCASE("zero cost follows a strictly better relay") {
    const std::vector<InfoSource> relays{{SourceKind::Relay, 2, 0.4, 0.04}};
    const auto d = colocate_ssp(0, relays, c, model, {}, 0.0);
    CHECK(d.move);
    CHECK(d.destination == 2);
    CHECK(d.plan.location == 0);
  }
  SUBCASE("cost sweep across the co-location gain") {
    const std::vector<InfoSource> relays{{SourceKind::Relay, 1, 0.4, 0.04}, {SourceKind::Relay, 2, 0.4, 0.04}};
    const auto gain = colocate_ssp(0, relays, c, model, {}, 1e9).marginal_benefit;
    REQUIRE(gain > 0.0);
    CHECK(colocate_ssp(0, relays, c, model, {}, gain * 0.99).move);
    CHECK_FALSE(colocate_ssp(0, relays, c, model, {}, gain).move);
    CHECK_FALSE(colocate_ssp(0, relays, c, model, {}, gain * 1.01).move);
  }
  SUBCASE("no relays") {
    const std::vector<InfoSource> none;
    CHECK_THROWS_AS(colocate_ssp(0, none, c, model, {}, 0.0), NoRelays);
    CHECK_THROWS_AS(best_plan(std::vector<ReleasePlan>{}), NoRelays);
  }
}

TEST_CASE("pruned best relay equals the full scan") {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = random_instance(rng);
    Committee c(inst.attesters, inst.params.threshold, inst.params.cutoff);
    std::vector<InfoSource> relays = inst.relays;
    for (RegionId r = 0; r < inst.model.size(); ++r) relays.push_back({SourceKind::Relay, r, 0.4, 0.04});
    for (RegionId r = 0; r < inst.model.size(); ++r) {
      const auto all = relay_plans_ssp(r, relays, c, inst.model, inst.params);
      const auto& full = best_plan(all);
      const auto pruned = best_relay_plan(r, relays, c, inst.model, inst.params);
      CHECK(pruned.location == full.location);
      CHECK(pruned.payoff == full.payoff);
      CHECK(pruned.tau_star == full.tau_star);
    }
    std::vector<std::vector<ReleasePlan>> table;
    std::vector<ReleasePlan> colocated, best;
    for (RegionId r = 0; r < inst.model.size(); ++r) {
      table.push_back(relay_plans_ssp(r, relays, c, inst.model, inst.params));
      best.push_back(best_relay_plan(r, relays, c, inst.model, inst.params));
    }
    for (std::size_t i = 0; i < relays.size(); ++i) colocated.push_back(table[relays[i].region][i]);
    for (RegionId r = 0; r < inst.model.size(); ++r) {
      const auto a = colocate_from_table(r, relays, table, 0.001);
      const auto b = colocate_from_plans(r, relays, colocated, best, 0.001);
      CHECK(a.move == b.move);
      CHECK(a.destination == b.destination);
      CHECK(a.plan.payoff == b.plan.payoff);
    }
  }
}
