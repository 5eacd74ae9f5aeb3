#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "geodec/engine.hpp"
#include "geodec/error.hpp"

using namespace geodec;

namespace {

LatencyDataset bundled() {
  return load_latency_dataset(std::string(GEODEC_DATA_DIR) + "/gcp_latency.csv");
}

// One region per macro-region, all pairs equally far apart.
LatencyDataset symmetric_world(double inter_ms) {
  const char* names[] = {"africa-a", "asia-a", "australia-a", "europe-a", "me-a", "southamerica-a", "us-a"};
  std::vector<Region> regions;
  for (std::size_t i = 0; i < kMacroCount; ++i) regions.push_back({i, names[i], kAllMacros[i]});
  Eigen::MatrixXd means = Eigen::MatrixXd::Constant(kMacroCount, kMacroCount, inter_ms);
  means.diagonal().setConstant(inter_ms);
  return {RegionTable(regions), model_from_means(means, 0.5)};
}

ScenarioConfig small_config(Paradigm p, std::size_t validators, std::size_t slots) {
  ScenarioConfig c;
  c.paradigm = p;
  c.validators = validators;
  c.slots = slots;
  c.workers = 1;
  return c;
}

}  // namespace

TEST_CASE("homogeneous placement splits evenly across macro-regions") {
  const auto ds = bundled();
  auto cfg = small_config(Paradigm::Msp, 700, 1);
  auto rng = substream(1, 0, StreamPurpose::Placement);
  auto pop = init_population(cfg, ds.regions, rng);
  REQUIRE(pop.size() == 700);
  for (auto c : macro_counts(pop, ds.regions)) CHECK(c == 100);

  cfg.validators = 1000;
  rng = substream(1, 0, StreamPurpose::Placement);
  pop = init_population(cfg, ds.regions, rng);
  const auto counts = macro_counts(pop, ds.regions);
  CHECK(*std::max_element(counts.begin(), counts.end()) - *std::min_element(counts.begin(), counts.end()) <= 1);
  CHECK(std::accumulate(counts.begin(), counts.end(), std::size_t{0}) == 1000);
  // remainders go to the lowest macro ids
  CHECK(counts[0] == 143);
  CHECK(counts[6] == 142);

  // within a macro-region the split is even as well
  std::map<RegionId, std::size_t> per_region;
  for (const auto& v : pop) ++per_region[v.region];
  for (const auto& r : ds.regions.in_macro(Macro::Europe)) CHECK(per_region[r] >= 10);
}

TEST_CASE("share-table placement") {
  const auto ds = bundled();
  auto cfg = small_config(Paradigm::Msp, 10, 1);
  cfg.placement.homogeneous = false;
  cfg.placement.shares = {{"us-east4", 0.55}, {"Europe", 0.45}};
  auto rng = substream(1, 0, StreamPurpose::Placement);
  const auto pop = init_population(cfg, ds.regions, rng);
  const auto counts = macro_counts(pop, ds.regions);
  CHECK(counts[static_cast<int>(Macro::NorthAmerica)] == 6);
  CHECK(counts[static_cast<int>(Macro::Europe)] == 4);
  for (const auto& v : pop) {
    if (ds.regions[v.region].macro == Macro::NorthAmerica) CHECK(ds.regions[v.region].name == "us-east4");
  }

  cfg.placement.shares = {{"us-east4", 0.5}, {"Europe", 0.4}};
  CHECK_THROWS_AS(init_population(cfg, ds.regions, rng), SharesDontSum);
  cfg.placement.shares = {{"atlantis-1", 1.0}};
  CHECK_THROWS_AS(init_population(cfg, ds.regions, rng), ConfigError);

  // the bundled real-world table apportions exactly
  cfg.validators = 1000;
  std::ifstream in(default_real_world_shares());
  CHECK(in.good());
}

TEST_CASE("homogeneous sources carry equal value per macro-region") {
  const auto ds = bundled();
  auto cfg = small_config(Paradigm::Msp, 10, 1);
  const auto signals = place_sources(cfg, ds.regions);
  REQUIRE(signals.size() == ds.regions.size());
  std::array<double, kMacroCount> a{}, b{};
  for (const auto& s : signals) {
    CHECK(s.kind == SourceKind::Signal);
    a[static_cast<int>(ds.regions[s.region].macro)] += s.a;
    b[static_cast<int>(ds.regions[s.region].macro)] += s.b;
  }
  for (std::size_t m = 0; m < kMacroCount; ++m) {
    CHECK(a[m] == doctest::Approx(0.4 / 7));
    CHECK(b[m] == doctest::Approx(0.04 / 7));
  }

  cfg.paradigm = Paradigm::Ssp;
  for (const auto& r : place_sources(cfg, ds.regions)) {
    CHECK(r.kind == SourceKind::Relay);
    CHECK(r.a == 0.4);
    CHECK(r.b == 0.04);
  }

  cfg.sources.homogeneous = false;
  cfg.sources.regions = {"asia-northeast1", "europe-west1", "us-east4"};
  cfg.paradigm = Paradigm::Msp;
  const auto listed = place_sources(cfg, ds.regions);
  REQUIRE(listed.size() == 3);
  CHECK(listed[1].a == doctest::Approx(0.4 / 3));
  CHECK(ds.regions[listed[2].region].name == "us-east4");
}

TEST_CASE("proposer draws are uniform and reproducible") {
  std::vector<std::size_t> hits(10, 0);
  const std::size_t draws = 100000;
  for (std::size_t slot = 0; slot < draws; ++slot) {
    auto rng = substream(42, slot, StreamPurpose::Proposer);
    ++hits[select_proposer(10, rng)];
  }
  double chi2 = 0.0;
  for (auto h : hits) chi2 += std::pow(h - draws / 10.0, 2) / (draws / 10.0);
  CHECK(chi2 < 27.88);  // 99.9% quantile, 9 degrees of freedom

  auto a = substream(42, 17, StreamPurpose::Proposer);
  auto b = substream(42, 17, StreamPurpose::Proposer);
  auto c = substream(42, 17, StreamPurpose::Committee);
  auto d = substream(43, 17, StreamPurpose::Proposer);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
}

TEST_CASE("prohibitive cost freezes the population") {
  for (auto p : {Paradigm::Msp, Paradigm::Ssp}) {
    auto cfg = small_config(p, 40, 60);
    cfg.migration_cost = 1e18;
    const auto result = run_scenario(cfg);
    for (std::size_t i = 0; i < result.final_population.size(); ++i) {
      CHECK(result.final_population[i].region == result.initial_population[i].region);
    }
    for (const auto& o : result.outcomes) CHECK_FALSE(o.decision.move);
  }
}

TEST_CASE("symmetric topology keeps the initial Gini") {
  for (auto p : {Paradigm::Msp, Paradigm::Ssp}) {
    auto cfg = small_config(p, 70, 50);
    cfg.migration_cost = 0.0;
    Simulation sim(cfg, symmetric_world(80.0));
    std::vector<RegionId> start;
    for (const auto& v : sim.validators()) start.push_back(v.region);
    for (std::size_t s = 0; s < cfg.slots; ++s) {
      const auto out = sim.step_slot();
      CHECK_FALSE(out.decision.move);
      CHECK(sim.last_metrics().gini == doctest::Approx(0.0).epsilon(1e-12));
    }
    for (std::size_t i = 0; i < start.size(); ++i) CHECK(sim.validators()[i].region == start[i]);
  }
}

TEST_CASE("runs are deterministic and conserve validators") {
  for (auto p : {Paradigm::Msp, Paradigm::Ssp}) {
    auto cfg = small_config(p, 60, 80);
    cfg.migration_cost = 0.0;
    const auto a = run_scenario(cfg);
    cfg.workers = 3;
    const auto b = run_scenario(cfg);
    REQUIRE(a.outcomes.size() == 80);
    REQUIRE(a.metrics.size() == 80);
    for (std::size_t s = 0; s < a.outcomes.size(); ++s) {
      CHECK(a.outcomes[s].proposer == b.outcomes[s].proposer);
      CHECK(a.outcomes[s].decision.destination == b.outcomes[s].decision.destination);
      CHECK(a.outcomes[s].payoff == b.outcomes[s].payoff);
      CHECK(a.metrics[s].gini == b.metrics[s].gini);
    }
    for (const auto& h : a.macro_histogram) CHECK(std::accumulate(h.begin(), h.end(), std::size_t{0}) == 60);
    // c = 0 lets someone move
    CHECK(std::any_of(a.outcomes.begin(), a.outcomes.end(), [](const auto& o) { return o.decision.move; }));
  }
}

TEST_CASE("sampled committees and the Monte Carlo relay mode") {
  auto cfg = small_config(Paradigm::Ssp, 50, 10);
  cfg.committee_size = 16;
  cfg.ssp_latency_cdf = SumCdfMode::MonteCarlo;
  cfg.mc_samples = 2000;
  const auto r = run_scenario(cfg);
  CHECK(r.outcomes.size() == 10);
  for (const auto& o : r.outcomes) {
    CHECK(o.canonical_prob >= 0.0);
    CHECK(o.canonical_prob <= 1.0);
  }
}

TEST_CASE("configuration validation") {
  ScenarioConfig cfg;
  cfg.consensus.threshold = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.validators = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.migration_cost = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  CHECK_NOTHROW(cfg.validate());
}
