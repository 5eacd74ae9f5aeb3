#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "geodec/attestation.hpp"
#include "geodec/metrics.hpp"
#include "geodec/sources.hpp"
#include "geodec/strategy.hpp"
#include "geodec/topology.hpp"

namespace geodec {

enum class Paradigm { Msp, Ssp };

struct ValidatorState {
  ValidatorId id = 0;
  RegionId region = 0;
  double stake = 1.0;
};

/// Initial validator placement: homogeneous, or a share table keyed by
/// macro-region or region name.
struct PlacementSpec {
  bool homogeneous = true;
  std::vector<std::pair<std::string, double>> shares;
};

/// Information sources: one in every region (homogeneous), or an explicit list
/// of region names. Each relay carries (a, b); signals share that total, equally
/// per macro-region when homogeneous and equally per source for a list.
struct SourceSpec {
  bool homogeneous = true;
  std::vector<std::string> regions;
  double a = 0.4;
  double b = 0.04;
};

struct DatasetSpec {
  std::string latency_csv;  // empty selects the bundled snapshot
  std::string regions_csv;
  double sigma = 0.5;
  double intra_region_ms = 2.0;
};

struct ScenarioConfig {
  std::string name = "scenario";
  Paradigm paradigm = Paradigm::Msp;
  DatasetSpec dataset;
  std::size_t validators = 1000;
  PlacementSpec placement;
  SourceSpec sources;
  ConsensusParams consensus;
  double migration_cost = 0.002;
  std::size_t slots = 10000;
  std::uint64_t seed = 42;
  Granularity granularity = Granularity::GcpRegion;
  /// 0 uses every non-proposing validator.
  std::size_t committee_size = 0;
  CanonicalMode canonical = CanonicalMode::Exact;
  SumCdfMode ssp_latency_cdf = SumCdfMode::FentonWilkinson;
  std::size_t mc_samples = 20000;
  /// Threads for per-slot candidate evaluation; 0 reads GEODEC_WORKERS.
  std::size_t workers = 0;

  void validate() const;  // throws ConfigError with the offending field path
};

std::string default_latency_dataset();
std::string default_real_world_shares();

struct SlotOutcome {
  std::size_t slot = 0;
  ValidatorId proposer = 0;
  RegionId origin_region = 0;
  MigrationDecision decision;
  double tau_star = 0.0;
  double canonical_prob = 0.0;
  double payoff = 0.0;
  double marginal_benefit = 0.0;
};

using MacroCounts = std::array<std::size_t, kMacroCount>;

struct SimulationResult {
  ScenarioConfig config;
  RegionTable regions;
  std::vector<InfoSource> sources;
  std::vector<ValidatorState> initial_population;
  std::vector<ValidatorState> final_population;
  MacroCounts initial_histogram{};
  std::vector<SlotOutcome> outcomes;
  std::vector<MetricsSnapshot> metrics;
  std::vector<MacroCounts> macro_histogram;
  double wall_seconds = 0.0;
};

enum class StreamPurpose : std::uint64_t {
  Proposer = 1,
  Committee = 2,
  Placement = 3,
};

/// Independent random stream keyed by (seed, slot, purpose).
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t slot, StreamPurpose purpose);

std::vector<ValidatorState> init_population(const ScenarioConfig& config, const RegionTable& regions,
                                            std::mt19937_64& rng);

std::vector<InfoSource> place_sources(const ScenarioConfig& config, const RegionTable& regions);

ValidatorId select_proposer(std::size_t validator_count, std::mt19937_64& rng);

MacroCounts macro_counts(const std::vector<ValidatorState>& validators, const RegionTable& regions);

/// Mutable simulation state for one scenario.
class Simulation {
public:
  explicit Simulation(ScenarioConfig config);
  Simulation(ScenarioConfig config, LatencyDataset dataset);
  ~Simulation();

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// Runs the next slot: proposer draw, committee, decision, migration, release.
  SlotOutcome step_slot();

  std::size_t next_slot() const { return slot_; }
  const ScenarioConfig& config() const { return config_; }
  const RegionTable& regions() const { return dataset_.regions; }
  const LatencyModel& model() const { return dataset_.model; }
  const std::vector<InfoSource>& sources() const { return sources_; }
  const std::vector<ValidatorState>& validators() const { return validators_; }
  /// Metrics of the last executed slot.
  const MetricsSnapshot& last_metrics() const { return last_metrics_; }
  /// Best attainable payoff per region in the last executed slot.
  const Eigen::VectorXd& last_region_payoffs() const { return last_payoffs_; }

private:
  void init();
  Committee build_committee(ValidatorId proposer) const;

  ScenarioConfig config_;
  LatencyDataset dataset_;
  std::vector<InfoSource> sources_;
  std::vector<ValidatorState> validators_;
  std::unique_ptr<TwoLegLatency> legs_;
  EvalOptions options_;
  std::size_t workers_ = 1;
  std::size_t slot_ = 0;
  MetricsSnapshot last_metrics_;
  Eigen::VectorXd last_payoffs_;
};

SimulationResult run_scenario(const ScenarioConfig& config);

}  // namespace geodec
