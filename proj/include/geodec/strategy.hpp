#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "geodec/attestation.hpp"
#include "geodec/sources.hpp"
#include "geodec/topology.hpp"

namespace geodec {

struct ConsensusParams {
  double slot_duration = 12.0;  // seconds
  double cutoff = 4.0;          // seconds
  double threshold = 2.0 / 3.0;
  double risk_tolerance = 0.99;
  double time_step = 0.05;  // seconds

  /// Number of grid steps between 0 and the cutoff; throws if the step does not divide it.
  std::size_t grid_steps() const;
  double grid_time(std::size_t i) const { return static_cast<double>(i) * time_step; }
  void validate() const;  // throws ConfigError
};

enum class CanonicalMode { Exact, Lln };
enum class ReleaseSearch { Binary, Exhaustive };

struct EvalOptions {
  CanonicalMode canonical = CanonicalMode::Exact;
  ReleaseSearch search = ReleaseSearch::Binary;
  /// Decide clear-cut threshold checks with a Hoeffding bound before running
  /// the exact DP. Never changes the decision, only skips work.
  bool hoeffding_screen = true;
  /// Two-leg latency for relay-routed blocks; Fenton-Wilkinson when null.
  const TwoLegLatency* legs = nullptr;
};

struct ReleasePlan {
  double tau_star = 0.0;
  double canonical_prob = 0.0;
  double value = 0.0;
  double payoff = 0.0;
  /// Region id under MSP, relay index under SSP.
  std::size_t location = 0;
  /// False when no grid point reaches the risk tolerance and the block goes out at 0.
  bool feasible = false;
};

struct MigrationDecision {
  bool move = false;
  RegionId origin = 0;
  RegionId destination = 0;
  double marginal_benefit = 0.0;
  /// Plan executed for the slot at `destination`.
  ReleasePlan plan;
};

ReleasePlan optimal_release_msp(RegionId region, const Committee& committee,
                                std::span<const InfoSource> sources, const LatencyModel& model,
                                const ConsensusParams& params, const EvalOptions& options = {});

double payoff_msp(RegionId region, const Committee& committee, std::span<const InfoSource> sources,
                  const LatencyModel& model, const ConsensusParams& params,
                  const EvalOptions& options = {});

/// Turns per-region plans (indexed by region id) into the migration decision.
MigrationDecision decide_migration(RegionId current_region, std::span<const ReleasePlan> region_plans,
                                   double cost);

MigrationDecision migrate_msp(RegionId current_region, std::size_t region_count,
                              const Committee& committee, std::span<const InfoSource> sources,
                              const LatencyModel& model, const ConsensusParams& params, double cost,
                              const EvalOptions& options = {});

ReleasePlan optimal_release_ssp(const InfoSource& relay, RegionId proposer_region,
                                const Committee& committee, const LatencyModel& model,
                                const ConsensusParams& params, const EvalOptions& options = {});

/// Plans for every relay with the proposer in `proposer_region`; plan.location is the relay index.
std::vector<ReleasePlan> relay_plans_ssp(RegionId proposer_region, std::span<const InfoSource> relays,
                                         const Committee& committee, const LatencyModel& model,
                                         const ConsensusParams& params,
                                         const EvalOptions& options = {});

/// Same plan as best_plan(relay_plans_ssp(...)); relays that provably cannot win are skipped.
ReleasePlan best_relay_plan(RegionId proposer_region, std::span<const InfoSource> relays,
                            const Committee& committee, const LatencyModel& model,
                            const ConsensusParams& params, const EvalOptions& options = {});

/// Highest-payoff plan, lowest index on ties.
const ReleasePlan& best_plan(std::span<const ReleasePlan> plans);

/// Co-location decision. colocated[i] is relay i's plan with the proposer in the
/// relay's region; best_by_region[r] is the best relay plan with the proposer in r
/// (only the current region and relay regions are read).
MigrationDecision colocate_from_plans(RegionId current_region, std::span<const InfoSource> relays,
                                      std::span<const ReleasePlan> colocated,
                                      std::span<const ReleasePlan> best_by_region, double cost);

/// Co-location decision from a table of relay plans indexed [proposer region][relay].
MigrationDecision colocate_from_table(RegionId current_region, std::span<const InfoSource> relays,
                                      std::span<const std::vector<ReleasePlan>> table, double cost);

MigrationDecision colocate_ssp(RegionId current_region, std::span<const InfoSource> relays,
                               const Committee& committee, const LatencyModel& model,
                               const ConsensusParams& params, double cost,
                               const EvalOptions& options = {});

inline double marginal_benefit_record(const MigrationDecision& decision) {
  return std::max(decision.marginal_benefit, 0.0);
}

}  // namespace geodec
