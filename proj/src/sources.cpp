#include "geodec/sources.hpp"

namespace geodec {

double aggregate_value_msp(RegionId region, double tau, std::span<const InfoSource> sources,
                           const LatencyModel& model) {
  double total = 0.0;
  for (const auto& source : sources) {
    total += value_at(source, tau - expected_latency(model, region, source.region) / 1000.0);
  }
  return total;
}

double relay_effective_bid(const InfoSource& relay, RegionId proposer_region, double tau,
                           const LatencyModel& model) {
  return value_at(relay, tau - expected_latency(model, proposer_region, relay.region) / 1000.0);
}

}  // namespace geodec
