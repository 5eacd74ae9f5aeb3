#pragma once

#include <algorithm>
#include <span>

#include "geodec/topology.hpp"

namespace geodec {

enum class SourceKind { Signal, Relay };

/// Exogenous value generator with V(t) = a*t + b, t in seconds.
struct InfoSource {
  SourceKind kind = SourceKind::Signal;
  RegionId region = 0;
  double a = 0.4;
  double b = 0.04;
};

inline double value_at(const InfoSource& source, double t) {
  return source.a * std::max(t, 0.0) + source.b;
}

/// Sum of the signal values observed from `region` when releasing at `tau`,
/// each offset by the expected latency to the source.
double aggregate_value_msp(RegionId region, double tau, std::span<const InfoSource> sources,
                           const LatencyModel& model);

double relay_effective_bid(const InfoSource& relay, RegionId proposer_region, double tau,
                           const LatencyModel& model);

}  // namespace geodec
