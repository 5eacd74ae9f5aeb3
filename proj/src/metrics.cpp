#include "geodec/metrics.hpp"

namespace geodec {

StakeShares shares_from_regions(const std::vector<RegionId>& validator_regions,
                                const RegionTable& regions, Granularity granularity) {
  const std::size_t units = granularity == Granularity::GcpRegion ? regions.size() : kMacroCount;
  StakeShares shares = StakeShares::Zero(static_cast<Eigen::Index>(units));
  if (validator_regions.empty()) return shares;
  for (RegionId r : validator_regions) {
    const auto unit = granularity == Granularity::GcpRegion
                          ? r
                          : static_cast<std::size_t>(regions[r].macro);
    shares(static_cast<Eigen::Index>(unit)) += 1.0;
  }
  return shares / static_cast<double>(validator_regions.size());
}

MetricsSnapshot snapshot(std::size_t slot, const StakeShares& shares,
                         const Eigen::VectorXd& best_payoffs) {
  MetricsSnapshot s;
  s.slot = slot;
  s.gini = gini_g(shares);
  s.hhi = hhi_g(shares);
  s.lc = liveness_coefficient(shares);
  try {
    s.cv = cv_g(best_payoffs);
  } catch (const ZeroMean&) {
    s.cv.reset();
  }
  return s;
}

}  // namespace geodec
