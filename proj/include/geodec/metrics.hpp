#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "geodec/error.hpp"
#include "geodec/topology.hpp"

namespace geodec {

/// Stake shares p_r over regions or macro-regions; non-negative and summing to one.
using StakeShares = Eigen::VectorXd;

enum class Granularity { GcpRegion, MacroRegion };

struct MetricsSnapshot {
  std::size_t slot = 0;
  double gini = 0.0;
  double hhi = 0.0;
  /// Missing when the best payoffs of the slot have a non-positive mean.
  std::optional<double> cv;
  std::size_t lc = 0;
};

/// Geographical Gini, (1 / 2m) * sum_r sum_r' |p_r - p_r'|, via the sorted form
///   sum_{i<j} (p_(j) - p_(i)) = sum_i (2i - m + 1) p_(i).
template <typename Derived>
typename Derived::Scalar gini_g(const Eigen::DenseBase<Derived>& shares) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index m = shares.size();
  if (m == 0) return Scalar(0);
  std::vector<Scalar> sorted(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) sorted[i] = shares(i);
  std::sort(sorted.begin(), sorted.end());
  Scalar acc(0);
  for (Eigen::Index i = 0; i < m; ++i) acc += Scalar(2 * i - m + 1) * sorted[i];
  return acc / Scalar(m);
}

/// Direct O(m^2) double sum.
template <typename Derived>
typename Derived::Scalar gini_g_pairwise(const Eigen::DenseBase<Derived>& shares) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index m = shares.size();
  if (m == 0) return Scalar(0);
  Scalar acc(0);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) acc += std::abs(shares(i) - shares(j));
  }
  return acc / (Scalar(2) * Scalar(m));
}

template <typename Derived>
typename Derived::Scalar hhi_g(const Eigen::DenseBase<Derived>& shares) {
  return shares.derived().squaredNorm();
}

/// Population standard deviation over mean; throws ZeroMean when the mean is not positive.
template <typename Derived>
typename Derived::Scalar cv_g(const Eigen::DenseBase<Derived>& payoffs) {
  using Scalar = typename Derived::Scalar;
  if (payoffs.size() == 0) throw ZeroMean();
  const Scalar mean = payoffs.mean();
  if (!(mean > Scalar(0))) throw ZeroMean();
  const Scalar var = (payoffs.derived().array() - mean).square().mean();
  return std::sqrt(var) / mean;
}

/// Fewest largest units whose combined share reaches one third.
template <typename Derived>
std::size_t liveness_coefficient(const Eigen::DenseBase<Derived>& shares) {
  using Scalar = typename Derived::Scalar;
  std::vector<Scalar> sorted(static_cast<std::size_t>(shares.size()));
  for (Eigen::Index i = 0; i < shares.size(); ++i) sorted[i] = shares(i);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  Scalar prefix(0);
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    prefix += sorted[k];
    if (prefix >= Scalar(1) / Scalar(3) - Scalar(1e-12)) return k + 1;
  }
  return sorted.size();
}

/// Equal-stake shares from per-validator region ids.
StakeShares shares_from_regions(const std::vector<RegionId>& validator_regions,
                                const RegionTable& regions, Granularity granularity);

MetricsSnapshot snapshot(std::size_t slot, const StakeShares& shares,
                         const Eigen::VectorXd& best_payoffs);

}  // namespace geodec
