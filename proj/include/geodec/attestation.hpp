#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "geodec/topology.hpp"

namespace geodec {

using ValidatorId = std::size_t;

struct Attester {
  ValidatorId validator = 0;
  RegionId region = 0;
};

/// The attesters of one slot together with the canonicalization rule.
///
/// Timeliness only depends on an attester's region, so the committee also keeps
/// its members grouped by region; probability vectors are evaluated per group.
class Committee {
public:
  Committee(std::vector<Attester> attesters, double threshold_fraction, double cutoff);

  const std::vector<Attester>& attesters() const { return attesters_; }
  std::size_t size() const { return attesters_.size(); }
  double threshold_fraction() const { return threshold_; }
  double cutoff() const { return cutoff_; }

  /// ceil(threshold * |attesters|), at least 1.
  std::size_t required() const;

  /// Distinct attester regions and the number of attesters in each.
  const std::vector<std::pair<RegionId, std::size_t>>& region_groups() const { return groups_; }

private:
  std::vector<Attester> attesters_;
  double threshold_;
  double cutoff_;
  std::vector<std::pair<RegionId, std::size_t>> groups_;
};

/// ln X ~ N(mu, sigma^2); mu = -inf encodes the point mass at zero.
struct LogNormalParams {
  double mu = 0.0;
  double sigma = 0.0;

  double mean() const;
  double variance() const;
};

double lognormal_cdf(const LogNormalParams& p, double t);

inline LogNormalParams pair_params(const LatencyModel& model, RegionId j, RegionId k) {
  return {model.mu(j, k), model.sigma};
}

/// Fenton-Wilkinson: the log-normal matching the mean and variance of X1 + X2.
LogNormalParams lognormal_sum_params(const LogNormalParams& p1, const LogNormalParams& p2);

/// Probability that an attester in `attester_region` sees a block released at
/// `tau` seconds from `proposer_region` before `cutoff` seconds.
double timely_prob_msp(const LatencyModel& model, RegionId proposer_region,
                       RegionId attester_region, double tau, double cutoff);

enum class SumCdfMode { FentonWilkinson, MonteCarlo };

/// CDF of the two-hop latency d(proposer, relay) + d(relay, attester).
///
/// The Monte Carlo mode draws a fixed-seed sample per region triple on first
/// use and caches it; the cache is guarded, so a single instance may be shared
/// between threads.
class TwoLegLatency {
public:
  explicit TwoLegLatency(const LatencyModel& model, SumCdfMode mode = SumCdfMode::FentonWilkinson,
                         std::size_t mc_samples = 20000, std::uint64_t mc_seed = 0x5eed);

  double cdf(RegionId proposer, RegionId relay, RegionId attester, double t_ms) const;
  SumCdfMode mode() const { return mode_; }

private:
  const std::vector<double>& samples(RegionId proposer, RegionId relay, RegionId attester) const;

  const LatencyModel* model_;
  SumCdfMode mode_;
  std::size_t mc_samples_;
  std::uint64_t mc_seed_;
  mutable std::mutex mutex_;
  mutable std::map<std::tuple<RegionId, RegionId, RegionId>, std::unique_ptr<std::vector<double>>>
      cache_;
};

/// Relay-routed timeliness, using the Fenton-Wilkinson two-leg distribution.
double timely_prob_ssp(const LatencyModel& model, RegionId proposer_region, RegionId relay_region,
                       RegionId attester_region, double tau, double cutoff);
double timely_prob_ssp(const TwoLegLatency& legs, RegionId proposer_region, RegionId relay_region,
                       RegionId attester_region, double tau, double cutoff);

/// Pr[S >= k] for S a sum of independent Bernoulli(probs[i]); exact O(n k) DP.
double poisson_binomial_tail(std::span<const double> probs, std::size_t k);

/// Same tail where probs[g] is repeated counts[g] times.
double poisson_binomial_tail(std::span<const double> probs, std::span<const std::size_t> counts,
                             std::size_t k);

/// Exact canonicalization probability; `timely` is aligned with committee.attesters().
double canonical_prob(const Committee& committee, std::span<const double> timely);

/// Law-of-large-numbers stand-in: 1 if the mean timely probability reaches the threshold.
double lln_canonical_indicator(const Committee& committee, std::span<const double> timely);

}  // namespace geodec
