#include "geodec/attestation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace geodec {

Committee::Committee(std::vector<Attester> attesters, double threshold_fraction, double cutoff)
    : attesters_(std::move(attesters)), threshold_(threshold_fraction), cutoff_(cutoff) {
  if (!(threshold_ > 0.0 && threshold_ <= 1.0)) {
    throw std::invalid_argument("committee threshold must lie in (0, 1]");
  }
  std::map<RegionId, std::size_t> counts;
  for (const auto& a : attesters_) ++counts[a.region];
  groups_.assign(counts.begin(), counts.end());
}

std::size_t Committee::required() const {
  // Guard against 2/3 * 3 evaluating to 2.0000000000000004.
  const double raw = threshold_ * static_cast<double>(attesters_.size());
  const auto need = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  return std::max<std::size_t>(need, 1);
}

double LogNormalParams::mean() const {
  if (mu == -std::numeric_limits<double>::infinity()) return 0.0;
  return std::exp(mu + 0.5 * sigma * sigma);
}

double LogNormalParams::variance() const {
  const double m = mean();
  return m * m * std::expm1(sigma * sigma);
}

double lognormal_cdf(const LogNormalParams& p, double t) {
  if (t <= 0.0) return p.mu == -std::numeric_limits<double>::infinity() ? 1.0 : 0.0;
  if (p.mu == -std::numeric_limits<double>::infinity()) return 1.0;
  if (p.sigma == 0.0) return std::log(t) >= p.mu ? 1.0 : 0.0;
  return normal_cdf((std::log(t) - p.mu) / p.sigma);
}

LogNormalParams lognormal_sum_params(const LogNormalParams& p1, const LogNormalParams& p2) {
  const double m1 = p1.mean();
  const double m2 = p2.mean();
  if (m2 == 0.0) return p1;
  if (m1 == 0.0) return p2;
  const double total_mean = m1 + m2;
  const double total_var = p1.variance() + p2.variance();
  const double s2 = std::log1p(total_var / (total_mean * total_mean));
  return {std::log(total_mean) - 0.5 * s2, std::sqrt(s2)};
}

double timely_prob_msp(const LatencyModel& model, RegionId proposer_region,
                       RegionId attester_region, double tau, double cutoff) {
  if (!(tau < cutoff)) return 0.0;
  return latency_cdf(model, proposer_region, attester_region, (cutoff - tau) * 1000.0);
}

TwoLegLatency::TwoLegLatency(const LatencyModel& model, SumCdfMode mode, std::size_t mc_samples,
                             std::uint64_t mc_seed)
    : model_(&model), mode_(mode), mc_samples_(mc_samples), mc_seed_(mc_seed) {
  if (mode_ == SumCdfMode::MonteCarlo && mc_samples_ == 0) {
    throw std::invalid_argument("Monte Carlo mode needs at least one sample");
  }
}

const std::vector<double>& TwoLegLatency::samples(RegionId proposer, RegionId relay,
                                                  RegionId attester) const {
  const auto key = std::make_tuple(proposer, relay, attester);
  std::lock_guard lock(mutex_);
  auto& slot = cache_[key];
  if (!slot) {
    std::seed_seq seq{mc_seed_, static_cast<std::uint64_t>(proposer),
                      static_cast<std::uint64_t>(relay), static_cast<std::uint64_t>(attester)};
    std::mt19937_64 rng(seq);
    auto draws = std::make_unique<std::vector<double>>(mc_samples_);
    for (auto& d : *draws) {
      d = sample_latency(*model_, proposer, relay, rng) + sample_latency(*model_, relay, attester, rng);
    }
    std::sort(draws->begin(), draws->end());
    slot = std::move(draws);
  }
  return *slot;
}

double TwoLegLatency::cdf(RegionId proposer, RegionId relay, RegionId attester, double t_ms) const {
  if (mode_ == SumCdfMode::FentonWilkinson) {
    const auto sum = lognormal_sum_params(pair_params(*model_, proposer, relay),
                                          pair_params(*model_, relay, attester));
    return lognormal_cdf(sum, t_ms);
  }
  if (t_ms <= 0.0) return 0.0;
  const auto& draws = samples(proposer, relay, attester);
  const auto below = std::upper_bound(draws.begin(), draws.end(), t_ms) - draws.begin();
  return static_cast<double>(below) / static_cast<double>(draws.size());
}

double timely_prob_ssp(const LatencyModel& model, RegionId proposer_region, RegionId relay_region,
                       RegionId attester_region, double tau, double cutoff) {
  if (!(tau < cutoff)) return 0.0;
  const auto sum = lognormal_sum_params(pair_params(model, proposer_region, relay_region),
                                        pair_params(model, relay_region, attester_region));
  return lognormal_cdf(sum, (cutoff - tau) * 1000.0);
}

double timely_prob_ssp(const TwoLegLatency& legs, RegionId proposer_region, RegionId relay_region,
                       RegionId attester_region, double tau, double cutoff) {
  if (!(tau < cutoff)) return 0.0;
  return legs.cdf(proposer_region, relay_region, attester_region, (cutoff - tau) * 1000.0);
}

namespace {

// dist[j] = Pr[S = j] for j < k, dist[k] = Pr[S >= k]. States that can no
// longer reach k with the attesters still to come are dropped.
class TailAccumulator {
public:
  TailAccumulator(std::size_t k, std::size_t n) : k_(k), remaining_(n), dist_(k + 1, 0.0) {
    dist_[0] = 1.0;
  }

  void add(double p, std::size_t times) {
    if (p <= 0.0) {
      advance(times);
      return;
    }
    if (p >= 1.0) {
      const std::size_t shift = std::min(times, k_);
      for (std::size_t j = k_ - 1; j + shift >= k_ && j < k_; --j) dist_[k_] += dist_[j];
      for (std::size_t j = k_ - 1; j >= shift && j < k_; --j) dist_[j] = dist_[j - shift];
      std::fill(dist_.begin(), dist_.begin() + static_cast<std::ptrdiff_t>(std::min(shift, k_)), 0.0);
      advance(times);
      return;
    }
    const double q = 1.0 - p;
    for (std::size_t t = 0; t < times; ++t) {
      --remaining_;
      const std::size_t low = k_ > remaining_ ? k_ - remaining_ : 0;
      if (std::min(seen_ + 1, k_) == k_) dist_[k_] += dist_[k_ - 1] * p;
      for (std::size_t j = std::min(seen_ + 1, k_ - 1); j >= std::max<std::size_t>(low, 1); --j) {
        dist_[j] = dist_[j] * q + dist_[j - 1] * p;
      }
      if (low == 0) dist_[0] *= q;
      ++seen_;
    }
  }

  double tail() const { return std::clamp(dist_[k_], 0.0, 1.0); }

private:
  void advance(std::size_t times) {
    seen_ += times;
    remaining_ -= times;
  }

  std::size_t k_;
  std::size_t remaining_;
  std::size_t seen_ = 0;
  std::vector<double> dist_;
};

}  // namespace

double poisson_binomial_tail(std::span<const double> probs, std::span<const std::size_t> counts,
                             std::size_t k) {
  if (probs.size() != counts.size()) throw std::invalid_argument("probs/counts size mismatch");
  if (k == 0) return 1.0;
  const std::size_t n = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (k > n) return 0.0;
  TailAccumulator acc(k, n);
  for (std::size_t g = 0; g < probs.size(); ++g) acc.add(probs[g], counts[g]);
  return acc.tail();
}

double poisson_binomial_tail(std::span<const double> probs, std::size_t k) {
  std::vector<std::size_t> ones(probs.size(), 1);
  return poisson_binomial_tail(probs, ones, k);
}

double canonical_prob(const Committee& committee, std::span<const double> timely) {
  if (timely.size() != committee.size()) throw std::invalid_argument("timely/committee size mismatch");
  return poisson_binomial_tail(timely, committee.required());
}

double lln_canonical_indicator(const Committee& committee, std::span<const double> timely) {
  if (timely.size() != committee.size()) throw std::invalid_argument("timely/committee size mismatch");
  if (timely.empty()) return 0.0;
  const double mean = std::accumulate(timely.begin(), timely.end(), 0.0) / timely.size();
  return mean >= committee.threshold_fraction() ? 1.0 : 0.0;
}

}  // namespace geodec
