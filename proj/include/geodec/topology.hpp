#pragma once

#include <array>
#include <cmath>
#include <iosfwd>
#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace geodec {

using RegionId = std::size_t;

enum class Macro : int {
  Africa = 0,
  Asia,
  Oceania,
  Europe,
  MiddleEast,
  SouthAmerica,
  NorthAmerica,
};

inline constexpr std::size_t kMacroCount = 7;
inline constexpr std::array<Macro, kMacroCount> kAllMacros = {
    Macro::Africa,     Macro::Asia,         Macro::Oceania,      Macro::Europe,
    Macro::MiddleEast, Macro::SouthAmerica, Macro::NorthAmerica,
};

std::string_view macro_name(Macro m);
std::optional<Macro> parse_macro(std::string_view name);
/// Macro-region implied by a GCP region name prefix ("europe-west1" -> Europe).
std::optional<Macro> macro_from_region_name(std::string_view region);

struct Region {
  RegionId id = 0;
  std::string name;
  Macro macro = Macro::Africa;
};

/// Dense, contiguous table of simulation regions.
class RegionTable {
public:
  RegionTable() = default;
  explicit RegionTable(std::vector<Region> regions);

  std::size_t size() const { return regions_.size(); }
  const Region& operator[](RegionId id) const { return regions_.at(id); }
  const std::vector<Region>& regions() const { return regions_; }

  std::optional<RegionId> find(std::string_view name) const;
  RegionId id_of(std::string_view name) const;  // throws DatasetError
  std::vector<RegionId> in_macro(Macro m) const;

private:
  std::vector<Region> regions_;
  std::unordered_map<std::string, RegionId> by_name_;
};

/// Per-pair log-normal latency in milliseconds: ln d(j,k) ~ N(mu(j,k), sigma^2).
struct LatencyModel {
  Eigen::MatrixXd mu;
  double sigma = 0.5;

  std::size_t size() const { return static_cast<std::size_t>(mu.rows()); }
};

struct LatencyDataset {
  RegionTable regions;
  LatencyModel model;
};

struct DatasetOptions {
  double sigma = 0.5;
  /// Expected intra-region latency used when the dataset has no diagonal entry.
  double intra_region_ms = 2.0;
  /// Optional `name,macro` CSV overriding the prefix-derived macro-regions.
  std::string region_table_path;
};

/// Location parameter whose log-normal has the given mean.
inline double mu_for_mean(double mean_ms, double sigma) {
  return std::log(mean_ms) - 0.5 * sigma * sigma;
}

/// Reads a long-form `source,destination,mean_rtt_ms` CSV and calibrates mu so
/// every expected latency equals its measured mean.
LatencyDataset load_latency_dataset(const std::string& path, const DatasetOptions& options = {});
LatencyDataset parse_latency_dataset(std::istream& in, const DatasetOptions& options = {});

/// Builds a model directly from a matrix of expected latencies in milliseconds.
LatencyModel model_from_means(const Eigen::MatrixXd& mean_ms, double sigma);

double expected_latency(const LatencyModel& model, RegionId j, RegionId k);
double latency_cdf(const LatencyModel& model, RegionId j, RegionId k, double t_ms);
double sample_latency(const LatencyModel& model, RegionId j, RegionId k, std::mt19937_64& rng);

using MacroMatrix = Eigen::Matrix<double, kMacroCount, kMacroCount>;

/// Median of expected latencies over region pairs of each macro-region pair.
/// Entries for macro-regions without regions are NaN.
MacroMatrix macro_median_latency(const LatencyModel& model, const RegionTable& regions);

/// Standard normal CDF.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace geodec
