#include "geodec/topology.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "geodec/error.hpp"

namespace geodec {

namespace {

constexpr std::array<std::string_view, kMacroCount> kMacroNames = {
    "Africa", "Asia", "Oceania", "Europe", "MiddleEast", "SouthAmerica", "NorthAmerica",
};

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::map<std::string, Macro> read_region_overrides(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open region table '" + path + "'");
  std::map<std::string, Macro> out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto f = split_csv_line(line);
    if (header) {
      header = false;
      if (f.size() >= 2 && f[0] == "name" && f[1] == "macro") continue;
    }
    if (f.size() != 2) throw DatasetError("region table: malformed line '" + line + "'");
    auto macro = parse_macro(f[1]);
    if (!macro) throw DatasetError("region table: unknown macro-region '" + f[1] + "'");
    out[f[0]] = *macro;
  }
  return out;
}

}  // namespace

std::string_view macro_name(Macro m) { return kMacroNames.at(static_cast<std::size_t>(m)); }

std::optional<Macro> parse_macro(std::string_view name) {
  std::string key;
  for (char c : name) {
    if (c != ' ' && c != '_' && c != '-') key.push_back(static_cast<char>(std::tolower(c)));
  }
  for (std::size_t i = 0; i < kMacroCount; ++i) {
    std::string candidate;
    for (char c : kMacroNames[i]) candidate.push_back(static_cast<char>(std::tolower(c)));
    if (candidate == key) return static_cast<Macro>(i);
  }
  return std::nullopt;
}

std::optional<Macro> macro_from_region_name(std::string_view region) {
  static const std::array<std::pair<std::string_view, Macro>, 8> prefixes = {{
      {"africa-", Macro::Africa},
      {"asia-", Macro::Asia},
      {"australia-", Macro::Oceania},
      {"europe-", Macro::Europe},
      {"me-", Macro::MiddleEast},
      {"southamerica-", Macro::SouthAmerica},
      {"northamerica-", Macro::NorthAmerica},
      {"us-", Macro::NorthAmerica},
  }};
  for (const auto& [prefix, macro] : prefixes) {
    if (region.starts_with(prefix)) return macro;
  }
  return std::nullopt;
}

RegionTable::RegionTable(std::vector<Region> regions) : regions_(std::move(regions)) {
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    if (regions_[i].id != i) throw DatasetError("region ids must be contiguous from 0");
    if (!by_name_.emplace(regions_[i].name, i).second) {
      throw DatasetError("duplicate region name '" + regions_[i].name + "'");
    }
  }
}

std::optional<RegionId> RegionTable::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

RegionId RegionTable::id_of(std::string_view name) const {
  auto id = find(name);
  if (!id) throw DatasetError("unknown region '" + std::string(name) + "'");
  return *id;
}

std::vector<RegionId> RegionTable::in_macro(Macro m) const {
  std::vector<RegionId> out;
  for (const auto& r : regions_) {
    if (r.macro == m) out.push_back(r.id);
  }
  return out;
}

LatencyDataset load_latency_dataset(const std::string& path, const DatasetOptions& options) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open latency dataset '" + path + "'");
  return parse_latency_dataset(in, options);
}

LatencyDataset parse_latency_dataset(std::istream& in, const DatasetOptions& options) {
  if (!(options.sigma >= 0.0) || !std::isfinite(options.sigma)) {
    throw DatasetError("sigma must be finite and non-negative");
  }
  if (!(options.intra_region_ms > 0.0)) throw DatasetError("intra-region latency must be positive");

  std::map<std::string, Macro> overrides;
  if (!options.region_table_path.empty()) overrides = read_region_overrides(options.region_table_path);

  std::vector<std::string> names;
  std::unordered_map<std::string, RegionId> index;
  std::map<std::pair<RegionId, RegionId>, double> means;
  auto intern = [&](const std::string& name) {
    auto [it, inserted] = index.emplace(name, names.size());
    if (inserted) names.push_back(name);
    return it->second;
  };

  std::string line;
  if (!std::getline(in, line)) throw DatasetError("latency dataset is empty");
  {
    auto header = split_csv_line(line);
    if (header.size() != 3 || header[0] != "source" || header[1] != "destination" ||
        header[2] != "mean_rtt_ms") {
      throw DatasetError("latency dataset header must be 'source,destination,mean_rtt_ms'");
    }
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 3) {
      throw DatasetError("latency dataset line " + std::to_string(line_no) + ": expected 3 fields");
    }
    double mean = 0.0;
    try {
      std::size_t used = 0;
      mean = std::stod(f[2], &used);
      if (used != f[2].size()) throw std::invalid_argument(f[2]);
    } catch (const std::exception&) {
      throw DatasetError("latency dataset line " + std::to_string(line_no) + ": bad number '" + f[2] +
                         "'");
    }
    if (!(mean > 0.0) || !std::isfinite(mean)) throw NonPositiveLatency(f[0], f[1]);
    const RegionId j = intern(f[0]);
    const RegionId k = intern(f[1]);
    if (!means.emplace(std::make_pair(j, k), mean).second) throw DuplicatePair(f[0], f[1]);
  }

  const std::size_t m = names.size();
  std::vector<Region> regions;
  regions.reserve(m);
  for (RegionId id = 0; id < m; ++id) {
    std::optional<Macro> macro;
    if (auto it = overrides.find(names[id]); it != overrides.end()) macro = it->second;
    if (!macro) macro = macro_from_region_name(names[id]);
    if (!macro) throw DatasetError("no macro-region known for region '" + names[id] + "'");
    regions.push_back(Region{id, names[id], *macro});
  }

  Eigen::MatrixXd mean_ms(m, m);
  for (RegionId j = 0; j < m; ++j) {
    for (RegionId k = 0; k < m; ++k) {
      auto it = means.find({j, k});
      if (it != means.end()) {
        mean_ms(j, k) = it->second;
      } else if (j == k) {
        mean_ms(j, k) = options.intra_region_ms;
      } else {
        throw MissingPair(names[j], names[k]);
      }
    }
  }
  return LatencyDataset{RegionTable(std::move(regions)), model_from_means(mean_ms, options.sigma)};
}

LatencyModel model_from_means(const Eigen::MatrixXd& mean_ms, double sigma) {
  LatencyModel model;
  model.sigma = sigma;
  model.mu = mean_ms.unaryExpr([sigma](double mean) { return mu_for_mean(mean, sigma); });
  return model;
}

double expected_latency(const LatencyModel& model, RegionId j, RegionId k) {
  return std::exp(model.mu(j, k) + 0.5 * model.sigma * model.sigma);
}

double latency_cdf(const LatencyModel& model, RegionId j, RegionId k, double t_ms) {
  if (t_ms <= 0.0) return 0.0;
  const double mu = model.mu(j, k);
  if (model.sigma == 0.0) return std::log(t_ms) >= mu ? 1.0 : 0.0;
  return normal_cdf((std::log(t_ms) - mu) / model.sigma);
}

double sample_latency(const LatencyModel& model, RegionId j, RegionId k, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  return std::exp(model.mu(j, k) + model.sigma * z(rng));
}

MacroMatrix macro_median_latency(const LatencyModel& model, const RegionTable& regions) {
  MacroMatrix out;
  for (std::size_t a = 0; a < kMacroCount; ++a) {
    const auto from = regions.in_macro(static_cast<Macro>(a));
    for (std::size_t b = 0; b < kMacroCount; ++b) {
      const auto to = regions.in_macro(static_cast<Macro>(b));
      std::vector<double> block;
      block.reserve(from.size() * to.size());
      for (RegionId j : from) {
        for (RegionId k : to) block.push_back(expected_latency(model, j, k));
      }
      if (block.empty()) {
        out(a, b) = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      const std::size_t mid = block.size() / 2;
      std::nth_element(block.begin(), block.begin() + mid, block.end());
      double median = block[mid];
      if (block.size() % 2 == 0) {
        median = 0.5 * (median + *std::max_element(block.begin(), block.begin() + mid));
      }
      out(a, b) = median;
    }
  }
  return out;
}

}  // namespace geodec
