#include "geodec/scenario.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "geodec/error.hpp"

namespace geodec {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kAligned = {"asia-northeast1", "europe-west1", "us-east4"};
const std::vector<std::string> kMisaligned = {"africa-south1", "australia-southeast1",
                                              "southamerica-east1"};

std::string fmt_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

double parse_number(const YAML::Node& node, const std::string& path) {
  const auto text = node.as<std::string>();
  try {
    if (auto slash = text.find('/'); slash != std::string::npos) {
      return std::stod(text.substr(0, slash)) / std::stod(text.substr(slash + 1));
    }
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    if (lower(text) == "inf" || lower(text) == ".inf") return std::numeric_limits<double>::infinity();
    throw ConfigError(path + ": expected a number, got '" + text + "'");
  }
}

std::size_t parse_count(const YAML::Node& node, const std::string& path) {
  const double v = parse_number(node, path);
  if (!(v >= 0.0) || v != std::floor(v)) throw ConfigError(path + ": expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

/// Checks that a mapping only contains known keys.
void check_keys(const YAML::Node& node, const std::string& path, std::initializer_list<const char*> keys) {
  if (!node.IsMap()) throw ConfigError((path.empty() ? "<root>" : path) + ": expected a mapping");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError((path.empty() ? "" : path + ".") + key + ": unknown field");
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  if (path.is_absolute() || base.empty()) return path;
  return base / path;
}

void apply_preset(ScenarioConfig& c, const std::string& name) {
  if (name == "baseline-homogeneous") {
  } else if (name == "sources-aligned") {
    c.sources.homogeneous = false;
    c.sources.regions = kAligned;
  } else if (name == "sources-misaligned") {
    c.sources.homogeneous = false;
    c.sources.regions = kMisaligned;
  } else if (name == "real-world") {
    c.placement.homogeneous = false;
    c.placement.shares = read_share_table(default_real_world_shares());
  } else if (name == "slot-time-6s") {
    c.consensus.slot_duration = 6.0;
    c.consensus.cutoff = 3.0;
  } else if (name == "cost-sweep" || name == "gamma-sweep") {
    throw ConfigError("preset: '" + name + "' is a sweep; use the preset command");
  } else {
    throw UnknownPreset(name);
  }
  c.name = name;
}

}  // namespace

Paradigm parse_paradigm(const std::string& text) {
  const auto t = lower(text);
  if (t == "msp") return Paradigm::Msp;
  if (t == "ssp") return Paradigm::Ssp;
  throw ConfigError("paradigm: expected 'msp' or 'ssp', got '" + text + "'");
}

std::string paradigm_name(Paradigm p) { return p == Paradigm::Msp ? "msp" : "ssp"; }

std::vector<std::pair<std::string, double>> read_share_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("validators.placement: cannot open share table '" + path.string() + "'");
  std::vector<std::pair<std::string, double>> shares;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("share table: malformed line '" + line + "'");
    const auto key = line.substr(0, comma);
    const auto value = line.substr(comma + 1);
    if (key == "key" || key == "region" || key == "macro") continue;
    try {
      shares.emplace_back(key, std::stod(value));
    } catch (const std::exception&) {
      throw ConfigError("share table: bad share '" + value + "'");
    }
  }
  return shares;
}

ScenarioConfig parse_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.parent_path());
}

ScenarioConfig parse_config_text(const std::string& text, const fs::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  check_keys(root, "", {"name", "preset", "paradigm", "seed", "slots", "migration_cost",
                        "metrics_granularity", "dataset", "validators", "sources", "consensus",
                        "attestation", "workers"});
  if (!root["paradigm"]) throw ConfigError("paradigm missing");

  ScenarioConfig c;
  c.paradigm = parse_paradigm(root["paradigm"].as<std::string>());
  if (root["preset"]) apply_preset(c, root["preset"].as<std::string>());
  if (root["name"]) c.name = root["name"].as<std::string>();
  if (root["seed"]) c.seed = static_cast<std::uint64_t>(parse_count(root["seed"], "seed"));
  if (root["slots"]) c.slots = parse_count(root["slots"], "slots");
  if (root["migration_cost"]) c.migration_cost = parse_number(root["migration_cost"], "migration_cost");
  if (root["workers"]) c.workers = parse_count(root["workers"], "workers");
  if (auto g = root["metrics_granularity"]) {
    const auto v = lower(g.as<std::string>());
    if (v == "gcp" || v == "region") {
      c.granularity = Granularity::GcpRegion;
    } else if (v == "macro") {
      c.granularity = Granularity::MacroRegion;
    } else {
      throw ConfigError("metrics_granularity: expected 'gcp' or 'macro'");
    }
  }
  if (auto d = root["dataset"]) {
    check_keys(d, "dataset", {"latency", "regions", "sigma", "intra_region_ms"});
    if (d["latency"]) c.dataset.latency_csv = resolve(base_dir, d["latency"].as<std::string>()).string();
    if (d["regions"]) c.dataset.regions_csv = resolve(base_dir, d["regions"].as<std::string>()).string();
    if (d["sigma"]) c.dataset.sigma = parse_number(d["sigma"], "dataset.sigma");
    if (d["intra_region_ms"]) {
      c.dataset.intra_region_ms = parse_number(d["intra_region_ms"], "dataset.intra_region_ms");
    }
  }
  if (auto v = root["validators"]) {
    check_keys(v, "validators", {"count", "placement"});
    if (v["count"]) c.validators = parse_count(v["count"], "validators.count");
    if (auto p = v["placement"]) {
      if (p.IsScalar()) {
        const auto kind = lower(p.as<std::string>());
        if (kind == "homogeneous") {
          c.placement = PlacementSpec{};
        } else if (kind == "real-world") {
          c.placement.homogeneous = false;
          c.placement.shares = read_share_table(default_real_world_shares());
        } else {
          c.placement.homogeneous = false;
          c.placement.shares = read_share_table(resolve(base_dir, p.as<std::string>()));
        }
      } else if (p.IsMap()) {
        c.placement.homogeneous = false;
        c.placement.shares.clear();
        for (const auto& kv : p) {
          const auto key = kv.first.as<std::string>();
          c.placement.shares.emplace_back(key, parse_number(kv.second, "validators.placement." + key));
        }
      } else {
        throw ConfigError("validators.placement: expected 'homogeneous', a file or a share map");
      }
    }
  }
  if (auto s = root["sources"]) {
    check_keys(s, "sources", {"placement", "a", "b"});
    if (auto p = s["placement"]) {
      if (p.IsScalar()) {
        const auto kind = lower(p.as<std::string>());
        if (kind == "homogeneous") {
          c.sources.homogeneous = true;
          c.sources.regions.clear();
        } else if (kind == "aligned") {
          c.sources.homogeneous = false;
          c.sources.regions = kAligned;
        } else if (kind == "misaligned") {
          c.sources.homogeneous = false;
          c.sources.regions = kMisaligned;
        } else {
          throw ConfigError("sources.placement: expected homogeneous, aligned, misaligned or a list");
        }
      } else if (p.IsSequence()) {
        c.sources.homogeneous = false;
        c.sources.regions.clear();
        for (const auto& r : p) c.sources.regions.push_back(r.as<std::string>());
      } else {
        throw ConfigError("sources.placement: expected a keyword or a list of regions");
      }
    }
    if (s["a"]) c.sources.a = parse_number(s["a"], "sources.a");
    if (s["b"]) c.sources.b = parse_number(s["b"], "sources.b");
  }
  if (auto k = root["consensus"]) {
    check_keys(k, "consensus", {"slot_duration", "cutoff", "gamma", "risk_tolerance", "time_step"});
    if (k["slot_duration"]) c.consensus.slot_duration = parse_number(k["slot_duration"], "consensus.slot_duration");
    if (k["cutoff"]) c.consensus.cutoff = parse_number(k["cutoff"], "consensus.cutoff");
    if (k["gamma"]) c.consensus.threshold = parse_number(k["gamma"], "consensus.gamma");
    if (k["risk_tolerance"]) {
      c.consensus.risk_tolerance = parse_number(k["risk_tolerance"], "consensus.risk_tolerance");
    }
    if (k["time_step"]) c.consensus.time_step = parse_number(k["time_step"], "consensus.time_step");
  }
  if (auto a = root["attestation"]) {
    check_keys(a, "attestation", {"committee_size", "canonical", "ssp_latency_cdf", "mc_samples"});
    if (a["committee_size"]) c.committee_size = parse_count(a["committee_size"], "attestation.committee_size");
    if (a["canonical"]) {
      const auto v = lower(a["canonical"].as<std::string>());
      if (v == "exact") {
        c.canonical = CanonicalMode::Exact;
      } else if (v == "lln") {
        c.canonical = CanonicalMode::Lln;
      } else {
        throw ConfigError("attestation.canonical: expected 'exact' or 'lln'");
      }
    }
    if (a["ssp_latency_cdf"]) {
      const auto v = lower(a["ssp_latency_cdf"].as<std::string>());
      if (v == "fw") {
        c.ssp_latency_cdf = SumCdfMode::FentonWilkinson;
      } else if (v == "mc") {
        c.ssp_latency_cdf = SumCdfMode::MonteCarlo;
      } else {
        throw ConfigError("attestation.ssp_latency_cdf: expected 'fw' or 'mc'");
      }
    }
    if (a["mc_samples"]) c.mc_samples = parse_count(a["mc_samples"], "attestation.mc_samples");
  }
  c.validate();
  return c;
}

std::vector<ScenarioConfig> expand_preset(const std::string& name, Paradigm paradigm) {
  ScenarioConfig base;
  base.paradigm = paradigm;
  std::vector<ScenarioConfig> out;
  if (name == "cost-sweep") {
    for (double cost : {0.0, 0.001, 0.002, 0.003}) {
      auto c = base;
      c.migration_cost = cost;
      c.name = "cost-sweep/c=" + fmt_double(cost);
      out.push_back(c);
    }
  } else if (name == "gamma-sweep") {
    const std::array<std::pair<const char*, double>, 4> gammas = {
        {{"1_3", 1.0 / 3.0}, {"1_2", 0.5}, {"2_3", 2.0 / 3.0}, {"4_5", 0.8}}};
    for (const auto& [label, gamma] : gammas) {
      auto c = base;
      c.consensus.threshold = gamma;
      c.name = std::string("gamma-sweep/gamma=") + label;
      out.push_back(c);
    }
  } else {
    auto c = base;
    apply_preset(c, name);
    out.push_back(c);
  }
  for (auto& c : out) c.validate();
  return out;
}

namespace {

nlohmann::ordered_json config_json(const ScenarioConfig& c) {
  nlohmann::ordered_json j;
  j["name"] = c.name;
  j["paradigm"] = paradigm_name(c.paradigm);
  j["seed"] = c.seed;
  j["slots"] = c.slots;
  j["migration_cost"] = c.migration_cost;
  j["metrics_granularity"] = c.granularity == Granularity::GcpRegion ? "gcp" : "macro";
  j["dataset"] = {{"latency", c.dataset.latency_csv.empty() ? "<bundled>" : c.dataset.latency_csv},
                  {"regions", c.dataset.regions_csv},
                  {"sigma", c.dataset.sigma},
                  {"intra_region_ms", c.dataset.intra_region_ms}};
  nlohmann::ordered_json placement;
  if (c.placement.homogeneous) {
    placement = "homogeneous";
  } else {
    for (const auto& [k, v] : c.placement.shares) placement[k] = v;
  }
  j["validators"] = {{"count", c.validators}, {"placement", placement}};
  nlohmann::ordered_json sources;
  if (c.sources.homogeneous) {
    sources = "homogeneous";
  } else {
    sources = c.sources.regions;
  }
  j["sources"] = {{"placement", sources}, {"a", c.sources.a}, {"b", c.sources.b}};
  j["consensus"] = {{"slot_duration", c.consensus.slot_duration},
                    {"cutoff", c.consensus.cutoff},
                    {"gamma", c.consensus.threshold},
                    {"risk_tolerance", c.consensus.risk_tolerance},
                    {"time_step", c.consensus.time_step}};
  j["attestation"] = {
      {"committee_size", c.committee_size},
      {"canonical", c.canonical == CanonicalMode::Exact ? "exact" : "lln"},
      {"ssp_latency_cdf", c.ssp_latency_cdf == SumCdfMode::FentonWilkinson ? "fw" : "mc"},
      {"mc_samples", c.mc_samples}};
  return j;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

void export_results(const SimulationResult& result, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create '" + out_dir.string() + "': " + ec.message());
  const auto& regions = result.regions;

  {
    auto out = open_out(out_dir / "metrics.csv");
    out << "slot,gini,hhi,cv,lc\n";
    for (const auto& m : result.metrics) {
      out << m.slot << ',' << fmt_double(m.gini) << ',' << fmt_double(m.hhi) << ','
          << (m.cv ? fmt_double(*m.cv) : std::string()) << ',' << m.lc << '\n';
    }
  }
  {
    auto out = open_out(out_dir / "slots.jsonl");
    for (const auto& o : result.outcomes) {
      nlohmann::ordered_json j;
      j["slot"] = o.slot;
      j["proposer"] = o.proposer;
      j["origin_region"] = regions[o.origin_region].name;
      j["move"] = o.decision.move;
      j["destination"] = regions[o.decision.destination].name;
      if (result.config.paradigm == Paradigm::Ssp) j["relay"] = o.decision.plan.location;
      j["tau_star"] = o.tau_star;
      j["canonical_prob"] = o.canonical_prob;
      j["feasible"] = o.decision.plan.feasible;
      j["payoff"] = o.payoff;
      j["marginal_benefit"] = o.marginal_benefit;
      out << j.dump() << '\n';
    }
  }
  {
    auto out = open_out(out_dir / "population_final.csv");
    out << "validator,region\n";
    for (const auto& v : result.final_population) out << v.id << ',' << regions[v.region].name << '\n';
  }
  {
    auto out = open_out(out_dir / "region_histogram.csv");
    out << "slot";
    for (Macro m : kAllMacros) out << ',' << macro_name(m);
    out << '\n';
    for (std::size_t n = 0; n < result.macro_histogram.size(); ++n) {
      out << n;
      for (auto count : result.macro_histogram[n]) out << ',' << count;
      out << '\n';
    }
  }
  {
    auto out = open_out(out_dir / "marginal_benefit.csv");
    out << "slot,marginal_benefit\n";
    for (const auto& o : result.outcomes) out << o.slot << ',' << fmt_double(o.marginal_benefit) << '\n';
  }
  {
    nlohmann::ordered_json j;
    j["config"] = config_json(result.config);
    nlohmann::ordered_json sources = nlohmann::ordered_json::array();
    for (const auto& s : result.sources) {
      sources.push_back({{"kind", s.kind == SourceKind::Relay ? "relay" : "signal"},
                         {"region", regions[s.region].name},
                         {"a", s.a},
                         {"b", s.b}});
    }
    j["sources"] = sources;
    if (!result.metrics.empty()) {
      const auto& last = result.metrics.back();
      j["final"] = {{"slot", last.slot},
                    {"gini", last.gini},
                    {"hhi", last.hhi},
                    {"cv", last.cv ? nlohmann::ordered_json(*last.cv) : nlohmann::ordered_json()},
                    {"lc", last.lc}};
    }
    nlohmann::ordered_json hist;
    const auto& final_hist = result.macro_histogram.empty() ? result.initial_histogram
                                                            : result.macro_histogram.back();
    for (std::size_t i = 0; i < kMacroCount; ++i) hist[std::string(macro_name(kAllMacros[i]))] = final_hist[i];
    j["final_macro_histogram"] = hist;
    j["wall_seconds"] = result.wall_seconds;
    auto out = open_out(out_dir / "summary.json");
    out << j.dump(2) << '\n';
  }
}

}  // namespace geodec
