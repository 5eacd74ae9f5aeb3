// Command-line front end: run scenarios, expand presets, validate configs and
// summarize latency datasets.
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "geodec/error.hpp"
#include "geodec/scenario.hpp"

namespace {

using namespace geodec;

std::size_t scenario_workers() {
  if (const char* env = std::getenv("GEODEC_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void print_summary(const SimulationResult& r, std::ostream& os) {
  const auto& last = r.metrics.back();
  os << r.config.name << " (" << paradigm_name(r.config.paradigm) << "): gini=" << last.gini
     << " hhi=" << last.hhi << " lc=" << last.lc << " wall=" << r.wall_seconds << "s\n";
}

int run_many(std::vector<ScenarioConfig> configs, const std::filesystem::path& out) {
  const bool single = configs.size() == 1;
  const std::size_t workers = std::min(scenario_workers(), configs.size());
  // Scenarios fan out; each one then evaluates candidates serially.
  if (!single) {
    for (auto& c : configs) c.workers = 1;
  }
  std::mutex io;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        const auto result = run_scenario(configs[i]);
        export_results(result, single ? out : out / configs[i].name);
        std::lock_guard lock(io);
        print_summary(result, std::cout);
      } catch (const std::exception& e) {
        std::lock_guard lock(io);
        std::cerr << "error: " << configs[i].name << ": " << e.what() << '\n';
        failed = true;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Agent-based simulator of validator geography under MSP/SSP block building"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "results";
  auto* run = app.add_subcommand("run", "Run the scenario described by a YAML config");
  run->add_option("config", config_path, "Scenario config file")->required();
  run->add_option("--out", out_dir, "Output directory");

  std::string preset_name;
  std::string paradigm = "msp";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> validators;
  std::optional<std::size_t> slots;
  std::optional<double> cost;
  std::optional<std::size_t> committee;
  bool lln = false;
  auto* preset = app.add_subcommand("preset", "Run a named experiment preset");
  preset->add_option("name", preset_name, "Preset name")
      ->required()
      ->check(CLI::IsMember(std::vector<std::string>(kPresetNames.begin(), kPresetNames.end())));
  preset->add_option("--paradigm", paradigm, "msp or ssp")->required()->check(CLI::IsMember({"msp", "ssp"}));
  preset->add_option("--seed", seed, "Root random seed");
  preset->add_option("--validators", validators, "Validator count");
  preset->add_option("--slots", slots, "Slot count");
  preset->add_option("--cost", cost, "Migration cost (not for cost-sweep)");
  preset->add_option("--committee-size", committee, "Attesters sampled per slot (0 = all)");
  preset->add_flag("--lln", lln, "Use the law-of-large-numbers canonicalization indicator");
  preset->add_option("--out", out_dir, "Output directory")->required();

  auto* validate = app.add_subcommand("validate", "Validate a config file without running it");
  validate->add_option("config", config_path, "Scenario config file")->required();

  std::string dataset_path;
  double sigma = 0.5;
  auto* heatmap = app.add_subcommand("latency-heatmap", "Median latency between macro-regions");
  heatmap->add_option("dataset", dataset_path, "source,destination,mean_rtt_ms CSV")->required();
  heatmap->add_option("--sigma", sigma, "Log-normal shape parameter");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      return run_many({parse_config(config_path)}, out_dir);
    }
    if (*preset) {
      auto configs = expand_preset(preset_name, parse_paradigm(paradigm));
      for (auto& c : configs) {
        if (seed) c.seed = *seed;
        if (validators) c.validators = *validators;
        if (slots) c.slots = *slots;
        if (cost) {
          if (preset_name == "cost-sweep") throw ConfigError("--cost: cost-sweep sets the cost itself");
          c.migration_cost = *cost;
        }
        if (committee) c.committee_size = *committee;
        if (lln) c.canonical = CanonicalMode::Lln;
        c.validate();
      }
      return run_many(std::move(configs), out_dir);
    }
    if (*validate) {
      const auto c = parse_config(config_path);
      std::cout << "ok: " << c.name << " (" << paradigm_name(c.paradigm) << ", " << c.validators
                << " validators, " << c.slots << " slots)\n";
      return 0;
    }
    if (*heatmap) {
      DatasetOptions opts;
      opts.sigma = sigma;
      const auto data = load_latency_dataset(dataset_path, opts);
      const auto med = macro_median_latency(data.model, data.regions);
      std::cout << "macro";
      for (Macro m : kAllMacros) std::cout << ',' << macro_name(m);
      std::cout << ",mean_to_others\n";
      for (std::size_t a = 0; a < kMacroCount; ++a) {
        std::cout << macro_name(kAllMacros[a]);
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t b = 0; b < kMacroCount; ++b) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "%.2f", med(a, b));
          std::cout << ',' << buf;
          if (a != b && std::isfinite(med(a, b))) {
            sum += med(a, b);
            ++n;
          }
        }
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", n ? sum / n : 0.0);
        std::cout << ',' << buf << '\n';
      }
      return 0;
    }
  } catch (const geodec::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
