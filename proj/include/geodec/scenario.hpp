#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "geodec/engine.hpp"

namespace geodec {

inline constexpr std::array<std::string_view, 7> kPresetNames = {
    "baseline-homogeneous", "sources-aligned", "sources-misaligned", "real-world",
    "cost-sweep",           "gamma-sweep",     "slot-time-6s",
};

/// Reads a YAML scenario file and applies defaults; every failure names its field.
ScenarioConfig parse_config(const std::filesystem::path& path);
ScenarioConfig parse_config_text(const std::string& text,
                                 const std::filesystem::path& base_dir = {});

/// Expands a named experiment. Sweeps yield one config per swept value, each
/// with a distinct `name` suitable as an output subdirectory.
std::vector<ScenarioConfig> expand_preset(const std::string& name, Paradigm paradigm);

/// Share table read from a `key,share` CSV (keys are macro-regions or regions).
std::vector<std::pair<std::string, double>> read_share_table(const std::filesystem::path& path);

Paradigm parse_paradigm(const std::string& text);
std::string paradigm_name(Paradigm p);

/// Writes metrics.csv, slots.jsonl, population_final.csv, region_histogram.csv,
/// marginal_benefit.csv and summary.json into `out_dir`.
void export_results(const SimulationResult& result, const std::filesystem::path& out_dir);

}  // namespace geodec
