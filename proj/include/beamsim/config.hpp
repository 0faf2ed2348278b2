#pragma once

// Experiment configuration and its JSON form.
//
// A config file holds either one experiment or a preset:
//
//   {"preset": "fig1_static", "description": "...",
//    "common": {...shared fields...},
//    "series": [{...per-series overrides...}, ...]}
//
// Each series is `common` merged with its own object (JSON merge patch).

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "beamsim/algorithms.hpp"
#include "beamsim/channel_dynamics.hpp"

namespace beamsim {

/// Invalid configuration. `path` points at the offending key, e.g. ".scenario.foo".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& message)
        : std::runtime_error(path.empty() ? message : path + ": " + message),
          path_(std::move(path)),
          message_(message) {}
    const std::string& path() const { return path_; }
    const std::string& message() const { return message_; }

private:
    std::string path_;
    std::string message_;
};

struct ExperimentConfig {
    AlgorithmParams algorithm;
    ScenarioSpec scenario;
    int n_trials = 100;
    std::int64_t slot_budget = 1000;
    std::uint64_t master_seed = 0;
    std::string output_dir = "out";
    std::string series_name;  // defaults to the algorithm name plus feedback label

    void validate() const;
};

struct ConfigFile {
    std::string preset;  // empty for a single experiment
    std::string description;
    std::vector<ExperimentConfig> series;
};

ExperimentConfig parse_experiment(const nlohmann::json& j);
ConfigFile parse_config_file(const nlohmann::json& j);
ConfigFile load_config(const std::filesystem::path& path);

/// Fully resolved form, every default filled in.
nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace beamsim
