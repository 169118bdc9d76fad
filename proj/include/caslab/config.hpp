// config.hpp
// Experiment configuration: a JSON document naming the experiment kind, seed,
// repeat count, output directory and a kind-specific parameter block. Unknown
// fields are rejected; missing fields take the schema default.
//
//   {"kind": "zeno", "seed": 7, "repeat": 1, "output": "out/zeno",
//    "params": {"k_values": [10]},
//    "grid": {"omega": [0.5, 1.0]}}          // sweep only

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace caslab {

// Exit status contract of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3 };

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
    zeno,
    trajectory,
    competition,
    temperature_sweep,
    n_scaling,
    spacing,
    weak,
    chsh,
    patterns,
    madelung,
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);  // throws ConfigError
const std::vector<ExperimentKind>& all_experiment_kinds();

using GridAxis = std::pair<std::string, std::vector<nlohmann::json>>;

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::zeno;
    std::uint64_t seed = 0;
    std::uint64_t repeat = 1;  // ensemble size for stochastic kinds
    std::optional<std::string> output;
    nlohmann::json params;  // normalized, every default filled in
    std::vector<GridAxis> grid;  // sorted by parameter path

    // Canonical document; parse_config(to_json()) reproduces the config.
    nlohmann::json to_json() const;
};

// Throws ConfigError naming the offending field path.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

inline constexpr std::size_t kMaxGridPoints = 10000;

// Parameter paths are dotted ("measurement.p_site"); "seed" addresses the
// top-level seed. Returns a config with the values applied and revalidated.
ExperimentConfig apply_assignments(const ExperimentConfig& base,
                                   const std::vector<std::pair<std::string, nlohmann::json>>& values);

std::size_t grid_size(const std::vector<GridAxis>& grid);

// Field listing of every kind: type, default, bounds, choices.
nlohmann::ordered_json schema_document();

}  // namespace caslab
