// harness.hpp
// Output directories for runs and parameter sweeps.
//
// A run directory holds the result tables (CSV or JSON), any JSON documents,
// summary.json and manifest.json. A sweep directory holds manifest.json, the
// aggregate table and points/<id>/, one run directory per grid point. Files
// are written under a temporary directory name and renamed into place.

#pragma once

#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "caslab/config.hpp"
#include "caslab/experiments.hpp"

namespace caslab {

enum class OutputFormat { csv, json };

std::string to_string(OutputFormat format);
OutputFormat output_format_from_string(const std::string& name);  // throws ConfigError

struct HarnessOptions {
    std::size_t jobs = 1;
    OutputFormat format = OutputFormat::csv;
};

std::string sha256_hex(const std::string& bytes);
// Hash of the canonical config document, excluding the output location.
std::string config_hash(const ExperimentConfig& config);

// Serialized result files in write order: tables, documents, summary.json.
std::vector<std::pair<std::string, std::string>> render_result(const ExperimentResult& result, OutputFormat format);

struct RunReport {
    std::filesystem::path directory;
    nlohmann::ordered_json manifest;
    nlohmann::ordered_json summary;
};

// Runs the experiment, then writes its directory. Nothing is written when the
// experiment throws. An existing directory is replaced only if it holds a
// manifest; any other non-empty directory is a ConfigError.
RunReport run_to_directory(const ExperimentConfig& config, const std::filesystem::path& out,
                           const HarnessOptions& options);

struct SweepOptions {
    HarnessOptions run;
    // Stop after this many newly executed points (simulates an interruption).
    std::optional<std::size_t> max_new_points;
};

struct SweepReport {
    std::size_t points = 0;
    std::size_t executed = 0;
    std::size_t skipped = 0;  // completed by an earlier invocation
    std::size_t failed = 0;
    std::size_t pending = 0;
    bool config_failures = false;
    bool complete = false;

    int exit_code() const;
};

// Cartesian grid over config.grid. Points are ordered lexicographically by
// their values (axes in key order). Resumes from an existing sweep manifest
// with the same config hash and format.
SweepReport run_sweep(const ExperimentConfig& config, const std::filesystem::path& out, const SweepOptions& options);

struct ManifestCheck {
    bool ok = true;
    std::vector<std::string> problems;
};

// Checks that the manifest lists exactly the directory contents with matching
// byte lengths and digests; recurses into completed sweep points.
ManifestCheck validate_output_directory(const std::filesystem::path& dir);

// kExitConfig for ConfigError and std::logic_error, kExitNumerical otherwise.
int exit_code_for(const std::exception& e);

// Diagnostic document for a failed command.
nlohmann::ordered_json diagnostic(const std::string& command, const std::exception& e);

std::string read_file(const std::filesystem::path& path);

}  // namespace caslab
