// experiments.hpp
// One runner per experiment kind. A runner turns a validated config into
// result tables, JSON documents and a flat summary of scalar metrics. It
// performs no file I/O.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "caslab/config.hpp"
#include "caslab/table.hpp"

namespace caslab {

struct ExperimentResult {
    std::vector<std::pair<std::string, Table>> tables;         // base file names
    std::vector<std::pair<std::string, std::string>> documents;  // file name -> JSON text
    // Scalar metrics in a fixed order per kind (numbers, strings, bools, null).
    nlohmann::ordered_json summary = nlohmann::ordered_json::object();

    const Table& table(const std::string& name) const;  // throws std::out_of_range
};

// Library argument errors surface as std::invalid_argument; numerical
// breakdowns as NumericalError or std::runtime_error.
ExperimentResult run_experiment(const ExperimentConfig& config, std::size_t jobs = 1);

// Named model parameters echoed into the run manifest.
nlohmann::ordered_json parameter_echo(const ExperimentConfig& config);

}  // namespace caslab
