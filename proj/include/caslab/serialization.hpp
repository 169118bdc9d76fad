// serialization.hpp
// JSON forms of states, operators and setups. States use
// {dims: [...], re: [...], im: [...]}; a density matrix uses the same keys with
// the matrix flattened row-major. A bare operator uses dims = [rows, cols].

#pragma once

#include <json.hpp>

#include "caslab/core.hpp"
#include "caslab/hamiltonians.hpp"
#include "caslab/measurement.hpp"

namespace caslab {

nlohmann::json to_json(const StateVector& psi);
nlohmann::json to_json(const DensityMatrix& rho);
nlohmann::json matrix_to_json(const Matrix& m);

// Throw std::invalid_argument on malformed documents.
StateVector state_from_json(const nlohmann::json& doc);
DensityMatrix density_from_json(const nlohmann::json& doc);
Matrix matrix_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const SpinChainHamiltonian& h);
nlohmann::json to_json(const SpectralStats& stats);  // brody_q, regime, fit flag, warnings
nlohmann::json to_json(const WeakMeasurementSetup& setup);

}  // namespace caslab
