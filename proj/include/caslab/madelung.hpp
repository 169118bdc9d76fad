// madelung.hpp
// Amplitude-phase (Madelung) decomposition of 1-D grid wavefunctions:
// psi = R exp(i S / hbar), quantum potential Q = -(hbar^2 / 2m) R'' / R and
// momentum field p = dS/dx. Diagnostic only; no time evolution.

#pragma once

#include <vector>

#include "caslab/core.hpp"

namespace caslab {

struct GridWavefunction {
    double x0 = 0.0;
    double dx = 0.0;
    std::vector<cplx> values;
    double hbar = 1.0;
    double mass = 1.0;

    std::size_t size() const { return values.size(); }
    double x(std::size_t i) const { return x0 + static_cast<double>(i) * dx; }
    // n >= 16, dx > 0, hbar > 0, mass > 0, sum |psi|^2 dx = 1 within 1e-8.
    void validate() const;
};

// Samples fn on n points starting at x0 and rescales to unit discrete norm.
template <typename Fn>
GridWavefunction sample_wavefunction(double x0, double dx, std::size_t n, Fn&& fn, double hbar = 1.0,
                                     double mass = 1.0) {
    GridWavefunction psi{x0, dx, std::vector<cplx>(n), hbar, mass};
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        psi.values[i] = cplx(fn(psi.x(i)));
        norm += std::norm(psi.values[i]) * dx;
    }
    if (norm > 0.0) {
        for (auto& v : psi.values) v /= std::sqrt(norm);
    }
    psi.validate();
    return psi;
}

struct HydroFields {
    double x0 = 0.0;
    double dx = 0.0;
    std::vector<double> amplitude;  // R >= 0
    std::vector<double> action;     // S, hbar * unwrapped phase
    std::vector<bool> action_valid;
    std::vector<double> quantum_potential;
    std::vector<bool> potential_valid;
    std::vector<double> momentum;
    std::vector<bool> momentum_valid;

    double x(std::size_t i) const { return x0 + static_cast<double>(i) * dx; }
};

// R and S only. Points with |psi| <= mask_threshold have S masked. The phase
// is unwrapped by nearest-branch continuation outward from the grid center.
HydroFields decompose(const GridWavefunction& psi, double mask_threshold = 1e-12);

// Fills quantum_potential with a 4th-order stencil for R''. Points within two
// cells of the boundary or with R <= relative_mask * max R are masked.
void quantum_potential(HydroFields& fields, double mass, double hbar, double relative_mask = 1e-6);

// Fills momentum with the 4th-order central difference of S.
void momentum_field(HydroFields& fields);

struct ClassicalLimitPoint {
    double hbar;
    double max_abs_q;
};

struct ClassicalLimitScan {
    std::vector<ClassicalLimitPoint> points;
    double loglog_slope = 0.0;  // d log max|Q| / d log hbar
};

// Holds R fixed (the shape's amplitude) and evaluates max |Q| per hbar.
ClassicalLimitScan classical_limit_scan(const GridWavefunction& shape, const std::vector<double>& hbar_values);

}  // namespace caslab
