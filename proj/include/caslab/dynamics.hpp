// dynamics.hpp
// Trajectory engine: unitary evolution interleaved with stochastic site
// measurements (many-body Zeno dynamics) and phenomenological dephasing.
// Also the survival, entropy-oscillation and state-evolution diagnostics.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "caslab/core.hpp"
#include "caslab/measurement.hpp"
#include "caslab/random.hpp"

namespace caslab {

enum class DecoherenceKind { none, exponential, power_law };

struct DecoherenceSpec {
    DecoherenceKind kind = DecoherenceKind::none;
    double rate = 0.0;      // Gamma, exponential
    double scale = 1.0;     // tau, power law
    double exponent = 1.0;  // alpha, power law
    // Unitary whose columns are the pointer basis; empty means computational.
    Matrix pointer_basis;

    void validate() const;
    // Off-diagonal suppression D(t): exp(-Gamma t) or (1 + t/tau)^-alpha.
    double factor(double t) const;
};

// Multiplies off-diagonals (in the pointer basis) by D(t_elapsed).
DensityMatrix apply_decoherence(const DensityMatrix& rho, const DecoherenceSpec& spec, double t_elapsed);
// Same with an explicit factor in [0, 1].
DensityMatrix apply_dephasing(const DensityMatrix& rho, const Matrix& pointer_basis, double factor);

DensityMatrix evolve_von_neumann(const DensityMatrix& rho, const Matrix& hamiltonian, double dt);

enum class TrajectoryMode { simultaneous_kraus, sequential_single_site };

std::string to_string(TrajectoryMode mode);
std::string to_string(DecoherenceKind kind);

struct StepResult {
    StateVector state;
    std::vector<SiteOutcome> outcomes;
};

// psi' = M U psi with M sampled per mode. Simultaneous: every site measured
// independently with probability effective_p. Sequential: with probability
// effective_p one uniformly chosen site is measured.
StepResult step(const StateVector& psi, const Matrix& unitary, const SiteMeasurementConfig& site_measure,
                TrajectoryMode mode, Rng& rng);

struct TrajectoryConfig {
    Matrix hamiltonian;
    StateVector initial_state;
    double dt = 0.1;
    int steps = 100;
    SiteMeasurementConfig site_measure{};
    DecoherenceSpec decoherence{};
    TrajectoryMode mode = TrajectoryMode::simultaneous_kraus;
    std::uint64_t seed = 0;
    bool density_matrix_mode = false;
    bool record_states = false;  // pure mode only

    void validate() const;
};

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<double> survival;
    std::vector<double> entropy;  // half-chain, nats
    std::vector<double> purity;
    std::vector<std::vector<SiteOutcome>> outcomes;  // one entry per step
    std::vector<std::size_t> dephasing_events;       // pure mode: pointer-basis jumps per step
    std::vector<StateVector> states;                 // when record_states
};

// Deterministic given config (seed included). In pure mode the dephasing
// channel is unravelled as a pointer-basis projective jump with probability
// 1 - D(t+dt)/D(t) per step, which reproduces the channel on average.
TrajectoryRecord run_trajectory(const TrajectoryConfig& config);

// Survival of `initial` after k equally spaced projective measurements onto
// it over total time T: |<psi0|U(T/k)|psi0>|^(2k).
double zeno_survival(const Matrix& hamiltonian, const StateVector& initial, double total_time, int k);

struct FreezingPoint {
    double p = 0.0;
    double mean_survival = 0.0;
    double sem_survival = 0.0;
    double mean_entropy = 0.0;
    double sem_entropy = 0.0;
};

struct FreezingOptions {
    std::size_t seed_count = 100;
    double late_fraction = 0.25;  // trailing fraction of the time series averaged
    std::size_t jobs = 1;
};

// For each p (fixed_p rule), ensemble mean of late-time survival and
// half-chain entropy over seeds derive_seed(template.seed, i). Sorted by p.
std::vector<FreezingPoint> zeno_freezing_sweep(const TrajectoryConfig& templ, std::vector<double> p_values,
                                               const FreezingOptions& options = {});

struct QzeRatio {
    double value = 0.0;
    double oscillation = 0.0;  // mean detrended std inside windows
    double drift = 0.0;        // |S_end - S_start| / T
};

// Entropy-oscillation diagnostic: oscillation / (drift * window_duration + 1e-9).
// Throws if entropy.size() < 2 * window.
QzeRatio qze_decoherence_ratio(const std::vector<double>& entropy, double dt, std::size_t window);

struct EvolutionMeasures {
    double pairwise_avg = 0.0;
    double double_integral = 0.0;
};

// Uniformly sampled time series assumed (trapezoid weights).
EvolutionMeasures evolution_measures(const std::vector<StateVector>& states);

}  // namespace caslab
