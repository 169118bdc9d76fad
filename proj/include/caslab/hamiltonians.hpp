// hamiltonians.hpp
// Spin-chain and NK spin-glass Hamiltonians, propagators, level-spacing
// statistics, and a spectrum-reality check for non-Hermitian matrices.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "caslab/core.hpp"

namespace caslab {

enum class ModelKind { ising_z, heisenberg_xyz, nk_spin_glass, custom };
enum class IsingVariant { z_only, xyz };
enum class Boundary { open, periodic };

std::string to_string(ModelKind kind);

struct HamiltonianParams {
    double coupling = 0.0;        // J
    int length = 0;               // L (or N for NK)
    std::optional<int> ruggedness;  // K
    std::optional<std::uint64_t> seed;
    double transverse_field = 0.0;  // h
    Boundary boundary = Boundary::open;
};

class SpinChainHamiltonian {
public:
    // Throws unless the matrix is Hermitian (1e-10) with dimension 2^L.
    SpinChainHamiltonian(Matrix matrix, ModelKind kind, HamiltonianParams params);

    const Matrix& matrix() const { return m_; }
    ModelKind kind() const { return kind_; }
    const HamiltonianParams& params() const { return params_; }
    SubsystemLayout layout() const { return SubsystemLayout::qubits(params_.length); }
    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }

private:
    Matrix m_;
    ModelKind kind_;
    HamiltonianParams params_;
};

// Wraps an arbitrary Hermitian qubit-register matrix as a custom model.
SpinChainHamiltonian custom_hamiltonian(Matrix matrix);

namespace pauli {
Matrix identity();
Matrix x();
Matrix y();
Matrix z();
}  // namespace pauli

// op acting on `site` of an L-qubit register (site 0 leftmost).
Matrix site_operator(int length, int site, const Matrix& op);

// J sum_i s_i s_{i+1} (+ h sum_i X_i). Throws unless 2 <= L <= 12.
SpinChainHamiltonian build_ising(int length, double coupling, IsingVariant variant,
                                 double transverse_field = 0.0, Boundary boundary = Boundary::open);

struct NkOptions {
    double transverse_field = 1.0;
    // Table values are uniform in [0, energy_scale). At 3 the disorder
    // competes with a unit field; near 1 the spectrum stays banded.
    double energy_scale = 3.0;
};

// Classical NK landscape on the sigma^z diagonal plus h sum_i X_i. Site i
// interacts with its K cyclic successors; each site contribution is a uniform
// [0,1) table over its 2^(K+1) local configurations drawn from `seed`.
SpinChainHamiltonian build_nk_spin_glass(int sites, int neighbors, std::uint64_t seed, NkOptions options = {});

// Cached eigendecomposition for repeated propagation at different times.
class Propagator {
public:
    explicit Propagator(const Matrix& hermitian);

    Matrix at(double t) const;  // exp(-i H t)
    Vector apply(const Vector& psi, double t) const;
    const RealVector& energies() const { return energies_; }
    const Matrix& eigenvectors() const { return vectors_; }

private:
    RealVector energies_;
    Matrix vectors_;
};

Matrix propagator(const SpinChainHamiltonian& h, double t);
Matrix propagator(const Matrix& hermitian, double t);

enum class SpectralRegime { ordered, critical, chaotic };
std::string to_string(SpectralRegime regime);

struct SpacingOptions {
    int unfolding_degree = 5;
    double ordered_below = 0.3;
    double chaotic_above = 0.7;
    // Fraction of levels dropped at each spectrum edge before unfolding.
    double edge_fraction = 0.1;
};

struct SpectralStats {
    std::vector<double> eigenvalues;  // sorted ascending, all levels
    std::vector<double> spacings;     // unfolded, mean 1, edges trimmed
    double brody_q = 0.0;
    SpectralRegime regime = SpectralRegime::ordered;
    bool fit_accepted = true;
    std::vector<std::string> warnings;
};

SpectralStats level_spacing_stats(const SpinChainHamiltonian& h, const SpacingOptions& options = {});
SpectralStats level_spacing_stats(std::vector<double> eigenvalues, const SpacingOptions& options = {});

// Brody density with unit mean: P(s) = c s^q exp(-a s^(q+1)).
double brody_a(double q);
double brody_density(double s, double q);
// Maximum-likelihood Brody parameter in [0, 1] for unit-mean spacings.
double fit_brody(const std::vector<double>& spacings);

enum class SyntheticEnsemble { poisson, wigner };
std::string to_string(SyntheticEnsemble ensemble);

// Reference spectrum of n levels starting at 0: cumulative sums of
// exponential (Poisson) or Wigner-surmise spacings with unit mean.
std::vector<double> synthetic_spectrum(SyntheticEnsemble ensemble, std::size_t n, std::uint64_t seed);

class NonHermitianHamiltonian {
public:
    // Any square matrix of dimension >= 2.
    explicit NonHermitianHamiltonian(Matrix matrix);
    const Matrix& matrix() const { return m_; }

private:
    Matrix m_;
};

struct PtSpectrum {
    bool all_real = true;
    double max_imag = 0.0;
    std::vector<cplx> eigenvalues;
};

PtSpectrum pt_spectrum_check(const NonHermitianHamiltonian& h, double tol = 1e-9);

// [[r e^{i theta}, s], [s, r e^{-i theta}]]
NonHermitianHamiltonian pt_symmetric_dimer(double r, double s, double theta);

}  // namespace caslab
