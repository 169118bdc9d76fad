// core.hpp
// Finite-dimensional quantum states on composite spaces, plus the entropy and
// overlap primitives the rest of the library builds on.
//
// Site ordering: site 0 is the most significant (leftmost) tensor factor, so
// basis index i = sum_s digit_s * stride_s with stride of the last site = 1.

#pragma once

#include <complex>
#include <cstddef>
#include <set>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace caslab {

using cplx = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kStateTol = 1e-10;
inline constexpr double kPsdTol = 1e-8;

class SubsystemLayout {
public:
    explicit SubsystemLayout(std::vector<int> dims);

    static SubsystemLayout qubits(int n);

    std::size_t sites() const { return dims_.size(); }
    int dim(std::size_t site) const { return dims_.at(site); }
    const std::vector<int>& dims() const { return dims_; }
    std::size_t total_dim() const { return total_; }
    bool all_qubits() const;

    // Concatenation, used by tensor products.
    SubsystemLayout operator+(const SubsystemLayout& other) const;
    bool operator==(const SubsystemLayout& other) const { return dims_ == other.dims_; }

    // Multi-index digit of `site` inside flat basis index.
    int digit(std::size_t index, std::size_t site) const;
    std::size_t stride(std::size_t site) const { return strides_.at(site); }

private:
    std::vector<int> dims_;
    std::vector<std::size_t> strides_;
    std::size_t total_ = 1;
};

class StateVector {
public:
    // Normalizes the amplitudes; throws on zero norm or size mismatch.
    StateVector(Vector amplitudes, SubsystemLayout layout);

    static StateVector basis(SubsystemLayout layout, std::size_t index);
    // Product of per-site computational basis digits, e.g. {0,1,0,1}.
    static StateVector product(SubsystemLayout layout, const std::vector<int>& digits);

    const Vector& amplitudes() const { return amps_; }
    const SubsystemLayout& layout() const { return layout_; }
    std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }

private:
    Vector amps_;
    SubsystemLayout layout_;
};

class DensityMatrix {
public:
    // Validates Hermiticity, unit trace and PSD (min eigenvalue >= -1e-8).
    DensityMatrix(Matrix matrix, SubsystemLayout layout);

    static DensityMatrix pure(const StateVector& psi);
    static DensityMatrix maximally_mixed(SubsystemLayout layout);
    // Hermitizes and rescales to unit trace before validating. For matrices
    // produced by numerically lossy chains (channel updates, products of
    // propagators).
    static DensityMatrix renormalized(Matrix matrix, SubsystemLayout layout);

    const Matrix& matrix() const { return m_; }
    const SubsystemLayout& layout() const { return layout_; }
    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    double purity() const;

private:
    Matrix m_;
    SubsystemLayout layout_;
};

StateVector tensor_product(const StateVector& a, const StateVector& b);
DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b);

// Reduced state on the kept sites (returned in ascending site order).
DensityMatrix partial_trace(const DensityMatrix& rho, const std::set<std::size_t>& keep);
DensityMatrix reduced_density(const StateVector& psi, const std::set<std::size_t>& keep);

// Entropy of the first `cut` sites of a pure state, via Schmidt values.
double entanglement_entropy(const StateVector& psi, std::size_t cut);

// Eigenvalues of a Hermitian matrix clamped into [0, 1].
RealVector clamped_spectrum(const Matrix& hermitian);
double shannon_nats(const RealVector& probabilities);

double von_neumann_entropy(const DensityMatrix& rho);

struct RelativeEntropy {
    double value = 0.0;  // +inf when divergent
    bool divergent = false;
};

RelativeEntropy relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma);

double overlap(const StateVector& a, const StateVector& b);

// Haar-ish random test objects, seeded.
Matrix random_unitary(std::size_t dim, unsigned long long seed);
Matrix random_hermitian(std::size_t dim, unsigned long long seed);
StateVector random_state(SubsystemLayout layout, unsigned long long seed);
DensityMatrix random_density(SubsystemLayout layout, std::size_t rank, unsigned long long seed);

}  // namespace caslab
