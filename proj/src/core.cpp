#include "caslab/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

#include "caslab/random.hpp"

namespace caslab {

SubsystemLayout::SubsystemLayout(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw std::invalid_argument("SubsystemLayout: no sites");
    for (int d : dims_) {
        if (d < 2) throw std::invalid_argument("SubsystemLayout: site dimension must be >= 2");
    }
    strides_.assign(dims_.size(), 1);
    total_ = 1;
    for (std::size_t s = dims_.size(); s-- > 0;) {
        strides_[s] = total_;
        total_ *= static_cast<std::size_t>(dims_[s]);
    }
}

SubsystemLayout SubsystemLayout::qubits(int n) {
    if (n < 1) throw std::invalid_argument("SubsystemLayout: need at least one qubit");
    return SubsystemLayout(std::vector<int>(static_cast<std::size_t>(n), 2));
}

bool SubsystemLayout::all_qubits() const {
    return std::all_of(dims_.begin(), dims_.end(), [](int d) { return d == 2; });
}

SubsystemLayout SubsystemLayout::operator+(const SubsystemLayout& other) const {
    std::vector<int> joined = dims_;
    joined.insert(joined.end(), other.dims_.begin(), other.dims_.end());
    return SubsystemLayout(std::move(joined));
}

int SubsystemLayout::digit(std::size_t index, std::size_t site) const {
    return static_cast<int>((index / strides_[site]) % static_cast<std::size_t>(dims_[site]));
}

StateVector::StateVector(Vector amplitudes, SubsystemLayout layout)
    : amps_(std::move(amplitudes)), layout_(std::move(layout)) {
    if (static_cast<std::size_t>(amps_.size()) != layout_.total_dim()) {
        throw std::invalid_argument("StateVector: amplitude count does not match layout");
    }
    const double norm = amps_.norm();
    if (!(norm > 1e-300) || !std::isfinite(norm)) {
        throw std::invalid_argument("StateVector: cannot normalize a zero or non-finite vector");
    }
    amps_ /= norm;
}

StateVector StateVector::basis(SubsystemLayout layout, std::size_t index) {
    if (index >= layout.total_dim()) throw std::out_of_range("StateVector::basis: index out of range");
    Vector v = Vector::Zero(static_cast<Eigen::Index>(layout.total_dim()));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return StateVector(std::move(v), std::move(layout));
}

StateVector StateVector::product(SubsystemLayout layout, const std::vector<int>& digits) {
    if (digits.size() != layout.sites()) {
        throw std::invalid_argument("StateVector::product: one digit per site required");
    }
    std::size_t index = 0;
    for (std::size_t s = 0; s < digits.size(); ++s) {
        if (digits[s] < 0 || digits[s] >= layout.dim(s)) {
            throw std::out_of_range("StateVector::product: digit out of range");
        }
        index += static_cast<std::size_t>(digits[s]) * layout.stride(s);
    }
    return basis(std::move(layout), index);
}

DensityMatrix::DensityMatrix(Matrix matrix, SubsystemLayout layout)
    : m_(std::move(matrix)), layout_(std::move(layout)) {
    const auto n = static_cast<std::size_t>(m_.rows());
    if (m_.rows() != m_.cols() || n != layout_.total_dim()) {
        throw std::invalid_argument("DensityMatrix: shape does not match layout");
    }
    if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > kStateTol) {
        throw std::invalid_argument("DensityMatrix: not Hermitian");
    }
    if (std::abs(m_.trace() - cplx(1.0)) > kStateTol) {
        throw std::invalid_argument("DensityMatrix: trace is not 1");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kPsdTol) {
        throw std::invalid_argument("DensityMatrix: not positive semidefinite");
    }
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
    return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint(), psi.layout());
}

DensityMatrix DensityMatrix::maximally_mixed(SubsystemLayout layout) {
    const auto n = static_cast<Eigen::Index>(layout.total_dim());
    return DensityMatrix(Matrix::Identity(n, n) / static_cast<double>(n), std::move(layout));
}

DensityMatrix DensityMatrix::renormalized(Matrix matrix, SubsystemLayout layout) {
    Matrix h = 0.5 * (matrix + matrix.adjoint());
    const double tr = h.trace().real();
    if (!(tr > 0.0)) throw std::invalid_argument("DensityMatrix: non-positive trace");
    h /= tr;
    return DensityMatrix(std::move(h), std::move(layout));
}

double DensityMatrix::purity() const {
    // tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return m_.cwiseAbs2().sum();
}

StateVector tensor_product(const StateVector& a, const StateVector& b) {
    Vector v = Eigen::kroneckerProduct(a.amplitudes(), b.amplitudes()).eval();
    return StateVector(std::move(v), a.layout() + b.layout());
}

DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b) {
    Matrix m = Eigen::kroneckerProduct(a.matrix(), b.matrix()).eval();
    return DensityMatrix::renormalized(std::move(m), a.layout() + b.layout());
}

namespace {

struct SiteSplit {
    std::vector<std::size_t> kept;
    std::vector<std::size_t> traced;
};

SiteSplit split_sites(const SubsystemLayout& layout, const std::set<std::size_t>& keep) {
    if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
    SiteSplit split;
    for (std::size_t s : keep) {
        if (s >= layout.sites()) throw std::out_of_range("partial_trace: site index out of range");
        split.kept.push_back(s);
    }
    for (std::size_t s = 0; s < layout.sites(); ++s) {
        if (!keep.count(s)) split.traced.push_back(s);
    }
    return split;
}

// Flat index of the full space assembled from a kept-index and a traced-index,
// each being a mixed-radix number over their respective sites.
std::vector<std::size_t> embed_offsets(const SubsystemLayout& layout, const std::vector<std::size_t>& sites) {
    std::size_t count = 1;
    for (std::size_t s : sites) count *= static_cast<std::size_t>(layout.dim(s));
    std::vector<std::size_t> offsets(count, 0);
    for (std::size_t k = 0; k < count; ++k) {
        std::size_t rem = k;
        std::size_t off = 0;
        for (std::size_t j = sites.size(); j-- > 0;) {
            const auto d = static_cast<std::size_t>(layout.dim(sites[j]));
            off += (rem % d) * layout.stride(sites[j]);
            rem /= d;
        }
        offsets[k] = off;
    }
    return offsets;
}

SubsystemLayout sub_layout(const SubsystemLayout& layout, const std::vector<std::size_t>& sites) {
    std::vector<int> dims;
    for (std::size_t s : sites) dims.push_back(layout.dim(s));
    return SubsystemLayout(std::move(dims));
}

}  // namespace

DensityMatrix partial_trace(const DensityMatrix& rho, const std::set<std::size_t>& keep) {
    const auto& layout = rho.layout();
    const SiteSplit split = split_sites(layout, keep);
    const auto kept_off = embed_offsets(layout, split.kept);
    const std::vector<std::size_t> traced_off =
        split.traced.empty() ? std::vector<std::size_t>{0} : embed_offsets(layout, split.traced);

    const auto nk = static_cast<Eigen::Index>(kept_off.size());
    Matrix out = Matrix::Zero(nk, nk);
    const Matrix& m = rho.matrix();
    for (Eigen::Index i = 0; i < nk; ++i) {
        for (Eigen::Index j = 0; j < nk; ++j) {
            cplx acc = 0.0;
            for (std::size_t t : traced_off) {
                acc += m(static_cast<Eigen::Index>(kept_off[i] + t), static_cast<Eigen::Index>(kept_off[j] + t));
            }
            out(i, j) = acc;
        }
    }
    return DensityMatrix::renormalized(std::move(out), sub_layout(layout, split.kept));
}

DensityMatrix reduced_density(const StateVector& psi, const std::set<std::size_t>& keep) {
    const auto& layout = psi.layout();
    const SiteSplit split = split_sites(layout, keep);
    const auto kept_off = embed_offsets(layout, split.kept);
    const std::vector<std::size_t> traced_off =
        split.traced.empty() ? std::vector<std::size_t>{0} : embed_offsets(layout, split.traced);

    // Reshape into (kept x traced) and form M M^dagger.
    Matrix amp(static_cast<Eigen::Index>(kept_off.size()), static_cast<Eigen::Index>(traced_off.size()));
    for (std::size_t i = 0; i < kept_off.size(); ++i) {
        for (std::size_t t = 0; t < traced_off.size(); ++t) {
            amp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) =
                psi.amplitudes()(static_cast<Eigen::Index>(kept_off[i] + traced_off[t]));
        }
    }
    return DensityMatrix::renormalized(amp * amp.adjoint(), sub_layout(layout, split.kept));
}

double entanglement_entropy(const StateVector& psi, std::size_t cut) {
    const auto& layout = psi.layout();
    if (cut == 0 || cut >= layout.sites()) return 0.0;
    const auto cols = static_cast<Eigen::Index>(layout.stride(cut - 1));
    const auto rows = static_cast<Eigen::Index>(layout.total_dim()) / cols;
    // Site 0 is most significant, so the row-major reshape splits [0, cut) from [cut, L).
    Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
        psi.amplitudes().data(), rows, cols);
    const Matrix reshaped = m;
    Eigen::JacobiSVD<Matrix> svd(reshaped);
    RealVector p = svd.singularValues().array().square();
    return shannon_nats(p);
}

RealVector clamped_spectrum(const Matrix& hermitian) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseMax(0.0).cwiseMin(1.0);
}

double shannon_nats(const RealVector& probabilities) {
    double s = 0.0;
    for (double p : probabilities) {
        if (p > 0.0) s -= p * std::log(p);
    }
    // A weight rounded just above 1 would otherwise give -1e-16.
    return std::max(s, 0.0);
}

double von_neumann_entropy(const DensityMatrix& rho) {
    return shannon_nats(clamped_spectrum(rho.matrix()));
}

RelativeEntropy relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (!(rho.layout() == sigma.layout())) {
        throw std::invalid_argument("relative_entropy: layout mismatch");
    }
    constexpr double kSupportTol = 1e-12;
    Eigen::SelfAdjointEigenSolver<Matrix> es_rho(rho.matrix(), Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Matrix> es_sigma(sigma.matrix());

    double rho_log_rho = 0.0;
    for (double l : es_rho.eigenvalues()) {
        const double lc = std::clamp(l, 0.0, 1.0);
        if (lc > 0.0) rho_log_rho += lc * std::log(lc);
    }

    // tr(rho ln sigma) = sum_j ln(mu_j) <v_j|rho|v_j>
    const Matrix& v = es_sigma.eigenvectors();
    double rho_log_sigma = 0.0;
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
        const double weight = (v.col(j).adjoint() * rho.matrix() * v.col(j))(0, 0).real();
        const double mu = es_sigma.eigenvalues()(j);
        if (mu < kSupportTol) {
            if (weight > kSupportTol) {
                return {std::numeric_limits<double>::infinity(), true};
            }
            continue;
        }
        rho_log_sigma += weight * std::log(mu);
    }
    return {rho_log_rho - rho_log_sigma, false};
}

double overlap(const StateVector& a, const StateVector& b) {
    if (!(a.layout() == b.layout())) throw std::invalid_argument("overlap: layout mismatch");
    return std::min(1.0, std::norm(a.amplitudes().dot(b.amplitudes())));
}

Matrix random_unitary(std::size_t dim, unsigned long long seed) {
    Rng rng(seed);
    const auto n = static_cast<Eigen::Index>(dim);
    Matrix z(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) z(i, j) = cplx(standard_normal(rng), standard_normal(rng));
    }
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Fix column phases so the distribution is Haar.
    for (Eigen::Index i = 0; i < n; ++i) {
        const cplx d = r(i, i);
        const double a = std::abs(d);
        if (a > 0.0) q.col(i) *= d / a;
    }
    return q;
}

Matrix random_hermitian(std::size_t dim, unsigned long long seed) {
    Rng rng(seed);
    const auto n = static_cast<Eigen::Index>(dim);
    Matrix z(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) z(i, j) = cplx(standard_normal(rng), standard_normal(rng));
    }
    return 0.5 * (z + z.adjoint());
}

StateVector random_state(SubsystemLayout layout, unsigned long long seed) {
    Rng rng(seed);
    Vector v(static_cast<Eigen::Index>(layout.total_dim()));
    for (auto& a : v) a = cplx(standard_normal(rng), standard_normal(rng));
    return StateVector(std::move(v), std::move(layout));
}

DensityMatrix random_density(SubsystemLayout layout, std::size_t rank, unsigned long long seed) {
    Rng rng(seed);
    const auto n = static_cast<Eigen::Index>(layout.total_dim());
    Matrix g(n, static_cast<Eigen::Index>(std::max<std::size_t>(rank, 1)));
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
        for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = cplx(standard_normal(rng), standard_normal(rng));
    }
    return DensityMatrix::renormalized(g * g.adjoint(), std::move(layout));
}

}  // namespace caslab
