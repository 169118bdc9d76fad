#include "caslab/hamiltonians.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>

#include "caslab/random.hpp"

namespace caslab {

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::ising_z: return "ising_z";
        case ModelKind::heisenberg_xyz: return "heisenberg_xyz";
        case ModelKind::nk_spin_glass: return "nk_spin_glass";
        case ModelKind::custom: return "custom";
    }
    return "custom";
}

std::string to_string(SpectralRegime regime) {
    switch (regime) {
        case SpectralRegime::ordered: return "ordered";
        case SpectralRegime::critical: return "critical";
        case SpectralRegime::chaotic: return "chaotic";
    }
    return "ordered";
}

SpinChainHamiltonian::SpinChainHamiltonian(Matrix matrix, ModelKind kind, HamiltonianParams params)
    : m_(std::move(matrix)), kind_(kind), params_(std::move(params)) {
    if (params_.length < 1 || params_.length > 12) {
        throw std::invalid_argument("SpinChainHamiltonian: length must be in [1, 12]");
    }
    if (m_.rows() != m_.cols() || m_.rows() != (Eigen::Index{1} << params_.length)) {
        throw std::invalid_argument("SpinChainHamiltonian: dimension must be 2^L");
    }
    if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > kStateTol) {
        throw std::invalid_argument("SpinChainHamiltonian: matrix is not Hermitian");
    }
}

SpinChainHamiltonian custom_hamiltonian(Matrix matrix) {
    const auto n = matrix.rows();
    int length = 0;
    while ((Eigen::Index{1} << length) < n) ++length;
    HamiltonianParams params;
    params.length = length;
    return SpinChainHamiltonian(std::move(matrix), ModelKind::custom, params);
}

namespace pauli {
Matrix identity() { return Matrix::Identity(2, 2); }
Matrix x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}
Matrix y() {
    Matrix m(2, 2);
    m << 0, cplx(0, -1), cplx(0, 1), 0;
    return m;
}
Matrix z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}
}  // namespace pauli

Matrix site_operator(int length, int site, const Matrix& op) {
    if (site < 0 || site >= length) throw std::out_of_range("site_operator: site out of range");
    const auto d = op.rows();
    Matrix out = Matrix::Identity(1, 1);
    for (int s = 0; s < length; ++s) {
        const Matrix& factor = (s == site) ? op : Matrix(Matrix::Identity(d, d));
        out = Eigen::kroneckerProduct(out, factor).eval();
    }
    return out;
}

namespace {

void check_length(int length) {
    if (length < 2 || length > 12) throw std::invalid_argument("chain length must be in [2, 12]");
}

std::vector<std::pair<int, int>> bonds(int length, Boundary boundary) {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i + 1 < length; ++i) out.emplace_back(i, i + 1);
    if (boundary == Boundary::periodic && length > 2) out.emplace_back(length - 1, 0);
    return out;
}

void add_transverse_field(Matrix& h, int length, double field) {
    if (field == 0.0) return;
    for (int i = 0; i < length; ++i) h += field * site_operator(length, i, pauli::x());
}

}  // namespace

SpinChainHamiltonian build_ising(int length, double coupling, IsingVariant variant, double transverse_field,
                                 Boundary boundary) {
    check_length(length);
    const auto dim = Eigen::Index{1} << length;
    Matrix h = Matrix::Zero(dim, dim);
    std::vector<Matrix> paulis{pauli::z()};
    if (variant == IsingVariant::xyz) paulis = {pauli::x(), pauli::y(), pauli::z()};
    for (auto [i, j] : bonds(length, boundary)) {
        for (const Matrix& p : paulis) {
            h += coupling * site_operator(length, i, p) * site_operator(length, j, p);
        }
    }
    add_transverse_field(h, length, transverse_field);

    HamiltonianParams params;
    params.coupling = coupling;
    params.length = length;
    params.transverse_field = transverse_field;
    params.boundary = boundary;
    const ModelKind kind = variant == IsingVariant::z_only ? ModelKind::ising_z : ModelKind::heisenberg_xyz;
    return SpinChainHamiltonian(0.5 * (h + h.adjoint()), kind, params);
}

SpinChainHamiltonian build_nk_spin_glass(int sites, int neighbors, std::uint64_t seed, NkOptions options) {
    check_length(sites);
    if (neighbors < 0 || neighbors >= sites) {
        throw std::invalid_argument("build_nk_spin_glass: K must satisfy 0 <= K <= N-1");
    }
    Rng rng(seed);
    const std::size_t table_size = std::size_t{1} << (neighbors + 1);
    std::vector<std::vector<double>> tables(static_cast<std::size_t>(sites), std::vector<double>(table_size));
    for (auto& table : tables) {
        for (double& v : table) v = uniform01(rng);
    }

    const auto dim = Eigen::Index{1} << sites;
    Matrix h = Matrix::Zero(dim, dim);
    for (Eigen::Index state = 0; state < dim; ++state) {
        double energy = 0.0;
        for (int i = 0; i < sites; ++i) {
            std::size_t local = 0;
            for (int k = 0; k <= neighbors; ++k) {
                const int site = (i + k) % sites;
                const auto bit = static_cast<std::size_t>((state >> (sites - 1 - site)) & 1);
                local = (local << 1) | bit;
            }
            energy += tables[static_cast<std::size_t>(i)][local];
        }
        h(state, state) = options.energy_scale * energy;
    }
    add_transverse_field(h, sites, options.transverse_field);

    HamiltonianParams params;
    params.coupling = options.energy_scale;
    params.length = sites;
    params.ruggedness = neighbors;
    params.seed = seed;
    params.transverse_field = options.transverse_field;
    return SpinChainHamiltonian(std::move(h), ModelKind::nk_spin_glass, params);
}

Propagator::Propagator(const Matrix& hermitian) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian);
    if (es.info() != Eigen::Success) throw std::runtime_error("Propagator: eigendecomposition failed");
    energies_ = es.eigenvalues();
    vectors_ = es.eigenvectors();
}

Matrix Propagator::at(double t) const {
    Vector phases(energies_.size());
    for (Eigen::Index k = 0; k < energies_.size(); ++k) phases(k) = std::exp(cplx(0.0, -energies_(k) * t));
    return vectors_ * phases.asDiagonal() * vectors_.adjoint();
}

Vector Propagator::apply(const Vector& psi, double t) const {
    Vector coeffs = vectors_.adjoint() * psi;
    for (Eigen::Index k = 0; k < energies_.size(); ++k) coeffs(k) *= std::exp(cplx(0.0, -energies_(k) * t));
    return vectors_ * coeffs;
}

Matrix propagator(const SpinChainHamiltonian& h, double t) { return propagator(h.matrix(), t); }

Matrix propagator(const Matrix& hermitian, double t) {
    if (!std::isfinite(t)) throw std::invalid_argument("propagator: time must be finite");
    return Propagator(hermitian).at(t);
}

double brody_a(double q) { return std::pow(std::tgamma((q + 2.0) / (q + 1.0)), q + 1.0); }

double brody_density(double s, double q) {
    const double a = brody_a(q);
    return (q + 1.0) * a * std::pow(s, q) * std::exp(-a * std::pow(s, q + 1.0));
}

namespace {

double brody_log_likelihood(const std::vector<double>& spacings, double q) {
    const double a = brody_a(q);
    double ll = 0.0;
    for (double s : spacings) {
        const double se = std::max(s, 1e-12);
        ll += std::log(q + 1.0) + std::log(a) + q * std::log(se) - a * std::pow(se, q + 1.0);
    }
    return ll;
}

// Least-squares polynomial in x (already scaled to [-1, 1]); returns coefficients.
Eigen::VectorXd polyfit(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int degree) {
    Eigen::MatrixXd v(x.size(), degree + 1);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double p = 1.0;
        for (int k = 0; k <= degree; ++k) {
            v(i, k) = p;
            p *= x(i);
        }
    }
    return v.colPivHouseholderQr().solve(y);
}

double polyval(const Eigen::VectorXd& c, double x) {
    double acc = 0.0;
    for (Eigen::Index k = c.size(); k-- > 0;) acc = acc * x + c(k);
    return acc;
}

}  // namespace

double fit_brody(const std::vector<double>& spacings) {
    if (spacings.empty()) throw std::invalid_argument("fit_brody: no spacings");
    // Coarse scan, then golden-section refinement around the best bracket.
    constexpr int kScan = 100;
    int best = 0;
    double best_ll = -INFINITY;
    for (int i = 0; i <= kScan; ++i) {
        const double ll = brody_log_likelihood(spacings, static_cast<double>(i) / kScan);
        if (ll > best_ll) {
            best_ll = ll;
            best = i;
        }
    }
    double lo = std::max(0, best - 1) / static_cast<double>(kScan);
    double hi = std::min(kScan, best + 1) / static_cast<double>(kScan);
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - phi * (hi - lo);
    double d = lo + phi * (hi - lo);
    double fc = brody_log_likelihood(spacings, c);
    double fd = brody_log_likelihood(spacings, d);
    for (int it = 0; it < 60; ++it) {
        if (fc > fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = brody_log_likelihood(spacings, c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = brody_log_likelihood(spacings, d);
        }
    }
    double q = 0.5 * (lo + hi);
    // Endpoints are not reachable by the interior search.
    if (brody_log_likelihood(spacings, 0.0) >= brody_log_likelihood(spacings, q)) q = 0.0;
    if (brody_log_likelihood(spacings, 1.0) >= brody_log_likelihood(spacings, q)) q = 1.0;
    return std::clamp(q, 0.0, 1.0);
}

SpectralStats level_spacing_stats(const SpinChainHamiltonian& h, const SpacingOptions& options) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix(), Eigen::EigenvaluesOnly);
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    return level_spacing_stats(std::move(ev), options);
}

SpectralStats level_spacing_stats(std::vector<double> eigenvalues, const SpacingOptions& options) {
    if (eigenvalues.size() < 3) throw std::invalid_argument("level_spacing_stats: need at least 3 levels");
    std::sort(eigenvalues.begin(), eigenvalues.end());
    SpectralStats stats;
    if (eigenvalues.size() < 32) {
        stats.warnings.push_back("fewer than 32 levels; spacing statistics are not meaningful");
    }
    const double lo = eigenvalues.front();
    const double hi = eigenvalues.back();
    const double width = hi - lo;
    const double scale = std::max(std::abs(lo), std::abs(hi));
    if (!(width > 1e-12 * std::max(scale, 1.0))) {
        throw std::invalid_argument("level_spacing_stats: degenerate spectrum (all gaps zero)");
    }

    if (options.edge_fraction < 0.0 || options.edge_fraction >= 0.5) {
        throw std::invalid_argument("level_spacing_stats: edge_fraction must be in [0, 0.5)");
    }
    auto trim = static_cast<std::size_t>(options.edge_fraction * static_cast<double>(eigenvalues.size()));
    if (eigenvalues.size() < 2 * trim + 3) trim = 0;
    const double* level = eigenvalues.data() + trim;
    const auto n = static_cast<Eigen::Index>(eigenvalues.size() - 2 * trim);
    const double first = level[0];
    const double span = level[n - 1] - first;
    if (!(span > 0.0)) throw std::invalid_argument("level_spacing_stats: degenerate spectrum (all gaps zero)");
    Eigen::VectorXd x(n), staircase(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i) = 2.0 * (level[i] - first) / span - 1.0;
        staircase(i) = static_cast<double>(i);
    }
    const int degree = std::min<int>(options.unfolding_degree, static_cast<int>(n) - 2);
    const Eigen::VectorXd coeffs = polyfit(x, staircase, std::max(degree, 1));

    std::vector<double> spacings;
    spacings.reserve(static_cast<std::size_t>(n - 1));
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        spacings.push_back(std::max(0.0, polyval(coeffs, x(i + 1)) - polyval(coeffs, x(i))));
    }
    const double mean = std::accumulate(spacings.begin(), spacings.end(), 0.0) / static_cast<double>(spacings.size());
    if (!(mean > 0.0)) throw std::invalid_argument("level_spacing_stats: unfolding produced no positive spacings");
    for (double& s : spacings) s /= mean;

    double var = 0.0;
    for (double s : spacings) var += (s - 1.0) * (s - 1.0);
    var /= static_cast<double>(spacings.size());

    stats.eigenvalues = std::move(eigenvalues);
    stats.spacings = std::move(spacings);
    stats.brody_q = fit_brody(stats.spacings);
    if (var < 1e-6) {
        stats.fit_accepted = false;
        stats.warnings.push_back("degenerate spacing statistics (picket fence); Brody fit rejected");
    }
    if (stats.brody_q < options.ordered_below) {
        stats.regime = SpectralRegime::ordered;
    } else if (stats.brody_q > options.chaotic_above) {
        stats.regime = SpectralRegime::chaotic;
    } else {
        stats.regime = SpectralRegime::critical;
    }
    return stats;
}

std::string to_string(SyntheticEnsemble ensemble) {
    return ensemble == SyntheticEnsemble::poisson ? "poisson" : "wigner";
}

std::vector<double> synthetic_spectrum(SyntheticEnsemble ensemble, std::size_t n, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("synthetic_spectrum: at least two levels required");
    Rng rng(seed);
    std::vector<double> e{0.0};
    e.reserve(n);
    for (std::size_t i = 1; i < n; ++i) {
        double s = 0.0;
        if (ensemble == SyntheticEnsemble::poisson) {
            s = exponential(rng, 1.0);
        } else {
            // Inverse of the surmise CDF 1 - exp(-pi s^2 / 4).
            s = std::sqrt(-4.0 * std::log1p(-uniform01(rng)) / M_PI);
        }
        e.push_back(e.back() + s);
    }
    return e;
}

NonHermitianHamiltonian::NonHermitianHamiltonian(Matrix matrix) : m_(std::move(matrix)) {
    if (m_.rows() != m_.cols() || m_.rows() < 2) {
        throw std::invalid_argument("NonHermitianHamiltonian: need a square matrix of dimension >= 2");
    }
}

PtSpectrum pt_spectrum_check(const NonHermitianHamiltonian& h, double tol) {
    Eigen::ComplexEigenSolver<Matrix> es(h.matrix(), false);
    PtSpectrum out;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const cplx l = es.eigenvalues()(i);
        out.eigenvalues.push_back(l);
        out.max_imag = std::max(out.max_imag, std::abs(l.imag()));
    }
    out.all_real = out.max_imag < tol;
    return out;
}

NonHermitianHamiltonian pt_symmetric_dimer(double r, double s, double theta) {
    Matrix m(2, 2);
    m << r * std::exp(cplx(0.0, theta)), s, s, r * std::exp(cplx(0.0, -theta));
    return NonHermitianHamiltonian(std::move(m));
}

}  // namespace caslab
