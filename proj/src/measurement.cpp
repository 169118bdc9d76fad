#include "caslab/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <unsupported/Eigen/FFT>
#include <unsupported/Eigen/KroneckerProduct>

namespace caslab {

namespace {

constexpr double kNegligibleProbability = 1e-14;

void check_square_same(const std::vector<Matrix>& ops, const char* what) {
    if (ops.empty()) throw std::invalid_argument(std::string(what) + ": empty operator set");
    const auto n = ops.front().rows();
    for (const auto& m : ops) {
        if (m.rows() != n || m.cols() != n) {
            throw std::invalid_argument(std::string(what) + ": operators must be square and equally sized");
        }
    }
}

Matrix default_basis() { return Matrix::Identity(2, 2); }

}  // namespace

KrausSet::KrausSet(std::vector<Matrix> operators, std::vector<std::string> labels)
    : ops_(std::move(operators)), labels_(std::move(labels)) {
    check_square_same(ops_, "KrausSet");
    const auto n = ops_.front().rows();
    Matrix sum = Matrix::Zero(n, n);
    for (const auto& m : ops_) sum += m.adjoint() * m;
    if ((sum - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() > kStateTol) {
        throw std::invalid_argument("KrausSet: completeness sum M^dagger M = I violated");
    }
    if (labels_.empty()) {
        for (std::size_t i = 0; i < ops_.size(); ++i) labels_.push_back(std::to_string(i));
    }
    if (labels_.size() != ops_.size()) throw std::invalid_argument("KrausSet: one label per operator required");
}

KrausSet KrausSet::projective(const Matrix& basis) {
    if (basis.rows() != basis.cols()) throw std::invalid_argument("KrausSet::projective: basis must be square");
    std::vector<Matrix> ops;
    for (Eigen::Index k = 0; k < basis.cols(); ++k) ops.push_back(basis.col(k) * basis.col(k).adjoint());
    return KrausSet(std::move(ops));
}

KrausSet KrausSet::computational(std::size_t dim) {
    const auto n = static_cast<Eigen::Index>(dim);
    return projective(Matrix::Identity(n, n));
}

KrausSet KrausSet::identity(std::size_t dim) {
    const auto n = static_cast<Eigen::Index>(dim);
    return KrausSet({Matrix::Identity(n, n)}, {"none"});
}

std::size_t KrausSet::index_of(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) throw std::out_of_range("KrausSet: unknown outcome label '" + label + "'");
    return static_cast<std::size_t>(it - labels_.begin());
}

PovmSet::PovmSet(std::vector<Matrix> effects) : effects_(std::move(effects)) {
    check_square_same(effects_, "PovmSet");
    const auto n = effects_.front().rows();
    Matrix sum = Matrix::Zero(n, n);
    for (const auto& e : effects_) {
        if ((e - e.adjoint()).cwiseAbs().maxCoeff() > kStateTol) throw std::invalid_argument("PovmSet: effect not Hermitian");
        Eigen::SelfAdjointEigenSolver<Matrix> es(e, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -kPsdTol) throw std::invalid_argument("PovmSet: effect not PSD");
        sum += e;
    }
    if ((sum - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() > kStateTol) {
        throw std::invalid_argument("PovmSet: effects do not sum to identity");
    }
}

PovmSet PovmSet::from_kraus(const KrausSet& kraus) {
    std::vector<Matrix> effects;
    for (const auto& m : kraus.operators()) effects.push_back(m.adjoint() * m);
    return PovmSet(std::move(effects));
}

double born_probability(const StateVector& psi, const KrausSet& kraus, std::size_t outcome) {
    if (psi.dim() != kraus.dim()) throw std::invalid_argument("born_probability: dimension mismatch");
    if (outcome >= kraus.size()) throw std::out_of_range("born_probability: unknown outcome");
    return std::clamp((kraus.operators()[outcome] * psi.amplitudes()).squaredNorm(), 0.0, 1.0);
}

double born_probability(const StateVector& psi, const KrausSet& kraus, const std::string& label) {
    return born_probability(psi, kraus, kraus.index_of(label));
}

double born_probability(const StateVector& psi, const PovmSet& povm, std::size_t outcome) {
    if (outcome >= povm.effects().size()) throw std::out_of_range("born_probability: unknown outcome");
    const auto& v = psi.amplitudes();
    return std::clamp(v.dot(povm.effects()[outcome] * v).real(), 0.0, 1.0);
}

MeasurementResult apply_measurement(const StateVector& psi, const KrausSet& kraus, Rng& rng) {
    if (psi.dim() != kraus.dim()) throw std::invalid_argument("apply_measurement: dimension mismatch");
    std::vector<Vector> branches;
    std::vector<double> probs;
    double total = 0.0;
    for (const auto& m : kraus.operators()) {
        branches.push_back(m * psi.amplitudes());
        probs.push_back(branches.back().squaredNorm());
        total += probs.back();
    }
    if (std::all_of(probs.begin(), probs.end(), [](double p) { return p < kNegligibleProbability; })) {
        throw std::runtime_error("apply_measurement: all outcome probabilities vanish (inconsistent Kraus set)");
    }
    const double u = uniform01(rng) * total;
    double acc = 0.0;
    std::size_t chosen = probs.size() - 1;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc && probs[i] > 0.0) {
            chosen = i;
            break;
        }
    }
    while (probs[chosen] <= 0.0 && chosen > 0) --chosen;
    return {chosen, StateVector(std::move(branches[chosen]), psi.layout())};
}

DensityUpdate density_update(const DensityMatrix& rho, const KrausSet& kraus, std::size_t outcome) {
    if (rho.dim() != kraus.dim()) throw std::invalid_argument("density_update: dimension mismatch");
    if (outcome >= kraus.size()) throw std::out_of_range("density_update: unknown outcome");
    const Matrix& m = kraus.operators()[outcome];
    Matrix updated = m * rho.matrix() * m.adjoint();
    DensityUpdate out;
    out.probability = std::max(0.0, updated.trace().real());
    if (out.probability < kNegligibleProbability) {
        out.flagged = true;
        return out;
    }
    out.state = DensityMatrix::renormalized(std::move(updated), rho.layout());
    return out;
}

void SiteMeasurementConfig::validate() const {
    if (!(p_site >= 0.0 && p_site <= 1.0)) throw std::invalid_argument("SiteMeasurementConfig: p_site outside [0,1]");
    if (coupling_rule == CouplingRule::proportional_to_n && !(rate_constant >= 0.0)) {
        throw std::invalid_argument("SiteMeasurementConfig: rate constant must be >= 0");
    }
    if (basis.size() != 0) {
        if (basis.rows() != 2 || basis.cols() != 2) throw std::invalid_argument("SiteMeasurementConfig: basis must be 2x2");
        if ((basis.adjoint() * basis - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() > kStateTol) {
            throw std::invalid_argument("SiteMeasurementConfig: basis is not orthonormal");
        }
    }
}

double SiteMeasurementConfig::effective_p(std::size_t n_sites) const {
    if (coupling_rule == CouplingRule::proportional_to_n) {
        return std::min(1.0, rate_constant * static_cast<double>(n_sites));
    }
    return p_site;
}

Matrix SiteMeasurementConfig::site_basis() const { return basis.size() == 0 ? default_basis() : basis; }

SiteKraus build_site_kraus(const SubsystemLayout& layout, const SiteMeasurementConfig& config, Rng& rng) {
    if (!layout.all_qubits()) throw std::invalid_argument("build_site_kraus: qubit sites required");
    config.validate();
    const double p = config.effective_p(layout.sites());
    const Matrix basis = config.site_basis();

    std::vector<std::size_t> measured;
    for (std::size_t s = 0; s < layout.sites(); ++s) {
        if (uniform01(rng) < p) measured.push_back(s);
    }
    if (measured.empty()) return {KrausSet::identity(layout.total_dim()), {}};

    const std::size_t combos = std::size_t{1} << measured.size();
    std::vector<Matrix> ops;
    std::vector<std::string> labels;
    ops.reserve(combos);
    for (std::size_t combo = 0; combo < combos; ++combo) {
        Matrix op = Matrix::Identity(1, 1);
        std::string label;
        std::size_t next = 0;
        for (std::size_t s = 0; s < layout.sites(); ++s) {
            Matrix factor = Matrix::Identity(2, 2);
            if (next < measured.size() && measured[next] == s) {
                const auto r = static_cast<Eigen::Index>((combo >> (measured.size() - 1 - next)) & 1);
                factor = basis.col(r) * basis.col(r).adjoint();
                if (!label.empty()) label += ",";
                label += "s" + std::to_string(s) + "=" + std::to_string(r);
                ++next;
            }
            op = Eigen::kroneckerProduct(op, factor).eval();
        }
        ops.push_back(std::move(op));
        labels.push_back(std::move(label));
    }
    return {KrausSet(std::move(ops), std::move(labels)), std::move(measured)};
}

SiteOutcome measure_site(Vector& amplitudes, const SubsystemLayout& layout, std::size_t site, const Matrix& basis,
                         Rng& rng) {
    if (site >= layout.sites() || layout.dim(site) != 2) throw std::out_of_range("measure_site: not a qubit site");
    const std::size_t stride = layout.stride(site);
    const std::size_t total = layout.total_dim();

    auto component = [&](std::size_t i0, int r) {
        const auto rr = static_cast<Eigen::Index>(r);
        return std::conj(basis(0, rr)) * amplitudes(static_cast<Eigen::Index>(i0)) +
               std::conj(basis(1, rr)) * amplitudes(static_cast<Eigen::Index>(i0 + stride));
    };

    double p0 = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
        if ((i / stride) % 2 == 0) p0 += std::norm(component(i, 0));
    }
    const int result = uniform01(rng) < p0 ? 0 : 1;
    const auto rr = static_cast<Eigen::Index>(result);
    for (std::size_t i = 0; i < total; ++i) {
        if ((i / stride) % 2 != 0) continue;
        const cplx c = component(i, result);
        amplitudes(static_cast<Eigen::Index>(i)) = basis(0, rr) * c;
        amplitudes(static_cast<Eigen::Index>(i + stride)) = basis(1, rr) * c;
    }
    const double norm = amplitudes.norm();
    if (!(norm > 0.0)) throw std::runtime_error("measure_site: zero-probability branch selected");
    amplitudes /= norm;
    return {site, result};
}

void WeakMeasurementSetup::validate() const {
    if (observable.rows() == 0 || observable.rows() != observable.cols()) {
        throw std::invalid_argument("WeakMeasurementSetup: observable must be square");
    }
    if ((observable - observable.adjoint()).cwiseAbs().maxCoeff() > kStateTol) {
        throw std::invalid_argument("WeakMeasurementSetup: observable is not Hermitian");
    }
    if (!(pointer_sigma > 0.0)) throw std::invalid_argument("WeakMeasurementSetup: pointer sigma must be > 0");
    if (!std::isfinite(coupling)) throw std::invalid_argument("WeakMeasurementSetup: coupling must be finite");
    if (grid.points < 16 || grid.points % 2 != 0) {
        throw std::invalid_argument("WeakMeasurementSetup: grid needs an even number (>= 16) of points");
    }
}

namespace {

struct PointerBranches {
    std::vector<double> x;
    double dx = 0.0;
    RealVector eigenvalues;
    Matrix eigenvectors;
    std::vector<std::vector<cplx>> shifted;  // one pointer wavefunction per eigenvalue
};

PointerBranches pointer_branches(const WeakMeasurementSetup& setup) {
    setup.validate();
    const std::size_t n = setup.grid.points;
    const double half = setup.grid.extent_sigmas * setup.pointer_sigma;
    const double dx = 2.0 * half / static_cast<double>(n);
    if (setup.pointer_sigma < 4.0 * dx) {
        throw std::invalid_argument("weak_measure: grid too coarse (pointer sigma under 4 grid steps)");
    }

    PointerBranches out;
    out.dx = dx;
    Eigen::SelfAdjointEigenSolver<Matrix> es(setup.observable);
    out.eigenvalues = es.eigenvalues();
    out.eigenvectors = es.eigenvectors();
    const double max_shift = std::abs(setup.coupling) * out.eigenvalues.cwiseAbs().maxCoeff();
    if (max_shift > half - 6.0 * setup.pointer_sigma) {
        throw std::invalid_argument("weak_measure: pointer shift leaves the grid; widen extent_sigmas");
    }

    const double sigma = setup.pointer_sigma;
    const double norm = std::pow(2.0 * M_PI * sigma * sigma, -0.25);
    std::vector<cplx> pointer(n);
    out.x.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        out.x[j] = -half + static_cast<double>(j) * dx;
        pointer[j] = norm * std::exp(-out.x[j] * out.x[j] / (4.0 * sigma * sigma));
    }

    // exp(-i g a P) translates the pointer by g a; applied in momentum space.
    Eigen::FFT<double> fft;
    std::vector<cplx> spectrum;
    fft.fwd(spectrum, pointer);
    for (Eigen::Index k = 0; k < out.eigenvalues.size(); ++k) {
        const double shift = setup.coupling * out.eigenvalues(k);
        std::vector<cplx> moved(n);
        for (std::size_t m = 0; m < n; ++m) {
            const double freq = m < n / 2 ? static_cast<double>(m) : static_cast<double>(m) - static_cast<double>(n);
            const double p = 2.0 * M_PI * freq / (static_cast<double>(n) * dx);
            moved[m] = spectrum[m] * std::exp(cplx(0.0, -p * shift));
        }
        std::vector<cplx> back;
        fft.inv(back, moved);
        out.shifted.push_back(std::move(back));
    }
    return out;
}

PointerDistribution finish(std::vector<double> x, std::vector<double> density, double dx) {
    PointerDistribution out;
    double total = 0.0;
    for (double& d : density) {
        d *= dx;
        total += d;
    }
    out.postselection_probability = total;
    double mean = 0.0;
    if (total > 0.0) {
        for (std::size_t j = 0; j < density.size(); ++j) {
            density[j] /= total;
            mean += x[j] * density[j];
        }
    }
    out.x = std::move(x);
    out.probability = std::move(density);
    out.mean_shift = mean;
    return out;
}

}  // namespace

PointerDistribution weak_measure(const StateVector& psi, const WeakMeasurementSetup& setup) {
    if (static_cast<std::size_t>(setup.observable.rows()) != psi.dim()) {
        throw std::invalid_argument("weak_measure: observable dimension mismatch");
    }
    PointerBranches b = pointer_branches(setup);
    const Vector weights = b.eigenvectors.adjoint() * psi.amplitudes();
    std::vector<double> density(b.x.size(), 0.0);
    for (Eigen::Index k = 0; k < weights.size(); ++k) {
        const double w = std::norm(weights(k));
        if (w == 0.0) continue;
        for (std::size_t j = 0; j < density.size(); ++j) density[j] += w * std::norm(b.shifted[static_cast<std::size_t>(k)][j]);
    }
    auto out = finish(std::move(b.x), std::move(density), b.dx);
    out.postselection_probability = 1.0;
    return out;
}

PointerDistribution weak_measure_postselected(const PrePostSelection& sel, const WeakMeasurementSetup& setup) {
    if (static_cast<std::size_t>(setup.observable.rows()) != sel.initial.dim() || sel.initial.dim() != sel.final.dim()) {
        throw std::invalid_argument("weak_measure_postselected: dimension mismatch");
    }
    PointerBranches b = pointer_branches(setup);
    const Vector in = b.eigenvectors.adjoint() * sel.initial.amplitudes();
    const Vector fin = b.eigenvectors.adjoint() * sel.final.amplitudes();
    std::vector<cplx> pointer(b.x.size(), 0.0);
    for (Eigen::Index k = 0; k < in.size(); ++k) {
        const cplx w = std::conj(fin(k)) * in(k);
        if (w == cplx(0.0)) continue;
        for (std::size_t j = 0; j < pointer.size(); ++j) pointer[j] += w * b.shifted[static_cast<std::size_t>(k)][j];
    }
    std::vector<double> density(pointer.size());
    for (std::size_t j = 0; j < pointer.size(); ++j) density[j] = std::norm(pointer[j]);
    return finish(std::move(b.x), std::move(density), b.dx);
}

WeakValue weak_value(const PrePostSelection& sel, const Matrix& observable) {
    if (static_cast<std::size_t>(observable.rows()) != sel.initial.dim() || sel.initial.dim() != sel.final.dim()) {
        throw std::invalid_argument("weak_value: dimension mismatch");
    }
    const cplx denom = sel.final.amplitudes().dot(sel.initial.amplitudes());
    const cplx numer = sel.final.amplitudes().dot(observable * sel.initial.amplitudes());
    WeakValue out;
    if (std::abs(denom) <= 1e-12) {
        out.divergent = true;
        out.magnitude_estimate = std::abs(numer) / std::max(std::abs(denom), std::numeric_limits<double>::min());
        return out;
    }
    out.value = numer / denom;
    out.magnitude_estimate = std::abs(out.value);
    return out;
}

double postselection_probability(const PrePostSelection& sel, const WeakMeasurementSetup& setup, bool first_order) {
    if (first_order) return overlap(sel.initial, sel.final);
    return weak_measure_postselected(sel, setup).postselection_probability;
}

bool weakness_check(const WeakMeasurementSetup& setup) {
    if ((setup.observable - setup.observable.adjoint()).cwiseAbs().maxCoeff() > kStateTol) {
        throw std::invalid_argument("weakness_check: observable is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(setup.observable, Eigen::EigenvaluesOnly);
    const double spread = es.eigenvalues().maxCoeff() - es.eigenvalues().minCoeff();
    return setup.pointer_sigma > std::abs(setup.coupling) * spread;
}

WeaknessDecomposition decompose_weakness(const Matrix& op, double tol) {
    if (op.rows() == 0 || op.rows() != op.cols()) throw std::invalid_argument("decompose_weakness: square matrix required");
    if (op.cwiseAbs().maxCoeff() == 0.0) throw std::invalid_argument("decompose_weakness: zero operator");
    const auto n = op.rows();
    WeaknessDecomposition out;
    out.q = op.trace() / static_cast<double>(n);
    const bool real_q = std::abs(out.q.imag()) <= 1e-12 * std::max(1.0, std::abs(out.q));
    if (std::abs(out.q) <= 1e-300 || (real_q && out.q.real() <= 0.0)) {
        throw std::domain_error("decompose_weakness: q <= 0, not of the form q(I + eps)");
    }
    const Matrix eps = op / out.q - Matrix::Identity(n, n);
    Eigen::JacobiSVD<Matrix> svd(eps);
    out.eps_norm = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    out.is_weak = real_q && out.q.real() <= 1.0 && out.eps_norm < tol;
    return out;
}

}  // namespace caslab
