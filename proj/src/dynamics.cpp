#include "caslab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "caslab/hamiltonians.hpp"
#include "caslab/parallel.hpp"

namespace caslab {

std::string to_string(TrajectoryMode mode) {
    return mode == TrajectoryMode::simultaneous_kraus ? "simultaneous_kraus" : "sequential_single_site";
}

std::string to_string(DecoherenceKind kind) {
    switch (kind) {
        case DecoherenceKind::none: return "none";
        case DecoherenceKind::exponential: return "exponential";
        case DecoherenceKind::power_law: return "power_law";
    }
    return "none";
}

void DecoherenceSpec::validate() const {
    if (!(rate >= 0.0) || !std::isfinite(rate)) throw std::invalid_argument("DecoherenceSpec: rate must be >= 0");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("DecoherenceSpec: scale must be > 0");
    if (!(exponent > 0.0) || !std::isfinite(exponent)) throw std::invalid_argument("DecoherenceSpec: exponent must be > 0");
    if (pointer_basis.size() != 0) {
        const auto n = pointer_basis.rows();
        if (pointer_basis.cols() != n ||
            (pointer_basis.adjoint() * pointer_basis - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-9) {
            throw std::invalid_argument("DecoherenceSpec: pointer basis must be unitary");
        }
    }
}

double DecoherenceSpec::factor(double t) const {
    switch (kind) {
        case DecoherenceKind::none: return 1.0;
        case DecoherenceKind::exponential: return std::exp(-rate * t);
        case DecoherenceKind::power_law: return std::pow(1.0 + t / scale, -exponent);
    }
    return 1.0;
}

DensityMatrix apply_dephasing(const DensityMatrix& rho, const Matrix& pointer_basis, double factor) {
    factor = std::clamp(factor, 0.0, 1.0);
    if (factor == 1.0) return rho;
    const bool computational = pointer_basis.size() == 0;
    if (!computational && static_cast<std::size_t>(pointer_basis.rows()) != rho.dim()) {
        throw std::invalid_argument("apply_dephasing: pointer basis dimension mismatch");
    }
    Matrix m = computational ? rho.matrix() : Matrix(pointer_basis.adjoint() * rho.matrix() * pointer_basis);
    const Eigen::VectorXcd diag = m.diagonal();
    m *= factor;
    m.diagonal() = diag;
    if (!computational) m = pointer_basis * m * pointer_basis.adjoint();
    return DensityMatrix::renormalized(std::move(m), rho.layout());
}

DensityMatrix apply_decoherence(const DensityMatrix& rho, const DecoherenceSpec& spec, double t_elapsed) {
    spec.validate();
    return apply_dephasing(rho, spec.pointer_basis, spec.factor(t_elapsed));
}

DensityMatrix evolve_von_neumann(const DensityMatrix& rho, const Matrix& hamiltonian, double dt) {
    const Matrix u = propagator(hamiltonian, dt);
    return DensityMatrix::renormalized(u * rho.matrix() * u.adjoint(), rho.layout());
}

namespace {

std::vector<SiteOutcome> measure_sites(Vector& amps, const SubsystemLayout& layout,
                                       const SiteMeasurementConfig& site_measure, TrajectoryMode mode, Rng& rng) {
    std::vector<SiteOutcome> outcomes;
    const double p = site_measure.effective_p(layout.sites());
    if (p <= 0.0) return outcomes;
    const Matrix basis = site_measure.site_basis();
    if (mode == TrajectoryMode::simultaneous_kraus) {
        // Commuting single-site projectors: sampling site by site yields the
        // joint distribution of the tensor-product Kraus set.
        std::vector<std::size_t> chosen;
        for (std::size_t s = 0; s < layout.sites(); ++s) {
            if (uniform01(rng) < p) chosen.push_back(s);
        }
        for (std::size_t s : chosen) outcomes.push_back(measure_site(amps, layout, s, basis, rng));
    } else {
        if (uniform01(rng) < p) {
            const std::size_t s = uniform_index(rng, layout.sites());
            outcomes.push_back(measure_site(amps, layout, s, basis, rng));
        }
    }
    return outcomes;
}

// Projective jump into the pointer basis (columns of `basis`, empty = computational).
void pointer_jump(Vector& amps, const Matrix& basis, Rng& rng) {
    const Vector coeffs = basis.size() == 0 ? amps : Vector(basis.adjoint() * amps);
    const double u = uniform01(rng);
    double acc = 0.0;
    Eigen::Index k = coeffs.size() - 1;
    for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
        acc += std::norm(coeffs(i));
        if (u < acc) {
            k = i;
            break;
        }
    }
    while (std::norm(coeffs(k)) == 0.0 && k > 0) --k;
    const cplx phase = coeffs(k) / std::abs(coeffs(k));
    if (basis.size() == 0) {
        amps.setZero();
        amps(k) = phase;
    } else {
        amps = phase * basis.col(k);
    }
}

std::size_t half_cut(const SubsystemLayout& layout) { return layout.sites() / 2; }

double density_half_entropy(const DensityMatrix& rho) {
    const std::size_t cut = half_cut(rho.layout());
    if (cut == 0) return 0.0;
    std::set<std::size_t> keep;
    for (std::size_t s = 0; s < cut; ++s) keep.insert(s);
    return von_neumann_entropy(partial_trace(rho, keep));
}

KrausSet single_site_kraus(const SubsystemLayout& layout, std::size_t site, const Matrix& basis) {
    std::vector<Matrix> ops;
    std::vector<std::string> labels;
    for (int r = 0; r < 2; ++r) {
        Matrix proj = basis.col(r) * basis.col(r).adjoint();
        ops.push_back(site_operator(static_cast<int>(layout.sites()), static_cast<int>(site), proj));
        labels.push_back("s" + std::to_string(site) + "=" + std::to_string(r));
    }
    return KrausSet(std::move(ops), std::move(labels));
}

// Samples an outcome of `kraus` on rho and returns the updated state.
std::pair<std::size_t, DensityMatrix> sample_density_outcome(const DensityMatrix& rho, const KrausSet& kraus, Rng& rng) {
    std::vector<double> probs;
    double total = 0.0;
    for (const auto& m : kraus.operators()) {
        probs.push_back(std::max(0.0, (m * rho.matrix() * m.adjoint()).trace().real()));
        total += probs.back();
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
    auto update = density_update(rho, kraus, chosen);
    if (!update.state) throw std::runtime_error("run_trajectory: sampled a vanishing outcome");
    return {chosen, *update.state};
}

std::vector<SiteOutcome> parse_site_label(const std::string& label) {
    // "s0=1,s3=0"
    std::vector<SiteOutcome> out;
    std::size_t pos = 0;
    while (pos < label.size()) {
        const auto end = label.find(',', pos);
        const std::string item = label.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
        const auto eq = item.find('=');
        if (item.size() > 1 && item[0] == 's' && eq != std::string::npos) {
            out.push_back({std::stoul(item.substr(1, eq - 1)), std::stoi(item.substr(eq + 1))});
        }
        if (end == std::string::npos) break;
        pos = end + 1;
    }
    return out;
}

}  // namespace

StepResult step(const StateVector& psi, const Matrix& unitary, const SiteMeasurementConfig& site_measure,
                TrajectoryMode mode, Rng& rng) {
    if (static_cast<std::size_t>(unitary.rows()) != psi.dim()) throw std::invalid_argument("step: dimension mismatch");
    Vector amps = unitary * psi.amplitudes();
    auto outcomes = measure_sites(amps, psi.layout(), site_measure, mode, rng);
    return {StateVector(std::move(amps), psi.layout()), std::move(outcomes)};
}

void TrajectoryConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("TrajectoryConfig: dt must be > 0");
    if (steps < 1) throw std::invalid_argument("TrajectoryConfig: steps must be >= 1");
    if (hamiltonian.rows() != hamiltonian.cols() || static_cast<std::size_t>(hamiltonian.rows()) != initial_state.dim()) {
        throw std::invalid_argument("TrajectoryConfig: Hamiltonian does not match the initial state");
    }
    if ((hamiltonian - hamiltonian.adjoint()).cwiseAbs().maxCoeff() > kStateTol) {
        throw std::invalid_argument("TrajectoryConfig: Hamiltonian is not Hermitian");
    }
    site_measure.validate();
    decoherence.validate();
    if (decoherence.pointer_basis.size() != 0 &&
        static_cast<std::size_t>(decoherence.pointer_basis.rows()) != initial_state.dim()) {
        throw std::invalid_argument("TrajectoryConfig: pointer basis dimension mismatch");
    }
    if (site_measure.effective_p(initial_state.layout().sites()) > 0.0 && !initial_state.layout().all_qubits()) {
        throw std::invalid_argument("TrajectoryConfig: site measurements need qubit sites");
    }
    if (density_matrix_mode && initial_state.dim() > 256) {
        throw std::invalid_argument("TrajectoryConfig: density-matrix mode limited to dimension 256");
    }
}

TrajectoryRecord run_trajectory(const TrajectoryConfig& config) {
    config.validate();
    Rng rng(config.seed);
    const Propagator prop(config.hamiltonian);
    const Matrix u = prop.at(config.dt);
    const SubsystemLayout& layout = config.initial_state.layout();
    const Vector& psi0 = config.initial_state.amplitudes();
    const auto n_steps = static_cast<std::size_t>(config.steps);

    TrajectoryRecord rec;
    rec.times.reserve(n_steps + 1);
    rec.outcomes.reserve(n_steps);

    if (!config.density_matrix_mode) {
        Vector amps = psi0;
        auto record = [&](double t) {
            const StateVector s(amps, layout);
            rec.times.push_back(t);
            rec.survival.push_back(std::min(1.0, std::norm(psi0.dot(s.amplitudes()))));
            rec.entropy.push_back(entanglement_entropy(s, half_cut(layout)));
            rec.purity.push_back(1.0);
            if (config.record_states) rec.states.push_back(s);
        };
        record(0.0);
        for (std::size_t n = 0; n < n_steps; ++n) {
            const double t0 = static_cast<double>(n) * config.dt;
            const double t1 = static_cast<double>(n + 1) * config.dt;
            amps = u * amps;
            rec.outcomes.push_back(measure_sites(amps, layout, config.site_measure, config.mode, rng));
            std::size_t jumps = 0;
            if (config.decoherence.kind != DecoherenceKind::none) {
                const double keep = config.decoherence.factor(t1) / config.decoherence.factor(t0);
                if (uniform01(rng) < 1.0 - keep) {
                    pointer_jump(amps, config.decoherence.pointer_basis, rng);
                    ++jumps;
                }
            }
            rec.dephasing_events.push_back(jumps);
            amps.normalize();
            record(t1);
        }
        return rec;
    }

    DensityMatrix rho = DensityMatrix::pure(config.initial_state);
    auto record = [&](double t) {
        rec.times.push_back(t);
        rec.survival.push_back(std::clamp(psi0.dot(rho.matrix() * psi0).real(), 0.0, 1.0));
        rec.entropy.push_back(density_half_entropy(rho));
        rec.purity.push_back(rho.purity());
    };
    record(0.0);
    const Matrix basis = config.site_measure.site_basis();
    const double p = config.site_measure.effective_p(layout.sites());
    for (std::size_t n = 0; n < n_steps; ++n) {
        const double t0 = static_cast<double>(n) * config.dt;
        const double t1 = static_cast<double>(n + 1) * config.dt;
        rho = DensityMatrix::renormalized(u * rho.matrix() * u.adjoint(), layout);

        std::vector<SiteOutcome> outcomes;
        if (p > 0.0) {
            if (config.mode == TrajectoryMode::simultaneous_kraus) {
                SiteKraus sk = build_site_kraus(layout, config.site_measure, rng);
                if (!sk.measured_sites.empty()) {
                    auto [m, next] = sample_density_outcome(rho, sk.kraus, rng);
                    outcomes = parse_site_label(sk.kraus.labels()[m]);
                    rho = std::move(next);
                }
            } else if (uniform01(rng) < p) {
                const std::size_t site = uniform_index(rng, layout.sites());
                auto [m, next] = sample_density_outcome(rho, single_site_kraus(layout, site, basis), rng);
                outcomes.push_back({site, static_cast<int>(m)});
                rho = std::move(next);
            }
        }
        rec.outcomes.push_back(std::move(outcomes));
        if (config.decoherence.kind != DecoherenceKind::none) {
            const double keep = config.decoherence.factor(t1) / config.decoherence.factor(t0);
            rho = apply_dephasing(rho, config.decoherence.pointer_basis, keep);
        }
        record(t1);
    }
    return rec;
}

double zeno_survival(const Matrix& hamiltonian, const StateVector& initial, double total_time, int k) {
    if (k < 1) throw std::invalid_argument("zeno_survival: k must be >= 1");
    if (static_cast<std::size_t>(hamiltonian.rows()) != initial.dim()) {
        throw std::invalid_argument("zeno_survival: dimension mismatch");
    }
    const Propagator prop(hamiltonian);
    const Vector evolved = prop.apply(initial.amplitudes(), total_time / static_cast<double>(k));
    const double per_interval = std::min(1.0, std::norm(initial.amplitudes().dot(evolved)));
    return std::pow(per_interval, k);
}

std::vector<FreezingPoint> zeno_freezing_sweep(const TrajectoryConfig& templ, std::vector<double> p_values,
                                               const FreezingOptions& options) {
    std::sort(p_values.begin(), p_values.end());
    for (double p : p_values) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("zeno_freezing_sweep: p outside [0,1]");
    }
    if (options.seed_count < 1) throw std::invalid_argument("zeno_freezing_sweep: need at least one seed");
    const std::size_t tail = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(options.late_fraction * static_cast<double>(templ.steps + 1))));

    const std::size_t n_runs = p_values.size() * options.seed_count;
    std::vector<double> late_survival(n_runs), late_entropy(n_runs);
    parallel_for(n_runs, options.jobs, [&](std::size_t idx) {
        const std::size_t pi = idx / options.seed_count;
        const std::size_t si = idx % options.seed_count;
        TrajectoryConfig cfg = templ;
        cfg.site_measure.coupling_rule = CouplingRule::fixed_p;
        cfg.site_measure.p_site = p_values[pi];
        cfg.seed = derive_seed(templ.seed, si);
        cfg.record_states = false;
        const TrajectoryRecord rec = run_trajectory(cfg);
        const std::size_t from = rec.times.size() - std::min(tail, rec.times.size());
        double s = 0.0, e = 0.0;
        for (std::size_t i = from; i < rec.times.size(); ++i) {
            s += rec.survival[i];
            e += rec.entropy[i];
        }
        const auto count = static_cast<double>(rec.times.size() - from);
        late_survival[idx] = s / count;
        late_entropy[idx] = e / count;
    });

    auto mean_sem = [](const double* v, std::size_t n) {
        const double mean = std::accumulate(v, v + n, 0.0) / static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) var += (v[i] - mean) * (v[i] - mean);
        const double sem = n > 1 ? std::sqrt(var / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
        return std::pair{mean, sem};
    };

    std::vector<FreezingPoint> out;
    for (std::size_t pi = 0; pi < p_values.size(); ++pi) {
        const std::size_t base = pi * options.seed_count;
        FreezingPoint pt;
        pt.p = p_values[pi];
        std::tie(pt.mean_survival, pt.sem_survival) = mean_sem(late_survival.data() + base, options.seed_count);
        std::tie(pt.mean_entropy, pt.sem_entropy) = mean_sem(late_entropy.data() + base, options.seed_count);
        out.push_back(pt);
    }
    return out;
}

QzeRatio qze_decoherence_ratio(const std::vector<double>& entropy, double dt, std::size_t window) {
    if (window < 2) throw std::invalid_argument("qze_decoherence_ratio: window must be >= 2");
    if (entropy.size() < 2 * window) throw std::invalid_argument("qze_decoherence_ratio: series too short");
    if (!(dt > 0.0)) throw std::invalid_argument("qze_decoherence_ratio: dt must be > 0");

    // Residual std after removing the in-window linear trend, so a steady
    // ramp contributes drift but no oscillation.
    const auto w = static_cast<double>(window);
    const double t_mean = (w - 1.0) / 2.0;
    double t_var = 0.0;
    for (std::size_t k = 0; k < window; ++k) t_var += (static_cast<double>(k) - t_mean) * (static_cast<double>(k) - t_mean);

    double osc_sum = 0.0;
    std::size_t n_windows = 0;
    for (std::size_t start = 0; start + window <= entropy.size(); ++start) {
        double mean = 0.0;
        for (std::size_t k = 0; k < window; ++k) mean += entropy[start + k];
        mean /= w;
        double cov = 0.0;
        for (std::size_t k = 0; k < window; ++k) cov += (static_cast<double>(k) - t_mean) * (entropy[start + k] - mean);
        const double slope = cov / t_var;
        double ss = 0.0;
        for (std::size_t k = 0; k < window; ++k) {
            const double r = entropy[start + k] - mean - slope * (static_cast<double>(k) - t_mean);
            ss += r * r;
        }
        osc_sum += std::sqrt(ss / w);
        ++n_windows;
    }

    QzeRatio out;
    out.oscillation = osc_sum / static_cast<double>(n_windows);
    const double duration = static_cast<double>(entropy.size() - 1) * dt;
    out.drift = std::abs(entropy.back() - entropy.front()) / duration;
    out.value = out.oscillation / (out.drift * w * dt + 1e-9);
    return out;
}

EvolutionMeasures evolution_measures(const std::vector<StateVector>& states) {
    if (states.size() < 2) throw std::invalid_argument("evolution_measures: need at least 2 states");
    const std::size_t n = states.size();
    for (const auto& s : states) {
        if (!(s.layout() == states.front().layout())) throw std::invalid_argument("evolution_measures: layout mismatch");
    }
    std::vector<double> w(n, 1.0);
    w.front() = w.back() = 0.5;
    const double wsum = static_cast<double>(n - 1);

    double pair_sum = 0.0;
    double integral = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double ov = i == j ? 1.0 : overlap(states[i], states[j]);
            if (i != j) pair_sum += 1.0 - ov;
            integral += w[i] * w[j] * ov;
        }
    }
    EvolutionMeasures out;
    out.pairwise_avg = std::clamp(pair_sum / static_cast<double>(n * (n - 1)), 0.0, 1.0);
    out.double_integral = std::clamp(1.0 - integral / (wsum * wsum), 0.0, 1.0);
    return out;
}

}  // namespace caslab
