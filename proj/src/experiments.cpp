#include "caslab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "caslab/competition.hpp"
#include "caslab/dynamics.hpp"
#include "caslab/entanglement.hpp"
#include "caslab/hamiltonians.hpp"
#include "caslab/madelung.hpp"
#include "caslab/measurement.hpp"
#include "caslab/parallel.hpp"
#include "caslab/random.hpp"
#include "caslab/serialization.hpp"

namespace caslab {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

const Table& ExperimentResult::table(const std::string& name) const {
    for (const auto& [n, t] : tables) {
        if (n == name) return t;
    }
    throw std::out_of_range("no result table '" + name + "'");
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double num(const json& j, const char* key) { return j.at(key).get<double>(); }
int integer(const json& j, const char* key) { return j.at(key).get<int>(); }
std::string str(const json& j, const char* key) { return j.at(key).get<std::string>(); }
std::vector<double> numbers(const json& j, const char* key) { return j.at(key).get<std::vector<double>>(); }

Cell i64(std::size_t v) { return static_cast<std::int64_t>(v); }

// NaN and infinities become null in summaries.
ojson metric(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

struct MeanSem {
    double mean = 0.0;
    double sem = 0.0;
};

MeanSem mean_sem(const std::vector<double>& v) {
    MeanSem out;
    if (v.empty()) return {kNaN, kNaN};
    out.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() > 1) {
        double var = 0.0;
        for (double x : v) var += (x - out.mean) * (x - out.mean);
        out.sem = std::sqrt(var / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    }
    return out;
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

SpinChainHamiltonian build_model(const json& m) {
    const auto kind = str(m, "kind");
    const int length = integer(m, "length");
    const double coupling = num(m, "coupling");
    const double field = num(m, "transverse_field");
    const Boundary boundary = str(m, "boundary") == "periodic" ? Boundary::periodic : Boundary::open;
    if (kind == "ising_z") return build_ising(length, coupling, IsingVariant::z_only, field, boundary);
    if (kind == "heisenberg_xyz") return build_ising(length, coupling, IsingVariant::xyz, field, boundary);
    NkOptions options;
    options.transverse_field = field;
    options.energy_scale = num(m, "energy_scale");
    return build_nk_spin_glass(length, integer(m, "ruggedness"), m.at("model_seed").get<std::uint64_t>(), options);
}

StateVector initial_product_state(const json& spec, int length) {
    std::vector<int> digits(static_cast<std::size_t>(length), 0);
    if (spec.is_string()) {
        const auto name = spec.get<std::string>();
        for (int i = 0; i < length; ++i) {
            digits[static_cast<std::size_t>(i)] = name == "neel" ? i % 2 : (name == "all_down" ? 1 : 0);
        }
    } else {
        digits = spec.get<std::vector<int>>();
        if (digits.size() != static_cast<std::size_t>(length)) {
            throw ConfigError("params.initial: " + std::to_string(digits.size()) + " digits given for " +
                              std::to_string(length) + " sites");
        }
    }
    return StateVector::product(SubsystemLayout::qubits(length), digits);
}

Matrix hadamard() {
    Matrix h(2, 2);
    h << 1.0, 1.0, 1.0, -1.0;
    return h / std::sqrt(2.0);
}

// ---------------------------------------------------------------- zeno

ExperimentResult run_zeno(const ExperimentConfig& cfg) {
    const json& p = cfg.params;
    const double omega = num(p, "omega");
    const double total = num(p, "total_time");
    const Matrix h = 0.5 * omega * pauli::x();
    const auto psi0 = StateVector::basis(SubsystemLayout::qubits(1), 0);

    ExperimentResult r;
    Table t{{"k", "step", "time", "survival"}, {}};
    double last = kNaN;
    int last_k = 0;
    for (int k : p.at("k_values").get<std::vector<int>>()) {
        const double tau = total / k;
        const double per_step = zeno_survival(h, psi0, tau, 1);
        for (int j = 0; j <= k; ++j) {
            const double s = j == 0 ? 1.0 : (j == k ? zeno_survival(h, psi0, total, k) : std::pow(per_step, j));
            t.add_row({static_cast<std::int64_t>(k), static_cast<std::int64_t>(j), j * tau, s});
        }
        last = zeno_survival(h, psi0, total, k);
        last_k = k;
    }
    r.tables.emplace_back("survival", std::move(t));
    r.summary["k"] = last_k;
    r.summary["final_survival"] = metric(last);
    r.summary["closed_form"] = metric(std::pow(std::cos(omega * total / (2.0 * last_k)), 2.0 * last_k));
    return r;
}

// ---------------------------------------------------------------- trajectory

ExperimentResult run_trajectories(const ExperimentConfig& cfg, std::size_t jobs) {
    const json& p = cfg.params;
    const auto model = build_model(p.at("model"));
    const int length = integer(p.at("model"), "length");

    TrajectoryConfig tc{model.matrix(), initial_product_state(p.at("initial"), length)};
    tc.dt = num(p, "dt");
    tc.steps = integer(p, "steps");
    const json& m = p.at("measurement");
    tc.site_measure.p_site = num(m, "p_site");
    tc.site_measure.coupling_rule =
        str(m, "rule") == "fixed_p" ? CouplingRule::fixed_p : CouplingRule::proportional_to_n;
    tc.site_measure.rate_constant = num(m, "rate_constant");
    if (str(m, "basis") == "x") tc.site_measure.basis = hadamard();
    tc.mode = str(m, "mode") == "simultaneous" ? TrajectoryMode::simultaneous_kraus
                                                : TrajectoryMode::sequential_single_site;
    const json& d = p.at("decoherence");
    const auto dk = str(d, "kind");
    tc.decoherence.kind = dk == "none" ? DecoherenceKind::none
                                       : (dk == "exponential" ? DecoherenceKind::exponential : DecoherenceKind::power_law);
    tc.decoherence.rate = num(d, "rate");
    tc.decoherence.scale = num(d, "scale");
    tc.decoherence.exponent = num(d, "exponent");
    tc.density_matrix_mode = p.at("density_matrix_mode").get<bool>();
    tc.validate();

    const std::size_t n = cfg.repeat;
    std::vector<TrajectoryRecord> records(n);
    std::vector<std::uint64_t> seeds(n);
    parallel_for(n, jobs, [&](std::size_t i) {
        TrajectoryConfig c = tc;
        c.seed = seeds[i] = derive_seed(cfg.seed, i);
        records[i] = run_trajectory(c);
    });

    const std::size_t points = static_cast<std::size_t>(tc.steps) + 1;
    const auto late = std::max<std::size_t>(
        1, std::min(points, static_cast<std::size_t>(std::ceil(num(p, "late_fraction") * static_cast<double>(points)))));
    const auto window = static_cast<std::size_t>(integer(p, "qze_window"));

    ExperimentResult r;
    Table traj{{"trajectory", "step", "time", "survival", "entropy", "purity"}, {}};
    json docs = json::array();
    std::vector<double> late_s, late_e, qze;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& rec = records[i];
        for (std::size_t s = 0; s < rec.times.size(); ++s) {
            if (!std::isfinite(rec.survival[s]) || !std::isfinite(rec.entropy[s])) {
                throw NumericalError("trajectory " + std::to_string(i) + ": non-finite observable at step " +
                                     std::to_string(s));
            }
            traj.add_row({i64(i), i64(s), rec.times[s], rec.survival[s], rec.entropy[s], rec.purity[s]});
        }
        double ss = 0.0, se = 0.0;
        for (std::size_t s = points - late; s < points; ++s) {
            ss += rec.survival[s];
            se += rec.entropy[s];
        }
        late_s.push_back(ss / static_cast<double>(late));
        late_e.push_back(se / static_cast<double>(late));
        if (rec.entropy.size() >= 2 * window) qze.push_back(qze_decoherence_ratio(rec.entropy, tc.dt, window).value);

        json outcomes = json::array();
        for (const auto& step : rec.outcomes) {
            json o = json::array();
            for (const auto& so : step) o.push_back({so.site, so.result});
            outcomes.push_back(std::move(o));
        }
        docs.push_back({{"trajectory", i},
                        {"seed", seeds[i]},
                        {"times", rec.times},
                        {"survival", rec.survival},
                        {"entropy", rec.entropy},
                        {"purity", rec.purity},
                        {"outcomes", std::move(outcomes)},
                        {"dephasing_events", rec.dephasing_events}});
    }

    Table ens{{"step", "time", "mean_survival", "sem_survival", "mean_entropy", "sem_entropy", "mean_purity"}, {}};
    for (std::size_t s = 0; s < points; ++s) {
        std::vector<double> sv, ev, pv;
        for (const auto& rec : records) {
            sv.push_back(rec.survival[s]);
            ev.push_back(rec.entropy[s]);
            pv.push_back(rec.purity[s]);
        }
        const auto a = mean_sem(sv), b = mean_sem(ev), c = mean_sem(pv);
        ens.add_row({i64(s), records.front().times[s], a.mean, a.sem, b.mean, b.sem, c.mean});
    }
    const auto ls = mean_sem(late_s), le = mean_sem(late_e);

    r.summary["trajectories"] = n;
    r.summary["effective_p"] = tc.site_measure.effective_p(static_cast<std::size_t>(length));
    r.summary["late_points"] = late;
    r.summary["late_mean_survival"] = metric(ls.mean);
    r.summary["late_sem_survival"] = metric(ls.sem);
    r.summary["late_mean_entropy"] = metric(le.mean);
    r.summary["late_sem_entropy"] = metric(le.sem);
    r.summary["final_mean_survival"] = metric(std::get<double>(ens.rows.back()[2]));
    r.summary["qze_ratio"] = qze.empty() ? ojson(nullptr) : metric(mean_sem(qze).mean);
    r.tables.emplace_back("trajectories", std::move(traj));
    r.tables.emplace_back("ensemble", std::move(ens));
    r.documents.emplace_back("records.json", dump(docs));
    return r;
}

// ---------------------------------------------------------------- competition family

CompetitionConfig competition_config(const ExperimentConfig& cfg) {
    const json& p = cfg.params;
    CompetitionConfig c;
    c.n_bases = integer(p, "n_bases");
    c.delta = num(p, "delta");
    c.decay = num(p, "decay");
    c.rate_constant = num(p, "rate_constant");
    c.n_variables = num(p, "n_variables");
    const json& s = p.at("selection");
    const auto sk = str(s, "kind");
    c.selection.kind = sk == "softmax" ? SelectionKind::softmax
                                       : (sk == "uniform" ? SelectionKind::uniform : SelectionKind::proportional_with_floor);
    c.selection.floor = num(s, "floor");
    c.selection.beta = num(s, "beta");
    c.temperature = num(p, "temperature");
    c.erasure_constant = num(p, "erasure_constant");
    c.threshold = num(p, "threshold");
    c.horizon = num(p, "horizon");
    c.burn_in = num(p, "burn_in");
    c.initial_amplitudes = numbers(p, "initial_amplitudes");
    c.stop_at_dominance = p.at("stop_at_dominance").get<bool>();
    c.seed = cfg.seed;
    c.validate();
    return c;
}

ExperimentResult run_competition(const ExperimentConfig& cfg, std::size_t jobs) {
    const auto base = competition_config(cfg);
    const std::size_t n = cfg.repeat;
    std::vector<CompetitionRecord> records(n);
    parallel_for(n, jobs, [&](std::size_t i) {
        CompetitionConfig c = base;
        c.seed = derive_seed(cfg.seed, i);
        c.record_log = i == 0;
        records[i] = simulate_competition(c);
    });

    ExperimentResult r;
    const auto k = static_cast<std::size_t>(base.n_bases);
    Table events{{"time", "basis"}, {}};
    for (std::size_t b = 0; b < k; ++b) events.columns.push_back("a" + std::to_string(b));
    std::vector<Cell> first{0.0, std::monostate{}};
    for (std::size_t b = 0; b < k; ++b) first.emplace_back(base.initial_amplitudes.empty() ? 0.0 : base.initial_amplitudes[b]);
    events.add_row(std::move(first));
    for (const auto& e : records.front().events) {
        std::vector<Cell> row{e.time, static_cast<std::int64_t>(e.basis)};
        for (double a : e.amplitudes) row.emplace_back(a);
        events.add_row(std::move(row));
    }

    Table runs{{"run", "winner", "time_to_dominance", "end_time", "actualizations", "erasures", "leader_average"}, {}};
    std::vector<double> leader, times;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& rec = records[i];
        const double lead = *std::max_element(rec.time_averaged.begin(), rec.time_averaged.end());
        leader.push_back(lead);
        if (rec.time_to_dominance) times.push_back(*rec.time_to_dominance);
        runs.add_row({i64(i), rec.winner ? Cell(static_cast<std::int64_t>(*rec.winner)) : Cell(std::monostate{}),
                      rec.time_to_dominance.value_or(kNaN), rec.end_time, i64(rec.actualizations), i64(rec.erasures),
                      lead});
    }

    const auto stats = symmetry_breaking_stats(records, base.n_bases);
    Table winners{{"basis", "count"}, {}};
    for (std::size_t b = 0; b <= k; ++b) {
        winners.add_row({b < k ? Cell(static_cast<std::int64_t>(b)) : Cell(std::string("none")),
                         i64(stats.winner_histogram[b])});
    }
    const std::vector<std::size_t> won(stats.winner_histogram.begin(), stats.winner_histogram.end() - 1);
    const auto wins = std::accumulate(won.begin(), won.end(), std::size_t{0});
    const auto ls = mean_sem(leader);
    const auto poisson = equilibrium_amplitude(base.delta, base.decay, base.event_rate(), EquilibriumSchedule::poisson_mean);
    const auto periodic =
        equilibrium_amplitude(base.delta, base.decay, base.event_rate(), EquilibriumSchedule::periodic_fixed_point);

    r.summary["runs"] = n;
    r.summary["event_rate"] = base.event_rate();
    r.summary["dominance_probability"] = static_cast<double>(wins) / static_cast<double>(n);
    r.summary["mean_time_to_dominance"] = metric(mean_sem(times).mean);
    r.summary["mean_leader_average"] = metric(ls.mean);
    r.summary["sem_leader_average"] = metric(ls.sem);
    r.summary["poisson_equilibrium"] = metric(poisson.value);
    r.summary["periodic_fixed_point"] = metric(periodic.value);
    r.summary["winner_chi_square"] = k >= 2 && wins > 0 ? metric(chi_square_uniform(won)) : ojson(nullptr);
    r.summary["chi_square_critical95"] = k >= 2 ? metric(chi_square_critical95(static_cast<int>(k) - 1)) : ojson(nullptr);
    r.tables.emplace_back("events", std::move(events));
    r.tables.emplace_back("runs", std::move(runs));
    r.tables.emplace_back("winners", std::move(winners));
    return r;
}

ExperimentResult run_temperature_sweep(const ExperimentConfig& cfg, std::size_t jobs) {
    const auto sweep = temperature_sweep(competition_config(cfg), numbers(cfg.params, "temperatures"), cfg.repeat, jobs);
    ExperimentResult r;
    Table t{{"temperature", "dominance_probability", "mean_time_to_dominance", "runs"}, {}};
    for (const auto& pt : sweep.points) {
        t.add_row({pt.temperature, pt.dominance_probability, pt.mean_time_to_dominance, i64(pt.runs)});
    }
    r.summary["runs_per_point"] = cfg.repeat;
    r.summary["spearman_rho"] = metric(sweep.spearman_rho);
    r.summary["spearman_upper95"] = metric(sweep.spearman_upper95);
    r.summary["transition_temperature"] =
        sweep.transition_temperature ? metric(*sweep.transition_temperature) : ojson(nullptr);
    r.tables.emplace_back("dominance", std::move(t));
    return r;
}

ExperimentResult run_n_scaling(const ExperimentConfig& cfg, std::size_t jobs) {
    const auto base = competition_config(cfg);
    const auto curve = n_scaling_curve(base, numbers(cfg.params, "n_values"), cfg.repeat, jobs);
    ExperimentResult r;
    Table t{{"n_variables", "event_rate", "mean_max_amplitude", "sem", "poisson_equilibrium"}, {}};
    for (const auto& pt : curve.points) {
        const double rate = base.rate_constant * pt.n_variables;
        const auto eq = equilibrium_amplitude(base.delta, base.decay, rate, EquilibriumSchedule::poisson_mean);
        t.add_row({pt.n_variables, rate, pt.mean_max_amplitude, pt.sem, eq.unbounded ? kNaN : eq.value});
    }
    const double predicted = base.decay > 0.0 ? base.rate_constant * base.delta / base.decay : kNaN;
    r.summary["runs_per_point"] = cfg.repeat;
    r.summary["slope"] = metric(curve.fit.slope);
    r.summary["intercept"] = metric(curve.fit.intercept);
    r.summary["r2"] = metric(curve.fit.r2);
    r.summary["degenerate"] = curve.fit.degenerate;
    r.summary["predicted_slope"] = metric(predicted);
    r.summary["slope_relative_error"] = metric(std::abs(curve.fit.slope - predicted) / predicted);
    r.tables.emplace_back("scaling", std::move(t));
    return r;
}

// ---------------------------------------------------------------- spacing

ExperimentResult run_spacing(const ExperimentConfig& cfg) {
    const json& p = cfg.params;
    SpacingOptions opt;
    opt.unfolding_degree = integer(p, "unfolding_degree");
    opt.edge_fraction = num(p, "edge_fraction");
    opt.ordered_below = num(p, "ordered_below");
    opt.chaotic_above = num(p, "chaotic_above");
    if (!(opt.ordered_below < opt.chaotic_above)) throw ConfigError("params: ordered_below must be below chaotic_above");

    const auto source = str(p, "source");
    SpectralStats stats;
    if (source == "model") {
        stats = level_spacing_stats(build_model(p.at("model")), opt);
    } else {
        const auto ens = source == "poisson" ? SyntheticEnsemble::poisson : SyntheticEnsemble::wigner;
        stats = level_spacing_stats(synthetic_spectrum(ens, static_cast<std::size_t>(integer(p, "levels")), cfg.seed), opt);
    }

    ExperimentResult r;
    const std::size_t n = stats.eigenvalues.size();
    const std::size_t m = stats.spacings.size();
    // Spacing i of the trimmed window sits between levels offset + i and offset + i + 1.
    const std::size_t offset = m < n ? (n - m - 1) / 2 : 0;
    Table t{{"index", "eigenvalue", "spacing"}, {}};
    for (std::size_t i = 0; i < n; ++i) {
        const bool has = i >= offset && i - offset < m;
        t.add_row({i64(i), stats.eigenvalues[i], has ? Cell(stats.spacings[i - offset]) : Cell(std::monostate{})});
    }
    std::string warnings;
    for (const auto& w : stats.warnings) warnings += (warnings.empty() ? "" : "; ") + w;
    r.summary["source"] = source;
    r.summary["levels"] = n;
    r.summary["spacings"] = m;
    r.summary["brody_q"] = metric(stats.brody_q);
    r.summary["regime"] = to_string(stats.regime);
    r.summary["fit_accepted"] = stats.fit_accepted;
    r.summary["warnings"] = warnings;
    r.tables.emplace_back("spectrum", std::move(t));
    return r;
}

// ---------------------------------------------------------------- weak

ExperimentResult run_weak(const ExperimentConfig& cfg) {
    const json& p = cfg.params;
    WeakMeasurementSetup setup;
    const json& obs = p.at("observable");
    if (obs.is_string()) {
        const auto s = obs.get<std::string>();
        setup.observable = s == "x" ? pauli::x() : (s == "y" ? pauli::y() : pauli::z());
    } else {
        setup.observable = matrix_from_json(obs);
    }
    setup.coupling = num(p, "coupling");
    setup.pointer_sigma = num(p, "pointer_sigma");
    setup.grid.points = static_cast<std::size_t>(integer(p, "grid_points"));
    setup.grid.extent_sigmas = num(p, "extent_sigmas");
    setup.validate();

    const auto initial = state_from_json(p.at("initial"));
    ExperimentResult r;
    PointerDistribution dist;
    json setup_doc = to_json(setup);
    setup_doc["initial"] = p.at("initial");
    setup_doc["final"] = p.at("final");
    r.summary["weak"] = weakness_check(setup);
    if (p.at("final").is_null()) {
        dist = weak_measure(initial, setup);
        const double expectation = initial.amplitudes().dot(setup.observable * initial.amplitudes()).real();
        r.summary["mean_shift"] = metric(dist.mean_shift);
        r.summary["expected_shift"] = metric(setup.coupling * expectation);
        r.summary["postselection_probability"] = 1.0;
        r.summary["postselection_first_order"] = 1.0;
        r.summary["weak_value_re"] = nullptr;
        r.summary["weak_value_im"] = nullptr;
        r.summary["weak_value_divergent"] = false;
    } else {
        const PrePostSelection sel{initial, state_from_json(p.at("final"))};
        dist = weak_measure_postselected(sel, setup);
        if (!(dist.postselection_probability > 1e-14)) {
            throw NumericalError("post-selection probability " + std::to_string(dist.postselection_probability) +
                                 " vanishes; the conditioned pointer distribution is undefined");
        }
        const auto wv = weak_value(sel, setup.observable);
        r.summary["mean_shift"] = metric(dist.mean_shift);
        r.summary["expected_shift"] = wv.divergent ? ojson(nullptr) : metric(setup.coupling * wv.value.real());
        r.summary["postselection_probability"] = metric(dist.postselection_probability);
        r.summary["postselection_first_order"] = metric(postselection_probability(sel, setup, true));
        r.summary["weak_value_re"] = wv.divergent ? ojson(nullptr) : metric(wv.value.real());
        r.summary["weak_value_im"] = wv.divergent ? ojson(nullptr) : metric(wv.value.imag());
        r.summary["weak_value_divergent"] = wv.divergent;
    }
    Table t{{"x", "probability"}, {}};
    for (std::size_t i = 0; i < dist.x.size(); ++i) t.add_row({dist.x[i], dist.probability[i]});
    r.tables.emplace_back("pointer", std::move(t));
    r.documents.emplace_back("setup.json", dump(setup_doc));
    return r;
}

// ---------------------------------------------------------------- chsh

ExperimentResult run_chsh(const ExperimentConfig& cfg) {
    const json& p = cfg.params;
    const auto kind = mixed_basis_from_string(str(p, "basis_kind"));
    const auto form_name = str(p, "form");
    const HybridForm form = form_name == "bell_phi_plus" ? HybridForm::bell_phi_plus
                                                         : (form_name == "product" ? HybridForm::product : HybridForm::custom);
    const auto re = numbers(p, "amplitudes_re");
    auto im = numbers(p, "amplitudes_im");
    if (im.empty()) im.assign(re.size(), 0.0);
    if (im.size() != re.size()) throw ConfigError("params.amplitudes_im: length must match amplitudes_re");
    if (form == HybridForm::custom && re.size() != 4) throw ConfigError("params.amplitudes_re: custom form needs 4 amplitudes");
    std::vector<cplx> amps;
    for (std::size_t i = 0; i < re.size(); ++i) amps.emplace_back(re[i], im[i]);
    const auto state = build_hybrid_state(kind, form, form == HybridForm::custom ? amps : std::vector<cplx>{});

    ExperimentResult r;
    const int steps = integer(p, "angle_steps");
    Table t{{"theta", "a", "a_prime", "b", "b_prime", "s"}, {}};
    for (int i = 0; i < steps; ++i) {
        const double theta = M_PI * i / (steps - 1);
        const ChshSettings s{0.0, 2.0 * theta, theta, -theta};
        t.add_row({theta, s.a, s.a_prime, s.b, s.b_prime, chsh_value(state, s)});
    }
    const auto opt = chsh_optimize(state);
    r.summary["s_max"] = metric(opt.s_max);
    r.summary["a"] = opt.settings.a;
    r.summary["a_prime"] = opt.settings.a_prime;
    r.summary["b"] = opt.settings.b;
    r.summary["b_prime"] = opt.settings.b_prime;
    r.summary["marginal_entropy"] = metric(entanglement_entropy(state.state, 1));
    r.summary["violates_classical_bound"] = opt.s_max > 2.0 + 1e-9;
    r.tables.emplace_back("chsh", std::move(t));
    return r;
}

// ---------------------------------------------------------------- patterns

ExperimentResult run_patterns(const ExperimentConfig& cfg) {
    const int length = integer(cfg.params, "peptide_length");
    const auto n_pairs = static_cast<unsigned>(integer(cfg.params, "n_pairs"));
    const auto relations = enumerate_pair_relations();

    ExperimentResult r;
    Table rel{{"pattern", "i", "j", "relation", "code"}, {}};
    std::vector<std::size_t> counts(relations.size(), 0);
    json docs = json::array();
    for (std::size_t k = 0; k < cfg.repeat; ++k) {
        const auto pattern = sample_pattern(length, derive_seed(cfg.seed, k));
        docs.push_back(to_json(pattern));
        for (std::size_t i = 0; i < pattern.atoms.size(); ++i) {
            for (std::size_t j = i + 1; j < pattern.atoms.size(); ++j) {
                const auto& pr = pattern.relation(i, j);
                rel.add_row({i64(k), i64(i), i64(j), pr.name(), static_cast<std::int64_t>(pr.code())});
                ++counts[static_cast<std::size_t>(pr.code())];
            }
        }
    }
    Table cnt{{"relation", "code", "count"}, {}};
    for (std::size_t c = 0; c < relations.size(); ++c) {
        cnt.add_row({relations[c].name(), static_cast<std::int64_t>(c), i64(counts[c])});
    }
    const auto size = pattern_space_size(n_pairs).str();
    r.summary["patterns"] = cfg.repeat;
    r.summary["pair_count"] = pair_count(10);
    r.summary["relation_values"] = relations.size();
    r.summary["n_pairs"] = n_pairs;
    r.summary["pattern_space_size"] = size;
    r.summary["pattern_space_digits"] = size.size();
    r.tables.emplace_back("relations", std::move(rel));
    r.tables.emplace_back("relation_counts", std::move(cnt));
    r.documents.emplace_back("patterns.json", dump(docs));
    return r;
}

// ---------------------------------------------------------------- madelung

ExperimentResult run_madelung(const ExperimentConfig& cfg) {
    const json& p = cfg.params;
    const auto shape = str(p, "state");
    const auto n = static_cast<std::size_t>(integer(p, "points"));
    const double extent = num(p, "extent");
    const double hbar = num(p, "hbar"), mass = num(p, "mass"), omega = num(p, "omega");
    const double k = num(p, "momentum"), w = num(p, "width"), c = num(p, "center");
    const double alpha = mass * omega / (2.0 * hbar);

    auto psi = sample_wavefunction(
        -extent, 2.0 * extent / static_cast<double>(n), n,
        [&](double x) -> cplx {
            const double u = x - c;
            if (shape == "oscillator_ground") return std::exp(-alpha * u * u);
            if (shape == "oscillator_first") return u * std::exp(-alpha * u * u);
            return std::exp(-u * u / (4.0 * w * w)) * std::polar(1.0, k * x / hbar);
        },
        hbar, mass);
    auto f = decompose(psi);
    quantum_potential(f, mass, hbar, num(p, "relative_mask"));
    momentum_field(f);

    // Closed forms: E_n - V for oscillator eigenstates, and the Gaussian
    // amplitude curvature for the packet.
    auto exact_q = [&](double x) {
        const double u = x - c;
        if (shape == "gaussian_packet") return hbar * hbar / (2.0 * mass) * (1.0 / (2.0 * w * w) - u * u / (4.0 * w * w * w * w));
        const double level = shape == "oscillator_ground" ? 0.5 : 1.5;
        return level * hbar * omega - 0.5 * mass * omega * omega * u * u;
    };
    const double floor = shape == "gaussian_packet" ? hbar * hbar / (4.0 * mass * w * w) : 0.5 * hbar * omega;

    ExperimentResult r;
    Table t{{"x", "R", "S", "Q", "p"}, {}};
    std::size_t valid = 0;
    double max_q = 0.0, max_rel = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = f.x(i);
        Cell q = std::monostate{};
        if (f.potential_valid[i]) {
            const double v = f.quantum_potential[i];
            if (!std::isfinite(v)) throw NumericalError("quantum potential is not finite at x = " + format_double(x));
            q = v;
            ++valid;
            max_q = std::max(max_q, std::abs(v));
            max_rel = std::max(max_rel, std::abs(v - exact_q(x)) / std::max(std::abs(exact_q(x)), floor));
        }
        t.add_row({x, f.amplitude[i], f.action_valid[i] ? Cell(f.action[i]) : Cell(std::monostate{}), q,
                   f.momentum_valid[i] ? Cell(f.momentum[i]) : Cell(std::monostate{})});
    }
    r.summary["points"] = n;
    r.summary["valid_q_points"] = valid;
    r.summary["max_abs_q"] = metric(max_q);
    r.summary["max_relative_error"] = valid ? metric(max_rel) : ojson(nullptr);
    r.tables.emplace_back("fields", std::move(t));
    return r;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, std::size_t jobs) {
    jobs = std::max<std::size_t>(1, jobs);
    switch (config.kind) {
        case ExperimentKind::zeno: return run_zeno(config);
        case ExperimentKind::trajectory: return run_trajectories(config, jobs);
        case ExperimentKind::competition: return run_competition(config, jobs);
        case ExperimentKind::temperature_sweep: return run_temperature_sweep(config, jobs);
        case ExperimentKind::n_scaling: return run_n_scaling(config, jobs);
        case ExperimentKind::spacing: return run_spacing(config);
        case ExperimentKind::weak: return run_weak(config);
        case ExperimentKind::chsh: return run_chsh(config);
        case ExperimentKind::patterns: return run_patterns(config);
        case ExperimentKind::madelung: return run_madelung(config);
    }
    throw ConfigError("unknown experiment kind");
}

ojson parameter_echo(const ExperimentConfig& config) {
    const json& p = config.params;
    ojson e = ojson::object();
    switch (config.kind) {
        case ExperimentKind::zeno:
            e["Omega"] = p["omega"];
            e["T"] = p["total_time"];
            break;
        case ExperimentKind::trajectory:
            e["L"] = p["model"]["length"];
            e["J"] = p["model"]["coupling"];
            e["h"] = p["model"]["transverse_field"];
            e["p"] = p["measurement"]["p_site"];
            e["c"] = p["measurement"]["rate_constant"];
            e["Gamma"] = p["decoherence"]["rate"];
            e["tau"] = p["decoherence"]["scale"];
            e["alpha"] = p["decoherence"]["exponent"];
            e["dt"] = p["dt"];
            break;
        case ExperimentKind::competition:
        case ExperimentKind::temperature_sweep:
        case ExperimentKind::n_scaling:
            e["delta"] = p["delta"];
            e["lambda"] = p["decay"];
            e["c"] = p["rate_constant"];
            e["N"] = p["n_variables"];
            e["F"] = num(p, "rate_constant") * num(p, "n_variables");
            e["kappa"] = p["erasure_constant"];
            e["T"] = p["temperature"];
            e["theta"] = p["threshold"];
            e["eta"] = p["selection"]["floor"];
            break;
        case ExperimentKind::spacing:
            e["source"] = p["source"];
            e["N"] = p["model"]["length"];
            e["K"] = p["model"]["ruggedness"];
            e["J"] = p["model"]["coupling"];
            e["h"] = p["model"]["transverse_field"];
            break;
        case ExperimentKind::weak:
            e["g"] = p["coupling"];
            e["sigma"] = p["pointer_sigma"];
            break;
        case ExperimentKind::chsh:
            e["basis_kind"] = p["basis_kind"];
            e["form"] = p["form"];
            break;
        case ExperimentKind::patterns:
            e["n_pairs"] = p["n_pairs"];
            e["peptide_length"] = p["peptide_length"];
            break;
        case ExperimentKind::madelung:
            e["hbar"] = p["hbar"];
            e["m"] = p["mass"];
            e["omega"] = p["omega"];
            break;
    }
    return e;
}

}  // namespace caslab
