#include "caslab/competition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "caslab/parallel.hpp"

namespace caslab {

std::string to_string(SelectionKind kind) {
    switch (kind) {
        case SelectionKind::proportional_with_floor: return "proportional_with_floor";
        case SelectionKind::softmax: return "softmax";
        case SelectionKind::uniform: return "uniform";
    }
    return "uniform";
}

std::vector<double> selection_probabilities(const std::vector<double>& amplitudes, const SelectionRule& rule,
                                            double delta) {
    const std::size_t k = amplitudes.size();
    std::vector<double> w(k, 1.0);
    switch (rule.kind) {
        case SelectionKind::proportional_with_floor:
            for (std::size_t b = 0; b < k; ++b) w[b] = amplitudes[b] + rule.floor * delta;
            break;
        case SelectionKind::softmax: {
            const double top = *std::max_element(amplitudes.begin(), amplitudes.end());
            for (std::size_t b = 0; b < k; ++b) w[b] = std::exp(rule.beta * (amplitudes[b] - top));
            break;
        }
        case SelectionKind::uniform:
            break;
    }
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& x : w) x /= total;
    return w;
}

void CompetitionConfig::validate() const {
    auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (n_bases < 1) throw std::invalid_argument("CompetitionConfig: n_bases must be >= 1");
    if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("CompetitionConfig: delta must be > 0");
    if (!finite_nonneg(decay)) throw std::invalid_argument("CompetitionConfig: lambda must be >= 0");
    if (!(rate_constant > 0.0) || !std::isfinite(rate_constant)) throw std::invalid_argument("CompetitionConfig: c must be > 0");
    if (!(n_variables >= 1.0) || !std::isfinite(n_variables)) throw std::invalid_argument("CompetitionConfig: N must be >= 1");
    if (!finite_nonneg(temperature)) throw std::invalid_argument("CompetitionConfig: temperature must be >= 0");
    if (!finite_nonneg(erasure_constant)) throw std::invalid_argument("CompetitionConfig: kappa must be >= 0");
    if (!(threshold > 0.0) || !std::isfinite(threshold)) throw std::invalid_argument("CompetitionConfig: threshold must be > 0");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("CompetitionConfig: horizon must be > 0");
    if (!finite_nonneg(burn_in) || burn_in >= horizon) throw std::invalid_argument("CompetitionConfig: burn_in must lie in [0, horizon)");
    if (selection.kind == SelectionKind::proportional_with_floor && !(selection.floor > 0.0 && selection.floor <= 1.0)) {
        throw std::invalid_argument("CompetitionConfig: floor eta must lie in (0, 1]");
    }
    if (selection.kind == SelectionKind::softmax && !std::isfinite(selection.beta)) {
        throw std::invalid_argument("CompetitionConfig: softmax beta must be finite");
    }
    if (!initial_amplitudes.empty()) {
        if (initial_amplitudes.size() != static_cast<std::size_t>(n_bases)) {
            throw std::invalid_argument("CompetitionConfig: one initial amplitude per basis required");
        }
        for (double a : initial_amplitudes) {
            if (!finite_nonneg(a)) throw std::invalid_argument("CompetitionConfig: initial amplitudes must be >= 0");
        }
    }
}

bool is_dominant(const std::vector<double>& amplitudes, double threshold, int* leader) {
    if (amplitudes.empty()) return false;
    std::size_t best = 0;
    for (std::size_t b = 1; b < amplitudes.size(); ++b) {
        if (amplitudes[b] > amplitudes[best]) best = b;
    }
    double runner_up = 0.0;
    for (std::size_t b = 0; b < amplitudes.size(); ++b) {
        if (b != best) runner_up = std::max(runner_up, amplitudes[b]);
    }
    if (leader) *leader = static_cast<int>(best);
    return amplitudes[best] >= threshold && amplitudes[best] >= 2.0 * runner_up;
}

CompetitionRecord simulate_competition(const CompetitionConfig& config) {
    Rng rng(config.seed);
    return simulate_competition(config, rng);
}

CompetitionRecord simulate_competition(const CompetitionConfig& config, Rng& rng) {
    config.validate();
    const auto k = static_cast<std::size_t>(config.n_bases);
    std::vector<double> amps = config.initial_amplitudes.empty() ? std::vector<double>(k, 0.0) : config.initial_amplitudes;
    std::vector<double> integral(k, 0.0);
    const double rate = config.event_rate();
    const double erase = config.erasure_rate();
    const double total_rate = rate + erase;
    const double lambda = config.decay;

    CompetitionRecord rec;
    double t = 0.0;

    // Integrates the decaying amplitudes over [t, t + tau] clipped to [burn_in, inf).
    auto advance = [&](double tau) {
        const double a = std::max(t, config.burn_in) - t;
        const double b = tau;
        if (b > a) {
            const double weight = lambda > 0.0 ? (std::exp(-lambda * a) - std::exp(-lambda * b)) / lambda : b - a;
            for (std::size_t i = 0; i < k; ++i) integral[i] += amps[i] * weight;
        }
        const double d = std::exp(-lambda * tau);
        for (double& x : amps) x *= d;
        t += tau;
    };

    int leader = 0;
    if (is_dominant(amps, config.threshold, &leader)) {
        rec.winner = leader;
        rec.time_to_dominance = 0.0;
    }
    const bool done_at_start = rec.winner && config.stop_at_dominance;
    while (!done_at_start) {
        const double tau = exponential(rng, total_rate);
        if (t + tau >= config.horizon) {
            advance(config.horizon - t);
            t = config.horizon;
            break;
        }
        advance(tau);
        const bool actualize = erase <= 0.0 || uniform01(rng) * total_rate < rate;
        int chosen = -1;
        if (actualize) {
            const auto probs = selection_probabilities(amps, config.selection, config.delta);
            const double u = uniform01(rng);
            double acc = 0.0;
            chosen = static_cast<int>(k - 1);
            for (std::size_t b = 0; b < k; ++b) {
                acc += probs[b];
                if (u < acc) {
                    chosen = static_cast<int>(b);
                    break;
                }
            }
            amps[static_cast<std::size_t>(chosen)] += config.delta;
            ++rec.actualizations;
        } else {
            std::fill(amps.begin(), amps.end(), 0.0);
            ++rec.erasures;
        }
        if (config.record_log) rec.events.push_back({t, chosen, amps});
        if (actualize && !rec.winner && is_dominant(amps, config.threshold, &leader)) {
            rec.winner = leader;
            rec.time_to_dominance = t;
            if (config.stop_at_dominance) break;
        }
    }

    rec.end_time = t;
    rec.final_amplitudes = amps;
    rec.time_averaged.assign(k, 0.0);
    const double span = t - config.burn_in;
    if (span > 0.0) {
        for (std::size_t i = 0; i < k; ++i) rec.time_averaged[i] = integral[i] / span;
    }
    return rec;
}

Equilibrium equilibrium_amplitude(double delta, double decay, double rate, EquilibriumSchedule schedule) {
    if (!(delta > 0.0)) throw std::invalid_argument("equilibrium_amplitude: delta must be > 0");
    if (!(decay >= 0.0)) throw std::invalid_argument("equilibrium_amplitude: lambda must be >= 0");
    if (!(rate > 0.0)) throw std::invalid_argument("equilibrium_amplitude: F must be > 0");
    if (decay == 0.0) return {std::numeric_limits<double>::infinity(), true};
    if (schedule == EquilibriumSchedule::poisson_mean) return {delta * rate / decay, false};
    return {delta / std::expm1(decay / rate), false};
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.empty()) throw std::invalid_argument("linear_fit: size mismatch");
    LinearFit fit;
    const auto n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (x.size() < 2 || sxx == 0.0) {
        fit.degenerate = true;
        fit.intercept = my;
        return fit;
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

ScalingCurve n_scaling_curve(const CompetitionConfig& templ, const std::vector<double>& n_values, std::size_t runs,
                             std::size_t jobs) {
    if (n_values.empty()) throw std::invalid_argument("n_scaling_curve: empty N list");
    if (!std::is_sorted(n_values.begin(), n_values.end())) throw std::invalid_argument("n_scaling_curve: N list must increase");
    if (runs < 1) throw std::invalid_argument("n_scaling_curve: need at least one run per point");
    std::vector<double> leader(n_values.size() * runs);
    parallel_for(leader.size(), jobs, [&](std::size_t idx) {
        const std::size_t pi = idx / runs;
        CompetitionConfig cfg = templ;
        cfg.n_variables = n_values[pi];
        cfg.stop_at_dominance = false;
        cfg.record_log = false;
        cfg.seed = derive_seed(derive_seed(templ.seed, pi), idx % runs);
        const auto rec = simulate_competition(cfg);
        leader[idx] = *std::max_element(rec.time_averaged.begin(), rec.time_averaged.end());
    });

    ScalingCurve curve;
    std::vector<double> xs, ys;
    for (std::size_t pi = 0; pi < n_values.size(); ++pi) {
        const double* v = leader.data() + pi * runs;
        const double mean = std::accumulate(v, v + runs, 0.0) / static_cast<double>(runs);
        double var = 0.0;
        for (std::size_t i = 0; i < runs; ++i) var += (v[i] - mean) * (v[i] - mean);
        const double sem = runs > 1 ? std::sqrt(var / static_cast<double>(runs - 1) / static_cast<double>(runs)) : 0.0;
        curve.points.push_back({n_values[pi], mean, sem});
        xs.push_back(n_values[pi]);
        ys.push_back(mean);
    }
    curve.fit = linear_fit(xs, ys);
    return curve;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t m = i; m <= j; ++m) ranks[idx[m]] = r;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("spearman: need two equal-length series");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= static_cast<double>(rx.size());
    my /= static_cast<double>(ry.size());
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

TemperatureSweep temperature_sweep(const CompetitionConfig& templ, const std::vector<double>& temperatures,
                                   std::size_t runs, std::size_t jobs) {
    if (temperatures.empty()) throw std::invalid_argument("temperature_sweep: empty temperature list");
    if (!std::is_sorted(temperatures.begin(), temperatures.end())) {
        throw std::invalid_argument("temperature_sweep: temperatures must increase");
    }
    if (runs < 1) throw std::invalid_argument("temperature_sweep: need at least one run per point");
    std::vector<double> dominated(temperatures.size() * runs), times(temperatures.size() * runs);
    parallel_for(dominated.size(), jobs, [&](std::size_t idx) {
        const std::size_t pi = idx / runs;
        CompetitionConfig cfg = templ;
        cfg.temperature = temperatures[pi];
        cfg.stop_at_dominance = true;
        cfg.record_log = false;
        cfg.seed = derive_seed(derive_seed(templ.seed, pi), idx % runs);
        const auto rec = simulate_competition(cfg);
        dominated[idx] = rec.winner ? 1.0 : 0.0;
        times[idx] = rec.time_to_dominance.value_or(std::numeric_limits<double>::quiet_NaN());
    });

    TemperatureSweep out;
    std::vector<double> tx;
    for (std::size_t pi = 0; pi < temperatures.size(); ++pi) {
        TemperaturePoint pt{temperatures[pi], 0.0, 0.0, runs};
        std::size_t wins = 0;
        double tsum = 0.0;
        for (std::size_t r = 0; r < runs; ++r) {
            const std::size_t idx = pi * runs + r;
            tx.push_back(temperatures[pi]);
            if (dominated[idx] > 0.0) {
                ++wins;
                tsum += times[idx];
            }
        }
        pt.dominance_probability = static_cast<double>(wins) / static_cast<double>(runs);
        pt.mean_time_to_dominance = wins ? tsum / static_cast<double>(wins) : std::numeric_limits<double>::quiet_NaN();
        out.points.push_back(pt);
    }
    if (tx.size() >= 2) {
        out.spearman_rho = spearman(tx, dominated);
        out.spearman_upper95 = out.spearman_rho + 1.6448536269514722 / std::sqrt(static_cast<double>(tx.size() - 1));
    }
    double steepest = 0.0;
    for (std::size_t i = 0; i + 1 < out.points.size(); ++i) {
        const double dT = out.points[i + 1].temperature - out.points[i].temperature;
        if (dT <= 0.0) continue;
        const double slope = (out.points[i].dominance_probability - out.points[i + 1].dominance_probability) / dT;
        if (slope > steepest) {
            steepest = slope;
            out.transition_temperature = 0.5 * (out.points[i].temperature + out.points[i + 1].temperature);
        }
    }
    return out;
}

SymmetryBreakingStats symmetry_breaking_stats(const std::vector<CompetitionRecord>& records, int n_bases) {
    if (records.empty()) throw std::invalid_argument("symmetry_breaking_stats: no records");
    if (n_bases < 1) throw std::invalid_argument("symmetry_breaking_stats: n_bases must be >= 1");
    SymmetryBreakingStats out;
    out.winner_histogram.assign(static_cast<std::size_t>(n_bases) + 1, 0);
    out.records = records.size();
    std::vector<double> times;
    for (const auto& r : records) {
        if (r.winner && *r.winner >= 0 && *r.winner < n_bases) {
            ++out.winner_histogram[static_cast<std::size_t>(*r.winner)];
            if (r.time_to_dominance) times.push_back(*r.time_to_dominance);
        } else {
            ++out.winner_histogram.back();
        }
    }
    if (!times.empty()) {
        std::sort(times.begin(), times.end());
        for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            // Linear interpolation between order statistics.
            const double pos = q * static_cast<double>(times.size() - 1);
            const auto lo = static_cast<std::size_t>(std::floor(pos));
            const std::size_t hi = std::min(lo + 1, times.size() - 1);
            out.dominance_time_quantiles.push_back(times[lo] + (pos - static_cast<double>(lo)) * (times[hi] - times[lo]));
        }
    }
    return out;
}

double chi_square_uniform(const std::vector<std::size_t>& counts) {
    if (counts.empty()) throw std::invalid_argument("chi_square_uniform: no bins");
    const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
    const double expected = total / static_cast<double>(counts.size());
    double chi = 0.0;
    for (std::size_t c : counts) chi += (static_cast<double>(c) - expected) * (static_cast<double>(c) - expected) / expected;
    return chi;
}

double chi_square_critical95(int dof) {
    if (dof < 1) throw std::invalid_argument("chi_square_critical95: dof must be >= 1");
    // Exact table for small dof, Wilson-Hilferty beyond.
    static const double table[] = {3.841459, 5.991465, 7.814728, 9.487729, 11.070498,
                                   12.591587, 14.067140, 15.507313, 16.918978, 18.307038};
    if (dof <= 10) return table[dof - 1];
    const double k = static_cast<double>(dof);
    const double h = 2.0 / (9.0 * k);
    return k * std::pow(1.0 - h + 1.6448536269514722 * std::sqrt(h), 3.0);
}

}  // namespace caslab
