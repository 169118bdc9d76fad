// competition.hpp
// Event-driven basis-amplitude competition. Each candidate basis carries an
// amplitude that jumps by delta on actualization events (Poisson, rate
// F = c N) and decays as exp(-lambda t) in between. Temperature erases all
// amplitudes at Poisson rate kappa T. The model is a multi-channel
// shot-noise process with reinforcement in the channel selection.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "caslab/random.hpp"

namespace caslab {

enum class SelectionKind { proportional_with_floor, softmax, uniform };

std::string to_string(SelectionKind kind);

struct SelectionRule {
    SelectionKind kind = SelectionKind::proportional_with_floor;
    double floor = 0.1;  // eta, weight floor eta * delta
    double beta = 1.0;   // softmax inverse temperature
};

// Normalized selection probabilities for the next actualization event.
std::vector<double> selection_probabilities(const std::vector<double>& amplitudes, const SelectionRule& rule,
                                            double delta);

struct CompetitionConfig {
    int n_bases = 2;  // K, desk-scale stand-in for 2^N candidate bases
    double delta = 1.0;
    double decay = 1.0;  // lambda
    double rate_constant = 1.0;  // c
    double n_variables = 10.0;   // N
    SelectionRule selection;
    double temperature = 0.0;
    double erasure_constant = 1.0;  // kappa
    double threshold = 5.0;         // theta
    double horizon = 100.0;
    std::uint64_t seed = 0;
    std::vector<double> initial_amplitudes;  // empty = all zero
    bool stop_at_dominance = true;
    bool record_log = true;
    double burn_in = 0.0;  // time excluded from the time averages

    double event_rate() const { return rate_constant * n_variables; }  // F
    double erasure_rate() const { return erasure_constant * temperature; }
    void validate() const;
};

struct CompetitionEvent {
    double time;
    int basis;  // -1 for an erasure event
    std::vector<double> amplitudes;  // after the event
};

struct CompetitionRecord {
    std::vector<CompetitionEvent> events;
    std::optional<int> winner;
    std::optional<double> time_to_dominance;
    std::vector<double> final_amplitudes;
    double end_time = 0.0;
    std::size_t actualizations = 0;
    std::size_t erasures = 0;
    // Time average of each amplitude over [burn_in, end_time].
    std::vector<double> time_averaged;
};

// Dominance: leader >= theta and >= 2x runner-up.
bool is_dominant(const std::vector<double>& amplitudes, double threshold, int* leader = nullptr);

CompetitionRecord simulate_competition(const CompetitionConfig& config, Rng& rng);
CompetitionRecord simulate_competition(const CompetitionConfig& config);  // Rng seeded from config.seed

enum class EquilibriumSchedule { poisson_mean, periodic_fixed_point };

struct Equilibrium {
    double value = 0.0;
    bool unbounded = false;  // lambda == 0
};

// poisson_mean: delta F / lambda. periodic_fixed_point: delta / (exp(lambda/F) - 1).
Equilibrium equilibrium_amplitude(double delta, double decay, double rate, EquilibriumSchedule schedule);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    bool degenerate = false;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

struct ScalingPoint {
    double n_variables;
    double mean_max_amplitude;  // ensemble mean of the leader's time-averaged amplitude
    double sem;
};

struct ScalingCurve {
    std::vector<ScalingPoint> points;
    LinearFit fit;
};

// F = c N per point; runs per point use seeds derive_seed(templ.seed, i).
ScalingCurve n_scaling_curve(const CompetitionConfig& templ, const std::vector<double>& n_values, std::size_t runs,
                             std::size_t jobs = 1);

struct TemperaturePoint {
    double temperature;
    double dominance_probability;
    double mean_time_to_dominance;  // NaN when no run reached dominance
    std::size_t runs;
};

struct TemperatureSweep {
    std::vector<TemperaturePoint> points;
    double spearman_rho = 0.0;       // over all (T, dominated?) pairs
    double spearman_upper95 = 0.0;   // one-sided upper confidence bound
    std::optional<double> transition_temperature;  // midpoint of the steepest drop
};

TemperatureSweep temperature_sweep(const CompetitionConfig& templ, const std::vector<double>& temperatures,
                                   std::size_t runs, std::size_t jobs = 1);

struct SymmetryBreakingStats {
    std::vector<std::size_t> winner_histogram;  // size K + 1, last bucket = no winner
    std::size_t records = 0;
    // min, q25, median, q75, max of time_to_dominance among winners (empty if none)
    std::vector<double> dominance_time_quantiles;
};

SymmetryBreakingStats symmetry_breaking_stats(const std::vector<CompetitionRecord>& records, int n_bases);

// Pearson chi-square statistic against a uniform distribution over `counts`.
double chi_square_uniform(const std::vector<std::size_t>& counts);
// Upper 95% quantile of chi-square with `dof` degrees of freedom.
double chi_square_critical95(int dof);

// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace caslab
