#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "caslab/competition.hpp"

using namespace caslab;

namespace {

CompetitionConfig fast_race(int bases, std::uint64_t seed) {
    CompetitionConfig cfg;
    cfg.n_bases = bases;
    cfg.delta = 1.0;
    cfg.decay = 1.0;
    cfg.rate_constant = 1.0;
    cfg.n_variables = 10.0;
    cfg.threshold = 5.0;
    cfg.horizon = 100.0;
    cfg.record_log = false;
    cfg.seed = seed;
    return cfg;
}

double three_sigma(double p, std::size_t n) { return 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n)); }

}  // namespace

TEST_CASE("no decay, single basis: amplitude counts events") {
    auto cfg = fast_race(1, 3);
    cfg.decay = 0.0;
    cfg.threshold = 1e9;
    cfg.horizon = 5.0;
    cfg.record_log = true;
    auto rec = simulate_competition(cfg);
    REQUIRE(rec.actualizations > 10);
    for (std::size_t i = 0; i < rec.events.size(); ++i) {
        CHECK(rec.events[i].amplitudes[0] == static_cast<double>(i + 1));
    }
    CHECK(rec.final_amplitudes[0] == static_cast<double>(rec.actualizations));
}

TEST_CASE("amplitudes decay exactly between events") {
    auto cfg = fast_race(3, 17);
    cfg.record_log = true;
    cfg.stop_at_dominance = false;
    cfg.horizon = 20.0;
    cfg.temperature = 0.5;
    auto rec = simulate_competition(cfg);
    REQUIRE(rec.events.size() > 50);
    for (std::size_t i = 1; i < rec.events.size(); ++i) {
        const auto& prev = rec.events[i - 1];
        const auto& cur = rec.events[i];
        const double d = std::exp(-cfg.decay * (cur.time - prev.time));
        for (int b = 0; b < 3; ++b) {
            double expected = prev.amplitudes[b] * d;
            if (cur.basis == -1) expected = 0.0;
            if (cur.basis == b) expected += cfg.delta;
            CHECK(std::abs(cur.amplitudes[b] - expected) <= 1e-12 * std::max(1.0, expected));
        }
    }
    CHECK(rec.erasures > 0);
}

TEST_CASE("K = 2 symmetric start: each basis wins half the time") {
    const std::size_t runs = 10000;
    std::size_t first = 0, decided = 0;
    for (std::size_t i = 0; i < runs; ++i) {
        auto rec = simulate_competition(fast_race(2, derive_seed(5, i)));
        if (rec.winner) {
            ++decided;
            first += *rec.winner == 0;
        }
    }
    REQUIRE(decided == runs);
    CHECK(std::abs(first / double(runs) - 0.5) < three_sigma(0.5, runs));
}

TEST_CASE("stationary mean of the single-channel shot-noise process") {
    auto cfg = fast_race(1, 99);
    cfg.stop_at_dominance = false;
    cfg.threshold = 1e9;
    cfg.horizon = 1e4;  // about 1e5 events at F = 10
    cfg.burn_in = 10.0;
    auto rec = simulate_competition(cfg);
    CHECK(rec.actualizations > 90000);
    const double target = equilibrium_amplitude(1.0, 1.0, 10.0, EquilibriumSchedule::poisson_mean).value;
    CHECK(std::abs(rec.time_averaged[0] - target) / target < 0.05);
}

TEST_CASE("equilibrium_amplitude examples") {
    CHECK(equilibrium_amplitude(1, 1, 10, EquilibriumSchedule::periodic_fixed_point).value ==
          doctest::Approx(1.0 / (std::exp(0.1) - 1.0)).epsilon(1e-14));
    CHECK(std::abs(equilibrium_amplitude(1, 1, 10, EquilibriumSchedule::periodic_fixed_point).value - 9.50833) < 1e-5);
    CHECK(equilibrium_amplitude(1, 1, 10, EquilibriumSchedule::poisson_mean).value == 10.0);
    for (auto s : {EquilibriumSchedule::poisson_mean, EquilibriumSchedule::periodic_fixed_point}) {
        CHECK(equilibrium_amplitude(1, 1, 1e-6, s).value < 1e-5);
        CHECK(equilibrium_amplitude(1, 0, 10, s).unbounded);
        for (double scale : {0.5, 3.0}) {
            CHECK(equilibrium_amplitude(scale * 1.3, 0.7, 4.0, s).value ==
                  doctest::Approx(scale * equilibrium_amplitude(1.3, 0.7, 4.0, s).value).epsilon(1e-14));
        }
    }
    // The schedules agree as lambda / F -> 0.
    const double p = equilibrium_amplitude(1, 1, 1e4, EquilibriumSchedule::periodic_fixed_point).value;
    CHECK(std::abs(p - 1e4) / 1e4 < 1e-4);
}

TEST_CASE("periodic fixed point matches deterministic iteration") {
    const double delta = 2.0, lambda = 0.5, f = 20.0;
    double a = 0.0;
    for (int i = 0; i < 20000; ++i) a = (a + delta) * std::exp(-lambda / f);
    // Fixed point of A <- (A + delta) exp(-lambda / F) measured just after a decay.
    const double fp = equilibrium_amplitude(delta, lambda, f, EquilibriumSchedule::periodic_fixed_point).value;
    CHECK(std::abs(a - fp) < 1e-12 * fp);
}

TEST_CASE("proportional selection reinforces the larger amplitude") {
    SelectionRule rule;
    Rng rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> amps(4);
        for (double& x : amps) x = 10.0 * uniform01(rng);
        auto before = selection_probabilities(amps, rule, 1.0);
        const double total = std::accumulate(before.begin(), before.end(), 0.0);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
        amps[1] += uniform01(rng);
        auto after = selection_probabilities(amps, rule, 1.0);
        CHECK(after[1] >= before[1] - 1e-15);
    }
    SelectionRule uniform{SelectionKind::uniform};
    auto u = selection_probabilities({5.0, 0.0, 1.0}, uniform, 1.0);
    for (double p : u) CHECK(p == doctest::Approx(1.0 / 3.0));
    SelectionRule soft{SelectionKind::softmax, 0.1, 2.0};
    auto s = selection_probabilities({1.0, 0.0}, soft, 1.0);
    CHECK(s[0] == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));
}

TEST_CASE("exchange symmetry under relabeling") {
    // A head start on basis 0 and on basis 2 must give the same winning
    // frequency for the favoured basis.
    const std::size_t runs = 4000;
    auto head_start_wins = [&](std::size_t favoured) {
        std::size_t wins = 0;
        for (std::size_t i = 0; i < runs; ++i) {
            auto cfg = fast_race(3, derive_seed(31 + favoured, i));
            cfg.initial_amplitudes.assign(3, 0.0);
            cfg.initial_amplitudes[favoured] = 1.5;
            auto rec = simulate_competition(cfg);
            wins += rec.winner && *rec.winner == static_cast<int>(favoured);
        }
        return wins / double(runs);
    };
    const double a = head_start_wins(0), c = head_start_wins(2);
    const double pooled = 0.5 * (a + c);
    CHECK(std::abs(a - c) < 4.0 * std::sqrt(2.0 * pooled * (1 - pooled) / runs));
}

TEST_CASE("linear_fit and n_scaling_curve") {
    auto fit = linear_fit({1, 2, 3, 4}, {3, 5, 7, 9});
    CHECK(fit.slope == doctest::Approx(2.0));
    CHECK(fit.intercept == doctest::Approx(1.0));
    CHECK(fit.r2 == doctest::Approx(1.0));
    CHECK(linear_fit({2}, {5}).degenerate);

    auto templ = fast_race(1, 8);
    templ.horizon = 200.0;
    templ.burn_in = 20.0;
    templ.threshold = 1e9;
    auto single = n_scaling_curve(templ, {10.0}, 4);
    CHECK(single.fit.degenerate);

    // lambda / F ~ 1: report the curve; the periodic fixed point bends below
    // the linear law and the Monte Carlo mean still follows delta F / lambda.
    auto curve = n_scaling_curve(templ, {1.0, 2.0, 4.0}, 20, 2);
    for (const auto& pt : curve.points) {
        const double linear = pt.n_variables;
        const double periodic = equilibrium_amplitude(1, 1, pt.n_variables, EquilibriumSchedule::periodic_fixed_point).value;
        CHECK(periodic < linear);
        CHECK(std::abs(pt.mean_max_amplitude - linear) < 5.0 * pt.sem + 0.05 * linear);
    }
    CHECK(n_scaling_curve(templ, {1.0, 2.0, 4.0}, 20, 1).points[2].mean_max_amplitude ==
          curve.points[2].mean_max_amplitude);
}

TEST_CASE("temperature sweep limits") {
    auto templ = fast_race(2, 12);
    auto sweep = temperature_sweep(templ, {0.0, 1000.0}, 200);
    REQUIRE(sweep.points.size() == 2);
    CHECK(sweep.points[0].dominance_probability == 1.0);  // theta = 5 < delta F / lambda = 10
    CHECK(sweep.points[1].dominance_probability < 0.01);  // kappa T = 1000 >> F = 10
    CHECK(sweep.spearman_rho < 0.0);
    REQUIRE(sweep.transition_temperature);
    CHECK(*sweep.transition_temperature == doctest::Approx(500.0));
    CHECK_THROWS(temperature_sweep(templ, {2.0, 1.0}, 10));
}

TEST_CASE("symmetry_breaking_stats") {
    std::vector<CompetitionRecord> same;
    for (int i = 0; i < 50; ++i) same.push_back(simulate_competition(fast_race(4, 77)));
    auto one = symmetry_breaking_stats(same, 4);
    CHECK(std::count_if(one.winner_histogram.begin(), one.winner_histogram.end(),
                        [](std::size_t c) { return c > 0; }) == 1);

    const std::size_t runs = 4000;
    std::vector<CompetitionRecord> many;
    for (std::size_t i = 0; i < runs; ++i) many.push_back(simulate_competition(fast_race(4, derive_seed(101, i))));
    auto stats = symmetry_breaking_stats(many, 4);
    REQUIRE(stats.winner_histogram.size() == 5);
    CHECK(stats.winner_histogram[4] == 0);
    std::vector<std::size_t> counts(stats.winner_histogram.begin(), stats.winner_histogram.begin() + 4);
    CHECK(chi_square_uniform(counts) < chi_square_critical95(3));
    REQUIRE(stats.dominance_time_quantiles.size() == 5);
    CHECK(std::is_sorted(stats.dominance_time_quantiles.begin(), stats.dominance_time_quantiles.end()));

    std::size_t biased_wins = 0;
    for (std::size_t i = 0; i < runs; ++i) {
        auto cfg = fast_race(4, derive_seed(202, i));
        cfg.initial_amplitudes = {cfg.threshold / 2.0, 0.0, 0.0, 0.0};
        auto rec = simulate_competition(cfg);
        biased_wins += rec.winner && *rec.winner == 0;
    }
    // One-sided binomial test against 1 / K at the 5% level.
    const double p0 = 0.25;
    CHECK(biased_wins / double(runs) > p0 + 1.645 * std::sqrt(p0 * (1 - p0) / runs));
}

TEST_CASE("statistics helpers") {
    CHECK(chi_square_critical95(1) == doctest::Approx(3.841).epsilon(1e-3));
    CHECK(chi_square_critical95(3) == doctest::Approx(7.815).epsilon(1e-3));
    CHECK(chi_square_critical95(10) == doctest::Approx(18.307).epsilon(1e-3));
    CHECK(chi_square_critical95(30) == doctest::Approx(43.773).epsilon(2e-3));
    CHECK(chi_square_uniform({10, 10, 10}) == 0.0);
    CHECK(chi_square_uniform({20, 10}) == doctest::Approx(10.0 / 3.0));
    CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
    CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
    CHECK(spearman({1, 1, 2, 2}, {0, 0, 1, 1}) == doctest::Approx(1.0));
}

TEST_CASE("config validation") {
    auto cfg = fast_race(2, 1);
    cfg.decay = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = fast_race(2, 1);
    cfg.initial_amplitudes = {1.0};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
