#include <doctest.h>

#include <cmath>

#include "caslab/dynamics.hpp"
#include "caslab/hamiltonians.hpp"

using namespace caslab;

namespace {

// Rabi qubit with Omega = 1: H = (1/2) sigma^x.
Matrix rabi() { return 0.5 * pauli::x(); }

StateVector ket0() { return StateVector::basis(SubsystemLayout::qubits(1), 0); }

StateVector ket_plus() {
    Vector v(2);
    v << 1.0, 1.0;
    return StateVector(v, SubsystemLayout::qubits(1));
}

DensityMatrix plus_rho() { return DensityMatrix::pure(ket_plus()); }

TrajectoryConfig chain_config(double p, std::uint64_t seed) {
    TrajectoryConfig cfg{.hamiltonian = build_ising(4, 1.0, IsingVariant::xyz).matrix(),
                         .initial_state = StateVector::product(SubsystemLayout::qubits(4), {0, 1, 0, 1})};
    cfg.dt = 0.2;
    cfg.steps = 30;
    cfg.site_measure.p_site = p;
    cfg.seed = seed;
    return cfg;
}

bool same_record(const TrajectoryRecord& a, const TrajectoryRecord& b) {
    if (a.survival != b.survival || a.entropy != b.entropy || a.purity != b.purity) return false;
    if (a.dephasing_events != b.dephasing_events || a.outcomes.size() != b.outcomes.size()) return false;
    for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
        if (a.outcomes[i].size() != b.outcomes[i].size()) return false;
        for (std::size_t j = 0; j < a.outcomes[i].size(); ++j) {
            if (a.outcomes[i][j].site != b.outcomes[i][j].site || a.outcomes[i][j].result != b.outcomes[i][j].result)
                return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("step examples") {
    Rng rng(1);
    SiteMeasurementConfig off;
    Matrix u = propagator(rabi(), 0.3);
    auto unitary_only = step(ket0(), u, off, TrajectoryMode::simultaneous_kraus, rng);
    CHECK(unitary_only.outcomes.empty());
    CHECK((unitary_only.state.amplitudes() - u * ket0().amplitudes()).norm() < 1e-14);

    SiteMeasurementConfig always;
    always.p_site = 1.0;
    Matrix id = Matrix::Identity(8, 8);
    auto basis = StateVector::product(SubsystemLayout::qubits(3), {1, 0, 1});
    auto s = basis;
    for (int i = 0; i < 10; ++i) {
        s = step(s, id, always, TrajectoryMode::simultaneous_kraus, rng).state;
        CHECK((s.amplitudes() - basis.amplitudes()).norm() < 1e-14);
    }

    const int n = 10000;
    int zeros = 0;
    for (int i = 0; i < n; ++i) {
        Rng r(derive_seed(99, static_cast<std::uint64_t>(i)));
        auto out = step(ket_plus(), Matrix::Identity(2, 2), always, TrajectoryMode::simultaneous_kraus, r);
        REQUIRE(out.outcomes.size() == 1);
        const int result = out.outcomes[0].result;
        zeros += result == 0;
        CHECK(std::abs(out.state.amplitudes()(result)) == doctest::Approx(1.0));
    }
    CHECK(std::abs(zeros / double(n) - 0.5) < 3.0 * std::sqrt(0.25 / n));
}

TEST_CASE("sequential mode measures at most one site per step") {
    Rng rng(5);
    SiteMeasurementConfig always;
    always.p_site = 1.0;
    auto psi = random_state(SubsystemLayout::qubits(3), 3);
    for (int i = 0; i < 50; ++i) {
        auto out = step(psi, Matrix::Identity(8, 8), always, TrajectoryMode::sequential_single_site, rng);
        CHECK(out.outcomes.size() == 1);
    }
}

TEST_CASE("trajectories are bit-reproducible") {
    for (bool density : {false, true}) {
        auto cfg = chain_config(0.3, 2024);
        cfg.density_matrix_mode = density;
        cfg.decoherence.kind = DecoherenceKind::exponential;
        cfg.decoherence.rate = 0.2;
        auto a = run_trajectory(cfg);
        auto b = run_trajectory(cfg);
        CHECK(same_record(a, b));
        cfg.seed = 2025;
        CHECK(!same_record(a, run_trajectory(cfg)));
    }
}

TEST_CASE("density mode tracks the ensemble average of pure trajectories") {
    // Without measurement the dephasing unravelling must reproduce the channel:
    // the mean of pure-trajectory survival matches the density-matrix value.
    TrajectoryConfig cfg{.hamiltonian = rabi(), .initial_state = ket0()};
    cfg.dt = 0.1;
    cfg.steps = 20;
    cfg.decoherence.kind = DecoherenceKind::exponential;
    cfg.decoherence.rate = 0.5;
    cfg.density_matrix_mode = true;
    const double exact = run_trajectory(cfg).survival.back();
    cfg.density_matrix_mode = false;
    const int runs = 4000;
    double mean = 0.0, sq = 0.0;
    for (int i = 0; i < runs; ++i) {
        cfg.seed = derive_seed(11, static_cast<std::uint64_t>(i));
        const double s = run_trajectory(cfg).survival.back();
        mean += s;
        sq += s * s;
    }
    mean /= runs;
    const double sem = std::sqrt((sq / runs - mean * mean) / runs);
    CHECK(std::abs(mean - exact) < 4.0 * sem + 1e-12);
}

TEST_CASE("zeno_survival examples") {
    CHECK(zeno_survival(rabi(), ket0(), M_PI, 1) == doctest::Approx(0.0).epsilon(1e-12));
    const double oracle = std::pow(std::cos(M_PI / 20), 20);
    CHECK(std::abs(zeno_survival(rabi(), ket0(), M_PI, 10) - oracle) < 1e-12);
    CHECK(std::abs(oracle - 0.7805460698) < 1e-10);

    const double r = (1 - zeno_survival(rabi(), ket0(), M_PI, 256)) / (1 - zeno_survival(rabi(), ket0(), M_PI, 64));
    CHECK(r == doctest::Approx(0.25).epsilon(0.01));
}

TEST_CASE("Zeno limit is monotone and tends to one") {
    double previous = -1.0;
    for (int k = 1; k <= 256; k *= 2) {
        const double s = zeno_survival(rabi(), ket0(), M_PI, k);
        CHECK(s >= previous - 1e-15);
        CHECK(std::abs(s - std::pow(std::cos(M_PI / (2 * k)), 2 * k)) < 1e-9);
        previous = s;
    }
    CHECK(zeno_survival(rabi(), ket0(), M_PI, 100000) > 0.9999);
}

TEST_CASE("short-time quadratic law") {
    auto h = build_ising(3, 1.0, IsingVariant::xyz, 0.7).matrix();
    auto psi = random_state(SubsystemLayout::qubits(3), 21);
    std::vector<double> lx, ly;
    for (double dt = 1e-3; dt <= 0.1 + 1e-12; dt *= 1.5) {
        lx.push_back(std::log(dt));
        ly.push_back(std::log(1.0 - zeno_survival(h, psi, dt, 1)));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i] / lx.size(), my += ly[i] / ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
    CHECK(sxy / sxx == doctest::Approx(2.0).epsilon(0.025));

    // Prefactor is the energy variance.
    const Vector& a = psi.amplitudes();
    const double e1 = a.dot(h * a).real();
    const double e2 = a.dot(h * h * a).real();
    const double dt = 1e-4;
    CHECK((1.0 - zeno_survival(h, psi, dt, 1)) / (dt * dt) == doctest::Approx(e2 - e1 * e1).epsilon(1e-4));
}

TEST_CASE("apply_decoherence examples") {
    DecoherenceSpec none;
    none.kind = DecoherenceKind::exponential;
    none.rate = 0.0;
    CHECK((apply_decoherence(plus_rho(), none, 3.0).matrix() - plus_rho().matrix()).norm() < 1e-15);

    DecoherenceSpec expo;
    expo.kind = DecoherenceKind::exponential;
    expo.rate = 1.0;
    auto r = apply_decoherence(plus_rho(), expo, std::log(2.0));
    CHECK(std::abs(r.matrix()(0, 1) - cplx(0.25)) < 1e-14);
    CHECK(std::abs(r.matrix()(0, 0) - cplx(0.5)) < 1e-14);

    DecoherenceSpec power;
    power.kind = DecoherenceKind::power_law;
    power.scale = 1.0;
    power.exponent = 1.0;
    CHECK(power.factor(3.0) == doctest::Approx(0.25));
    CHECK(std::abs(apply_decoherence(plus_rho(), power, 3.0).matrix()(1, 0) - cplx(0.125)) < 1e-14);

    expo.rate = -1.0;
    CHECK_THROWS(expo.validate());
}

TEST_CASE("decoherence factor composition") {
    DecoherenceSpec expo;
    expo.kind = DecoherenceKind::exponential;
    expo.rate = 0.8;
    DecoherenceSpec power;
    power.kind = DecoherenceKind::power_law;
    power.scale = 0.5;
    power.exponent = 1.5;
    for (auto [t1, t2] : {std::pair{0.3, 1.1}, std::pair{2.0, 0.7}}) {
        CHECK(std::abs(expo.factor(t1) * expo.factor(t2) - expo.factor(t1 + t2)) < 1e-12);
        CHECK(std::abs(power.factor(t1) * power.factor(t2) - power.factor(t1 + t2)) > 1e-3);
    }
}

TEST_CASE("dephasing keeps states positive in any pointer basis") {
    for (unsigned long long seed = 0; seed < 30; ++seed) {
        auto rho = random_density(SubsystemLayout::qubits(2), 1 + seed % 4, seed);
        DecoherenceSpec spec;
        spec.kind = seed % 2 ? DecoherenceKind::exponential : DecoherenceKind::power_law;
        spec.rate = 2.0;
        spec.pointer_basis = random_unitary(4, seed + 7);
        auto out = apply_decoherence(rho, spec, 0.1 * static_cast<double>(seed));
        Eigen::SelfAdjointEigenSolver<Matrix> es(out.matrix());
        CHECK(es.eigenvalues().minCoeff() > -1e-10);
        CHECK(std::abs(out.matrix().trace() - cplx(1.0)) < 1e-12);
    }
}

TEST_CASE("evolve_von_neumann examples") {
    auto rho0 = DensityMatrix::pure(ket0());
    CHECK((evolve_von_neumann(rho0, pauli::z(), 0.9).matrix() - rho0.matrix()).norm() < 1e-14);

    auto out = evolve_von_neumann(plus_rho(), 0.5 * pauli::z(), M_PI);
    Vector minus(2);
    minus << 1.0, -1.0;
    minus /= std::sqrt(2.0);
    CHECK((out.matrix() - minus * minus.adjoint()).norm() < 1e-12);
}

TEST_CASE("zeno_freezing_sweep limits") {
    auto templ = chain_config(0.0, 77);
    FreezingOptions opts;
    opts.seed_count = 8;
    auto points = zeno_freezing_sweep(templ, {1.0, 0.0}, opts);
    REQUIRE(points.size() == 2);
    CHECK(points[0].p == 0.0);
    CHECK(points[1].p == 1.0);
    // Measuring every site leaves a product state.
    CHECK(points[1].mean_entropy == doctest::Approx(0.0));

    // p = 0: every seed reproduces the unmeasured unitary evolution over the
    // trailing ceil(0.25 * (steps + 1)) samples.
    auto unitary = run_trajectory(templ);
    const std::size_t n = unitary.survival.size();
    const auto count = static_cast<std::size_t>(std::ceil(0.25 * static_cast<double>(n)));
    double late = 0.0;
    for (std::size_t i = n - count; i < n; ++i) late += unitary.survival[i];
    CHECK(points[0].mean_survival == doctest::Approx(late / count).epsilon(1e-12));
    CHECK(points[0].sem_survival == doctest::Approx(0.0));

    // Thread count never changes the result.
    opts.jobs = 4;
    auto threaded = zeno_freezing_sweep(templ, {0.0, 1.0}, opts);
    CHECK(threaded[0].mean_entropy == points[0].mean_entropy);
    CHECK(threaded[1].mean_survival == points[1].mean_survival);

    // Frequent measurement freezes a z-basis product state.
    templ.dt = 1e-3;
    auto frozen = zeno_freezing_sweep(templ, {1.0}, opts);
    CHECK(frozen[0].mean_survival > 0.99);
    CHECK(unitary.survival.back() < 0.9);
}

TEST_CASE("qze_decoherence_ratio examples") {
    std::vector<double> flat(100, 0.4);
    CHECK(qze_decoherence_ratio(flat, 0.1, 10).value == doctest::Approx(0.0));

    std::vector<double> saw(100);
    for (std::size_t i = 0; i < saw.size(); ++i) saw[i] = 0.3 + 0.1 * static_cast<double>(i % 4);
    saw.back() = saw.front();
    CHECK(qze_decoherence_ratio(saw, 0.1, 10).value > 1e3);

    std::vector<double> ramp(100);
    for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 0.01 * static_cast<double>(i);
    CHECK(qze_decoherence_ratio(ramp, 0.1, 10).value < 1.0);

    CHECK_THROWS(qze_decoherence_ratio(std::vector<double>(15, 0.0), 0.1, 10));
}

TEST_CASE("evolution_measures examples") {
    std::vector<StateVector> stationary(20, ket_plus());
    auto m = evolution_measures(stationary);
    CHECK(m.pairwise_avg == doctest::Approx(0.0));
    CHECK(m.double_integral == doctest::Approx(0.0));

    auto two = evolution_measures({ket0(), StateVector::basis(SubsystemLayout::qubits(1), 1)});
    CHECK(two.pairwise_avg == doctest::Approx(1.0));

    // Rabi cycle over one period of |<psi(t)|psi(s)>|^2 = cos^2((t - s)/2):
    // the uniform double average of the overlap is 1/2.
    std::vector<StateVector> cycle;
    const int samples = 801;
    for (int i = 0; i < samples; ++i) {
        const double t = 2.0 * M_PI * i / (samples - 1);
        cycle.emplace_back(propagator(rabi(), t) * ket0().amplitudes(), SubsystemLayout::qubits(1));
    }
    CHECK(evolution_measures(cycle).double_integral == doctest::Approx(0.5).epsilon(1e-6));
}
