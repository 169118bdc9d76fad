#include <doctest.h>

#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

#include "caslab/hamiltonians.hpp"
#include "caslab/measurement.hpp"

using namespace caslab;

namespace {

StateVector qubit(cplx a, cplx b) {
    Vector v(2);
    v << a, b;
    return StateVector(v, SubsystemLayout::qubits(1));
}

const StateVector ket0 = qubit(1.0, 0.0);
const StateVector ket1 = qubit(0.0, 1.0);
const StateVector ket_plus = qubit(1.0, 1.0);

StateVector anomalous_final() { return qubit(std::cos(0.6), -std::sin(0.6)); }

// Random 3-outcome Kraus set: blocks of a random isometry V (3d x d),
// so sum M^dagger M = V^dagger V = I.
KrausSet random_kraus(std::size_t d, unsigned long long seed) {
    Matrix u = random_unitary(3 * d, seed);
    Matrix v = u.leftCols(static_cast<Eigen::Index>(d));
    std::vector<Matrix> ops;
    for (Eigen::Index k = 0; k < 3; ++k) ops.push_back(v.middleRows(k * d, d));
    return KrausSet(ops);
}

double binomial_3sigma(double p, int n) { return 3.0 * std::sqrt(p * (1 - p) / n); }

}  // namespace

TEST_CASE("KrausSet validation and labels") {
    auto z = KrausSet::computational(2);
    CHECK(z.labels() == std::vector<std::string>{"0", "1"});
    CHECK(z.index_of("1") == 1);
    CHECK_THROWS_AS(z.index_of("2"), std::out_of_range);
    std::vector<Matrix> incomplete{Matrix::Identity(2, 2) * 0.5};
    CHECK_THROWS_AS(KrausSet{incomplete}, std::invalid_argument);
    CHECK(KrausSet::identity(4).labels().front() == "none");
}

TEST_CASE("born_probability examples") {
    auto z = KrausSet::computational(2);
    CHECK(born_probability(ket0, z, 0) == doctest::Approx(1.0));
    CHECK(born_probability(ket0, z, 1) == doctest::Approx(0.0));
    CHECK(born_probability(ket_plus, z, "0") == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(born_probability(ket_plus, z, "1") == doctest::Approx(0.5).epsilon(1e-14));

    for (unsigned long long seed = 0; seed < 20; ++seed) {
        auto k = random_kraus(3, seed);
        auto psi = random_state(SubsystemLayout({3}), seed + 50);
        double total = 0.0;
        for (std::size_t m = 0; m < k.size(); ++m) total += born_probability(psi, k, m);
        CHECK(std::abs(total - 1.0) < 1e-10);

        auto povm = PovmSet::from_kraus(k);
        double povm_total = 0.0;
        for (std::size_t m = 0; m < 3; ++m) {
            povm_total += born_probability(psi, povm, m);
            CHECK(std::abs(born_probability(psi, povm, m) - born_probability(psi, k, m)) < 1e-12);
        }
        CHECK(std::abs(povm_total - 1.0) < 1e-10);
    }
}

TEST_CASE("PovmSet validation") {
    Matrix half = Matrix::Identity(2, 2) * 0.5;
    CHECK_NOTHROW(PovmSet({half, half}));
    Matrix neg = Matrix::Zero(2, 2);
    neg(0, 0) = 1.5;
    neg(1, 1) = 1.0;
    Matrix rest = Matrix::Identity(2, 2) - neg;
    CHECK_THROWS(PovmSet({neg, rest}));
    CHECK_THROWS(PovmSet({half}));
}

TEST_CASE("apply_measurement statistics and repeatability") {
    auto z = KrausSet::computational(2);
    Rng rng(12345);
    const int n = 10000;
    int zeros = 0;
    for (int i = 0; i < n; ++i) zeros += apply_measurement(ket_plus, z, rng).outcome == 0;
    CHECK(std::abs(zeros / double(n) - 0.5) < binomial_3sigma(0.5, n));

    for (unsigned long long seed = 0; seed < 20; ++seed) {
        Rng r(seed);
        auto psi = random_state(SubsystemLayout::qubits(2), seed);
        auto first = apply_measurement(psi, KrausSet::computational(4), r);
        auto second = apply_measurement(first.state, KrausSet::computational(4), r);
        CHECK(first.outcome == second.outcome);
        CHECK((first.state.amplitudes() - second.state.amplitudes()).norm() < 1e-12);
    }

    Rng r(1);
    auto eig = apply_measurement(ket1, z, r);
    CHECK(eig.outcome == 1);
    CHECK((eig.state.amplitudes() - ket1.amplitudes()).norm() < 1e-15);
}

TEST_CASE("density_update examples") {
    auto mixed = DensityMatrix::maximally_mixed(SubsystemLayout::qubits(1));
    auto up = density_update(mixed, KrausSet::computational(2), 0);
    CHECK(up.probability == doctest::Approx(0.5));
    REQUIRE(up.state);
    Matrix proj0 = Matrix::Zero(2, 2);
    proj0(0, 0) = 1.0;
    CHECK((up.state->matrix() - proj0).norm() < 1e-14);

    auto rho = random_density(SubsystemLayout::qubits(2), 3, 5);
    auto same = density_update(rho, KrausSet::identity(4), 0);
    CHECK(same.probability == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((same.state->matrix() - rho.matrix()).norm() < 1e-12);

    auto pure0 = DensityMatrix::pure(ket0);
    auto impossible = density_update(pure0, KrausSet::computational(2), 1);
    CHECK(impossible.flagged);
    CHECK(!impossible.state);
}

TEST_CASE("build_site_kraus examples") {
    SiteMeasurementConfig cfg;
    Rng rng(3);
    cfg.p_site = 0.0;
    auto none = build_site_kraus(SubsystemLayout::qubits(3), cfg, rng);
    CHECK(none.kraus.size() == 1);
    CHECK((none.kraus.operators()[0] - Matrix::Identity(8, 8)).norm() == 0.0);

    cfg.p_site = 1.0;
    auto full = build_site_kraus(SubsystemLayout::qubits(2), cfg, rng);
    REQUIRE(full.kraus.size() == 4);
    for (int k = 0; k < 4; ++k) {
        Matrix expected = Matrix::Zero(4, 4);
        expected(k, k) = 1.0;
        CHECK((full.kraus.operators()[k] - expected).norm() < 1e-15);
    }
    CHECK(full.kraus.labels()[1] == "s0=0,s1=1");

    cfg.p_site = 0.5;
    for (unsigned long long seed = 0; seed < 100; ++seed) {
        Rng a(seed), b(seed);
        auto ka = build_site_kraus(SubsystemLayout::qubits(3), cfg, a);
        auto kb = build_site_kraus(SubsystemLayout::qubits(3), cfg, b);
        CHECK(ka.measured_sites == kb.measured_sites);
        Matrix sum = Matrix::Zero(8, 8);
        for (const auto& m : ka.kraus.operators()) sum += m.adjoint() * m;
        CHECK((sum - Matrix::Identity(8, 8)).norm() < 1e-10);
    }
}

TEST_CASE("coupling rule p proportional to N") {
    SiteMeasurementConfig cfg;
    cfg.coupling_rule = CouplingRule::proportional_to_n;
    cfg.rate_constant = 0.05;
    CHECK(cfg.effective_p(4) == doctest::Approx(0.2));
    CHECK(cfg.effective_p(40) == doctest::Approx(1.0));
    cfg.rate_constant = -1.0;
    CHECK_THROWS(cfg.validate());
}

TEST_CASE("measure_site matches the Kraus element in distribution") {
    auto psi = random_state(SubsystemLayout::qubits(3), 77);
    Matrix hadamard(2, 2);
    hadamard << 1, 1, 1, -1;
    hadamard /= std::sqrt(2.0);
    // P(site 1 = r) in the Hadamard basis from the full projector.
    Matrix proj = hadamard.col(0) * hadamard.col(0).adjoint();
    Matrix full = Eigen::kroneckerProduct(Matrix::Identity(2, 2), Eigen::kroneckerProduct(proj, Matrix::Identity(2, 2)));
    const double p0 = (psi.amplitudes().adjoint() * full * psi.amplitudes())(0).real();
    Rng rng(8);
    const int n = 20000;
    int zeros = 0;
    for (int i = 0; i < n; ++i) {
        Vector amps = psi.amplitudes();
        auto out = measure_site(amps, psi.layout(), 1, hadamard, rng);
        CHECK(out.site == 1);
        if (out.result == 0) {
            ++zeros;
            Vector expected = full * psi.amplitudes();
            expected.normalize();
            CHECK((amps - expected).norm() < 1e-12);
        }
    }
    CHECK(std::abs(zeros / double(n) - p0) < binomial_3sigma(p0, n));
}

TEST_CASE("weak_measure examples") {
    WeakMeasurementSetup setup{pauli::z(), 0.0, 1.0, {}};
    auto flat = weak_measure(ket_plus, setup);
    CHECK(std::abs(flat.mean_shift) < 1e-12);
    // Initial pointer density is Gaussian with standard deviation sigma.
    double mass = 0.0;
    for (std::size_t i = 0; i < flat.x.size(); ++i) {
        const double dx = flat.x[1] - flat.x[0];
        const double expected = std::exp(-flat.x[i] * flat.x[i] / 2.0) / std::sqrt(2 * M_PI) * dx;
        CHECK(std::abs(flat.probability[i] - expected) < 1e-10);
        mass += flat.probability[i];
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));

    // Large shifts push the Gaussian tail toward the periodic grid edge, so
    // the bound is a small fraction of the grid step (sigma / 32).
    for (double g : {0.3, 1.0, 1.7}) {
        setup.coupling = g;
        CHECK(std::abs(weak_measure(ket0, setup).mean_shift - g) < 1e-7);
        CHECK(std::abs(weak_measure(ket1, setup).mean_shift + g) < 1e-7);
    }

    setup = {pauli::z(), 0.1, 5.0, {}};
    auto mix = weak_measure(ket_plus, setup);
    CHECK(std::abs(mix.mean_shift) < 1e-6);
    const double dx = mix.x[1] - mix.x[0];
    for (std::size_t i = 0; i < mix.x.size(); ++i) {
        auto gauss = [&](double mu) {
            return std::exp(-(mix.x[i] - mu) * (mix.x[i] - mu) / 50.0) / std::sqrt(50.0 * M_PI);
        };
        CHECK(std::abs(mix.probability[i] - 0.5 * (gauss(0.1) + gauss(-0.1)) * dx) < 1e-10);
    }
    // x[0] = -8 sigma has no mirror image on the half-open grid.
    for (std::size_t i = 1; i < mix.x.size(); ++i) {
        CHECK(std::abs(mix.probability[i] - mix.probability[mix.x.size() - i]) < 1e-12);
    }

    setup = {pauli::z(), 3.0, 1.0, {}};
    CHECK_THROWS(weak_measure(ket0, setup));  // shift leaves the grid
}

TEST_CASE("pointer shift equals g times eigenvalue") {
    Matrix a = Matrix::Zero(3, 3);
    a.diagonal() << -1.0, 0.25, 2.0;
    for (int k = 0; k < 3; ++k) {
        auto eig = StateVector::basis(SubsystemLayout({3}), k);
        WeakMeasurementSetup setup{a, 0.4, 1.0, {}};
        CHECK(std::abs(weak_measure(eig, setup).mean_shift - 0.4 * a(k, k).real()) < 1e-9);
    }
}

TEST_CASE("weak_value examples and linearity") {
    PrePostSelection sel{ket_plus, ket0};
    CHECK(std::abs(weak_value(sel, Matrix::Identity(2, 2)).value - cplx(1.0)) < 1e-12);
    CHECK(std::abs(weak_value(sel, pauli::z()).value - cplx(1.0)) < 1e-12);

    PrePostSelection anomalous{ket_plus, anomalous_final()};
    const double oracle = (std::cos(0.6) + std::sin(0.6)) / (std::cos(0.6) - std::sin(0.6));
    auto wv = weak_value(anomalous, pauli::z());
    CHECK(std::abs(wv.value - cplx(oracle)) < 1e-10);
    CHECK(wv.value.real() > 1.0);

    PrePostSelection orth{ket0, ket1};
    auto div = weak_value(orth, pauli::x());
    CHECK(div.divergent);
    CHECK(div.magnitude_estimate > 1e6);

    for (unsigned long long seed = 0; seed < 20; ++seed) {
        auto layout = SubsystemLayout({3});
        PrePostSelection s{random_state(layout, seed), random_state(layout, seed + 100)};
        Matrix a = random_hermitian(3, seed + 200), b = random_hermitian(3, seed + 300);
        const double alpha = 0.7, beta = -1.3;
        auto lhs = weak_value(s, alpha * a + beta * b).value;
        auto rhs = alpha * weak_value(s, a).value + beta * weak_value(s, b).value;
        CHECK(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("post-selected mean shift approaches g Re(weak value)") {
    PrePostSelection sel{ket_plus, anomalous_final()};
    const double target = weak_value(sel, pauli::z()).value.real();
    const double g = 0.01;
    double previous = 1e300;
    for (double ratio : {10.0, 50.0, 250.0}) {
        WeakMeasurementSetup setup{pauli::z(), g, ratio * g, {}};
        const double err = std::abs(weak_measure_postselected(sel, setup).mean_shift - g * target);
        CHECK(err < previous);
        previous = err;
    }
    CHECK(previous < 0.01 * g * target);
}

TEST_CASE("postselection_probability examples") {
    WeakMeasurementSetup setup{pauli::z(), 0.05, 1.0, {}};
    PrePostSelection same{ket_plus, ket_plus};
    CHECK(postselection_probability(same, setup, true) == doctest::Approx(1.0));
    PrePostSelection half{ket_plus, ket0};
    CHECK(postselection_probability(half, setup, true) == doctest::Approx(0.5));
    // The eigenbasis projection does not depend on the coupling.
    CHECK(postselection_probability(half, setup, false) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(postselection_probability(same, setup, false) < 1.0);
}

TEST_CASE("weakness_check boundary is strict") {
    CHECK(weakness_check({pauli::z(), 1.0, 5.0, {}}));
    CHECK(!weakness_check({pauli::z(), 1.0, 0.1, {}}));
    CHECK(!weakness_check({pauli::z(), 1.0, 2.0, {}}));
}

TEST_CASE("decompose_weakness examples") {
    auto a = decompose_weakness(0.5 * Matrix::Identity(2, 2), 0.05);
    CHECK(std::abs(a.q - cplx(0.5)) < 1e-15);
    CHECK(a.eps_norm == doctest::Approx(0.0));
    CHECK(a.is_weak);

    auto b = decompose_weakness(0.5 * (Matrix::Identity(2, 2) + 0.01 * pauli::x()), 0.05);
    CHECK(b.eps_norm == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(b.is_weak);

    Matrix proj0 = Matrix::Zero(2, 2);
    proj0(0, 0) = 1.0;
    auto c = decompose_weakness(proj0, 0.05);
    CHECK(c.eps_norm == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(!c.is_weak);

    CHECK_THROWS_AS(decompose_weakness(pauli::z(), 0.05), std::domain_error);
}
