#include <doctest.h>

#include <cmath>

#include "caslab/core.hpp"

using namespace caslab;

namespace {

StateVector qubit(cplx a, cplx b) {
    Vector v(2);
    v << a, b;
    return StateVector(v, SubsystemLayout::qubits(1));
}

StateVector plus() { return qubit(1.0, 1.0); }
StateVector minus() { return qubit(1.0, -1.0); }

StateVector bell() {
    Vector v = Vector::Zero(4);
    v(0) = v(3) = 1.0;
    return StateVector(v, SubsystemLayout::qubits(2));
}

DensityMatrix diag2(double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return DensityMatrix(m, SubsystemLayout::qubits(1));
}

}  // namespace

TEST_CASE("layout strides put site 0 leftmost") {
    SubsystemLayout l({2, 3, 2});
    CHECK(l.total_dim() == 12);
    CHECK(l.stride(0) == 6);
    CHECK(l.stride(2) == 1);
    CHECK(l.digit(7, 0) == 1);
    CHECK(l.digit(7, 1) == 0);
    CHECK(l.digit(7, 2) == 1);
    CHECK_THROWS_AS(SubsystemLayout({2, 1}), std::invalid_argument);
    CHECK_THROWS_AS(SubsystemLayout(std::vector<int>{}), std::invalid_argument);
}

TEST_CASE("state construction normalizes and validates") {
    Vector v(2);
    v << 3.0, 4.0;
    StateVector s(v, SubsystemLayout::qubits(1));
    CHECK(s.amplitudes().norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(s.amplitudes()(1) - cplx(0.8)) < 1e-14);
    CHECK_THROWS(StateVector(Vector::Zero(2), SubsystemLayout::qubits(1)));
    CHECK_THROWS(StateVector(Vector::Ones(3), SubsystemLayout::qubits(1)));
}

TEST_CASE("density matrix validation") {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 0.5;
    m(1, 1) = 0.5;
    m(0, 1) = cplx(0.0, 0.1);
    CHECK_THROWS(DensityMatrix(m, SubsystemLayout::qubits(1)));  // not Hermitian
    m(1, 0) = cplx(0.0, -0.1);
    CHECK_NOTHROW(DensityMatrix(m, SubsystemLayout::qubits(1)));
    Matrix neg = Matrix::Zero(2, 2);
    neg(0, 0) = 1.5;
    neg(1, 1) = -0.5;
    CHECK_THROWS(DensityMatrix(neg, SubsystemLayout::qubits(1)));
    Matrix half = Matrix::Identity(2, 2) * 0.4;
    CHECK_THROWS(DensityMatrix(half, SubsystemLayout::qubits(1)));  // trace 0.8
}

TEST_CASE("tensor_product examples") {
    auto z = StateVector::basis(SubsystemLayout::qubits(1), 0);
    auto zz = tensor_product(z, z);
    CHECK(std::abs(zz.amplitudes()(0) - cplx(1.0)) < 1e-15);
    CHECK(zz.amplitudes().tail(3).norm() < 1e-15);

    // |+> (x) |-> by hand: (1/2)(1, -1, 1, -1)
    auto pm = tensor_product(plus(), minus());
    const double expected[4] = {0.5, -0.5, 0.5, -0.5};
    for (int i = 0; i < 4; ++i) CHECK(std::abs(pm.amplitudes()(i) - cplx(expected[i])) < 1e-15);

    auto mm = tensor_product(DensityMatrix::maximally_mixed(SubsystemLayout::qubits(1)),
                             DensityMatrix::maximally_mixed(SubsystemLayout::qubits(1)));
    CHECK((mm.matrix() - Matrix::Identity(4, 4) * 0.25).norm() < 1e-15);
    CHECK(mm.layout() == SubsystemLayout::qubits(2));
}

TEST_CASE("partial_trace examples") {
    auto bell_rho = DensityMatrix::pure(bell());
    auto r0 = partial_trace(bell_rho, {0});
    CHECK((r0.matrix() - Matrix::Identity(2, 2) * 0.5).norm() < 1e-15);

    auto prod = tensor_product(StateVector::basis(SubsystemLayout::qubits(1), 0), plus());
    auto r1 = reduced_density(prod, {1});
    Matrix plus_proj = plus().amplitudes() * plus().amplitudes().adjoint();
    CHECK((r1.matrix() - plus_proj).norm() < 1e-15);

    Vector ghz = Vector::Zero(8);
    ghz(0) = ghz(7) = 1.0;
    auto g = DensityMatrix::pure(StateVector(ghz, SubsystemLayout::qubits(3)));
    auto r01 = partial_trace(g, {0, 1});
    Matrix expected = Matrix::Zero(4, 4);
    expected(0, 0) = expected(3, 3) = 0.5;
    CHECK((r01.matrix() - expected).norm() < 1e-15);

    CHECK_THROWS_AS(partial_trace(g, {}), std::invalid_argument);
    CHECK_THROWS_AS(partial_trace(g, {3}), std::out_of_range);
}

TEST_CASE("partial_trace of mixed-dimension product recovers factors") {
    for (unsigned long long seed = 1; seed <= 10; ++seed) {
        auto a = random_density(SubsystemLayout({3}), 2, seed);
        auto b = random_density(SubsystemLayout({2, 2}), 3, seed + 100);
        auto ab = tensor_product(a, b);
        CHECK((partial_trace(ab, {0}).matrix() - a.matrix()).norm() < 1e-12);
        CHECK((partial_trace(ab, {1, 2}).matrix() - b.matrix()).norm() < 1e-12);
        // Trace preservation of the product.
        CHECK(std::abs(ab.matrix().trace() - cplx(1.0)) < 1e-12);
    }
}

TEST_CASE("tensor_product preserves norms") {
    Vector a(2), b(3);
    a << 1.0, cplx(0.0, 2.0);
    b << 0.5, -1.0, cplx(1.0, 1.0);
    // StateVector normalizes, so the product of unit norms must be a unit norm
    // and agree with the raw Kronecker product divided by ||a|| ||b||.
    auto ab = tensor_product(StateVector(a, SubsystemLayout({2})), StateVector(b, SubsystemLayout({3})));
    CHECK(ab.amplitudes().norm() == doctest::Approx(1.0).epsilon(1e-14));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(std::abs(ab.amplitudes()(3 * i + j) - a(i) * b(j) / (a.norm() * b.norm())) < 1e-15);
}

TEST_CASE("von_neumann_entropy examples") {
    CHECK(von_neumann_entropy(DensityMatrix::pure(plus())) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(von_neumann_entropy(DensityMatrix::maximally_mixed(SubsystemLayout::qubits(1))) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
    const double oracle = -0.75 * std::log(0.75) - 0.25 * std::log(0.25);
    CHECK(std::abs(von_neumann_entropy(diag2(0.75, 0.25)) - oracle) < 1e-12);
    CHECK(std::abs(oracle - 0.562335) < 1e-6);
}

TEST_CASE("entropy range property") {
    for (unsigned long long seed = 0; seed < 50; ++seed) {
        const std::size_t n = 1 + seed % 3;
        auto layout = SubsystemLayout::qubits(static_cast<int>(n));
        auto rho = random_density(layout, 1 + seed % layout.total_dim(), seed);
        const double s = von_neumann_entropy(rho);
        CHECK(s >= -1e-9);
        CHECK(s <= std::log(static_cast<double>(layout.total_dim())) + 1e-9);
    }
}

TEST_CASE("relative_entropy examples") {
    auto rho = random_density(SubsystemLayout::qubits(2), 4, 7);
    CHECK(std::abs(relative_entropy(rho, rho).value) < 1e-10);

    for (int n = 1; n <= 4; ++n) {
        auto layout = SubsystemLayout::qubits(n);
        auto r = relative_entropy(DensityMatrix::pure(StateVector::basis(layout, 0)),
                                  DensityMatrix::maximally_mixed(layout));
        CHECK(!r.divergent);
        CHECK(std::abs(r.value - std::log(static_cast<double>(layout.total_dim()))) < 1e-10);
    }

    // diag(0.75, 0.25) against I/2: sum p ln(p / 0.5).
    const double oracle = 0.75 * std::log(0.75 / 0.5) + 0.25 * std::log(0.25 / 0.5);
    auto r = relative_entropy(diag2(0.75, 0.25), DensityMatrix::maximally_mixed(SubsystemLayout::qubits(1)));
    CHECK(std::abs(r.value - oracle) < 1e-12);
    CHECK(std::abs(oracle - 0.130812) < 1e-6);
}

TEST_CASE("relative_entropy support violation is flagged, not thrown") {
    auto zero = DensityMatrix::pure(StateVector::basis(SubsystemLayout::qubits(1), 0));
    auto mixed = DensityMatrix::maximally_mixed(SubsystemLayout::qubits(1));
    auto r = relative_entropy(mixed, zero);
    CHECK(r.divergent);
    CHECK(std::isinf(r.value));
    CHECK(!relative_entropy(zero, mixed).divergent);
}

TEST_CASE("relative_entropy Klein inequality and unitary invariance") {
    for (unsigned long long seed = 0; seed < 100; ++seed) {
        const int n = 1 + static_cast<int>(seed % 4);
        auto layout = SubsystemLayout::qubits(n);
        const std::size_t d = layout.total_dim();
        auto rho = random_density(layout, 1 + seed % d, 2 * seed);
        auto sigma = random_density(layout, d, 2 * seed + 1);
        auto r = relative_entropy(rho, sigma);
        REQUIRE(!r.divergent);
        CHECK(r.value >= -1e-10);

        Matrix u = random_unitary(d, seed + 999);
        auto ur = DensityMatrix::renormalized(u * rho.matrix() * u.adjoint(), layout);
        auto us = DensityMatrix::renormalized(u * sigma.matrix() * u.adjoint(), layout);
        CHECK(std::abs(relative_entropy(ur, us).value - r.value) < 1e-9);
    }
}

TEST_CASE("overlap examples") {
    auto z0 = StateVector::basis(SubsystemLayout::qubits(1), 0);
    auto z1 = StateVector::basis(SubsystemLayout::qubits(1), 1);
    CHECK(overlap(z0, z1) == doctest::Approx(0.0));
    auto psi = random_state(SubsystemLayout::qubits(3), 4);
    StateVector phased(psi.amplitudes() * std::polar(1.0, 0.7), psi.layout());
    CHECK(overlap(psi, phased) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(overlap(z0, plus()) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("entanglement_entropy agrees with reduced density") {
    CHECK(entanglement_entropy(bell(), 1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    for (unsigned long long seed = 0; seed < 10; ++seed) {
        auto psi = random_state(SubsystemLayout::qubits(4), seed);
        const double a = entanglement_entropy(psi, 2);
        const double b = von_neumann_entropy(reduced_density(psi, {0, 1}));
        const double c = von_neumann_entropy(reduced_density(psi, {2, 3}));
        CHECK(std::abs(a - b) < 1e-10);
        CHECK(std::abs(a - c) < 1e-10);
    }
}

TEST_CASE("random_unitary is unitary and seeded") {
    Matrix u = random_unitary(5, 3);
    CHECK((u.adjoint() * u - Matrix::Identity(5, 5)).norm() < 1e-12);
    CHECK((random_unitary(5, 3) - u).norm() == 0.0);
    CHECK((random_unitary(5, 4) - u).norm() > 0.1);
}
