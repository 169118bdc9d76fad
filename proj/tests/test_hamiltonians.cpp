#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "caslab/hamiltonians.hpp"
#include "caslab/random.hpp"

using namespace caslab;

namespace {

// Heisenberg chain built element by element: ZZ is diagonal (+J aligned,
// -J anti-aligned) and XX + YY swaps an anti-aligned pair with amplitude 2J.
Matrix hand_built_xyz(int length, double coupling) {
    const int dim = 1 << length;
    Matrix h = Matrix::Zero(dim, dim);
    for (int s = 0; s < dim; ++s) {
        for (int i = 0; i + 1 < length; ++i) {
            const int bi = (s >> (length - 1 - i)) & 1;
            const int bj = (s >> (length - 2 - i)) & 1;
            h(s, s) += bi == bj ? coupling : -coupling;
            if (bi != bj) {
                const int flipped = s ^ (1 << (length - 1 - i)) ^ (1 << (length - 2 - i));
                h(flipped, s) += 2.0 * coupling;
            }
        }
    }
    return h;
}

std::vector<double> sorted_eigenvalues(const Matrix& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    return ev;
}

// Cumulative sums of sampled spacings give a synthetic spectrum.
std::vector<double> poisson_spectrum(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> e{0.0};
    for (std::size_t i = 1; i < n; ++i) e.push_back(e.back() + exponential(rng, 1.0));
    return e;
}

std::vector<double> wigner_spectrum(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> e{0.0};
    // Inverse of the surmise CDF 1 - exp(-pi s^2 / 4).
    for (std::size_t i = 1; i < n; ++i) {
        const double u = uniform01(rng);
        e.push_back(e.back() + std::sqrt(-4.0 * std::log1p(-u) / M_PI));
    }
    return e;
}

}  // namespace

TEST_CASE("build_ising examples") {
    auto h = build_ising(2, 1.0, IsingVariant::z_only);
    Matrix expected = Matrix::Zero(4, 4);
    expected.diagonal() << 1.0, -1.0, -1.0, 1.0;
    CHECK((h.matrix() - expected).norm() < 1e-15);
    CHECK(h.kind() == ModelKind::ising_z);

    CHECK(build_ising(2, 0.0, IsingVariant::xyz).matrix().norm() == 0.0);

    auto xyz = build_ising(3, 1.0, IsingVariant::xyz);
    Matrix oracle = hand_built_xyz(3, 1.0);
    CHECK((xyz.matrix() - oracle).norm() < 1e-12);
    auto a = sorted_eigenvalues(xyz.matrix());
    auto b = sorted_eigenvalues(oracle);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-10);

    CHECK_THROWS_AS(build_ising(1, 1.0, IsingVariant::z_only), std::invalid_argument);
    CHECK_THROWS_AS(build_ising(13, 1.0, IsingVariant::z_only), std::invalid_argument);
}

TEST_CASE("periodic boundary adds the wrap-around bond") {
    auto open = build_ising(4, 1.0, IsingVariant::z_only);
    auto ring = build_ising(4, 1.0, IsingVariant::z_only, 0.0, Boundary::periodic);
    Matrix wrap = site_operator(4, 3, pauli::z()) * site_operator(4, 0, pauli::z());
    CHECK((ring.matrix() - open.matrix() - wrap).norm() < 1e-12);
}

TEST_CASE("built Hamiltonians are Hermitian") {
    for (int l = 2; l <= 6; ++l) {
        for (auto v : {IsingVariant::z_only, IsingVariant::xyz}) {
            auto h = build_ising(l, 0.7, v, 0.3);
            CHECK((h.matrix() - h.matrix().adjoint()).norm() < 1e-12);
        }
        auto nk = build_nk_spin_glass(l, l / 2, 5);
        CHECK((nk.matrix() - nk.matrix().adjoint()).norm() < 1e-12);
    }
    Matrix bad = Matrix::Zero(4, 4);
    bad(0, 1) = 1.0;
    CHECK_THROWS(custom_hamiltonian(bad));
}

TEST_CASE("NK spin glass examples") {
    NkOptions no_field{0.0, 1.0};
    auto h = build_nk_spin_glass(4, 0, 11, no_field);
    Matrix off = h.matrix();
    off.diagonal().setZero();
    CHECK(off.norm() == 0.0);
    // K = 0: energy is a sum of independent per-site values, so
    // E(s) + E(s with all bits flipped) is the same for every s.
    const auto& d = h.matrix().diagonal();
    const double pair_sum = d(0).real() + d(15).real();
    for (int s = 0; s < 16; ++s) CHECK(std::abs(d(s).real() + d(15 - s).real() - pair_sum) < 1e-12);

    auto a = build_nk_spin_glass(6, 2, 42);
    auto b = build_nk_spin_glass(6, 2, 42);
    CHECK((a.matrix() - b.matrix()).norm() == 0.0);
    CHECK((a.matrix() - build_nk_spin_glass(6, 2, 43).matrix()).norm() > 0.0);
    CHECK_THROWS_AS(build_nk_spin_glass(4, 4, 1), std::invalid_argument);

    auto stats = level_spacing_stats(build_nk_spin_glass(8, 3, 2024));
    MESSAGE("NK N=8 K=3 h=1 brody_q = " << stats.brody_q);
    CHECK(stats.brody_q > 0.7);
    CHECK(stats.regime == SpectralRegime::chaotic);
}

TEST_CASE("propagator examples and group property") {
    auto h = build_ising(3, 1.0, IsingVariant::xyz, 0.4);
    CHECK((propagator(h, 0.0) - Matrix::Identity(8, 8)).norm() < 1e-12);

    Matrix u = propagator(pauli::z(), M_PI / 2);
    CHECK(std::abs(u(0, 0) - std::polar(1.0, -M_PI / 2)) < 1e-12);
    CHECK(std::abs(u(1, 1) - std::polar(1.0, M_PI / 2)) < 1e-12);
    CHECK(std::abs(u(0, 1)) < 1e-12);

    for (double t1 : {0.1, 0.7, 2.3}) {
        for (double t2 : {-0.4, 1.1}) {
            CHECK((propagator(h, t1) * propagator(h, t2) - propagator(h, t1 + t2)).norm() < 1e-8);
        }
    }
    Matrix big = propagator(h, 5.0);
    CHECK((big.adjoint() * big - Matrix::Identity(8, 8)).norm() < 1e-10);
    CHECK_THROWS(propagator(h, std::nan("")));
}

TEST_CASE("Brody density is normalized with unit mean") {
    for (double q : {0.0, 0.3, 0.7, 1.0}) {
        double norm = 0.0, mean = 0.0;
        const double ds = 1e-4;
        for (double s = ds / 2; s < 12.0; s += ds) {
            norm += brody_density(s, q) * ds;
            mean += s * brody_density(s, q) * ds;
        }
        CHECK(norm == doctest::Approx(1.0).epsilon(1e-4));
        CHECK(mean == doctest::Approx(1.0).epsilon(1e-4));
    }
    CHECK(brody_a(1.0) == doctest::Approx(M_PI / 4).epsilon(1e-12));
    CHECK(brody_a(0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("level spacing regimes on synthetic spectra") {
    auto poisson = level_spacing_stats(poisson_spectrum(2000, 1));
    CHECK(poisson.brody_q < 0.15);
    CHECK(poisson.regime == SpectralRegime::ordered);

    auto wigner = level_spacing_stats(wigner_spectrum(2000, 2));
    CHECK(wigner.brody_q > 0.85);
    CHECK(wigner.regime == SpectralRegime::chaotic);

    std::vector<double> ladder;
    for (int i = 0; i < 100; ++i) ladder.push_back(0.5 + i);
    auto fence = level_spacing_stats(ladder);
    CHECK(!fence.fit_accepted);
    for (double s : fence.spacings) CHECK(s == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::any_of(fence.warnings.begin(), fence.warnings.end(),
                      [](const std::string& w) { return w.find("picket fence") != std::string::npos; }));

    CHECK_THROWS_AS(level_spacing_stats(std::vector<double>(10, 1.0)), std::invalid_argument);
    auto small = level_spacing_stats(std::vector<double>{0.0, 1.0, 3.0, 3.5});
    CHECK(!small.warnings.empty());
}

TEST_CASE("synthetic_spectrum matches the reference samplers") {
    CHECK(synthetic_spectrum(SyntheticEnsemble::poisson, 300, 4) == poisson_spectrum(300, 4));
    CHECK(synthetic_spectrum(SyntheticEnsemble::wigner, 300, 4) == wigner_spectrum(300, 4));
    CHECK_THROWS(synthetic_spectrum(SyntheticEnsemble::wigner, 1, 4));
}

TEST_CASE("level spacing is invariant under affine spectrum maps") {
    for (auto spectrum : {poisson_spectrum(500, 9), wigner_spectrum(500, 10)}) {
        const double q0 = level_spacing_stats(spectrum).brody_q;
        for (auto [a, b] : {std::pair{3.0, -7.0}, std::pair{0.01, 100.0}, std::pair{-2.0, 0.5}}) {
            std::vector<double> mapped;
            for (double e : spectrum) mapped.push_back(a * e + b);
            CHECK(std::abs(level_spacing_stats(mapped).brody_q - q0) < 0.05);
        }
    }
}

TEST_CASE("Ising with small field is less chaotic than NK at K = N/2") {
    const int n = 8;
    auto ising = level_spacing_stats(build_ising(n, 1.0, IsingVariant::z_only, 0.1));
    auto nk = level_spacing_stats(build_nk_spin_glass(n, n / 2, 7));
    MESSAGE("ising q = " << ising.brody_q << ", nk q = " << nk.brody_q);
    CHECK(ising.brody_q < nk.brody_q);
}

TEST_CASE("PT-symmetric dimer spectrum check") {
    auto herm = NonHermitianHamiltonian(build_ising(2, 1.0, IsingVariant::xyz, 0.5).matrix());
    CHECK(pt_spectrum_check(herm).all_real);

    auto real_phase = pt_spectrum_check(pt_symmetric_dimer(1.0, 2.0, M_PI / 4));
    CHECK(real_phase.all_real);
    CHECK(real_phase.max_imag < 1e-9);

    auto broken = pt_spectrum_check(pt_symmetric_dimer(1.0, 0.5, M_PI / 2));
    CHECK(!broken.all_real);
    CHECK(broken.max_imag == doctest::Approx(std::sqrt(0.75)).epsilon(1e-10));
    CHECK_THROWS(NonHermitianHamiltonian(Matrix::Zero(1, 1)));
}
