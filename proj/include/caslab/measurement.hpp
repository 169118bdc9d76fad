// measurement.hpp
// Projective, Kraus/POVM, per-site and weak measurements, including pre- and
// post-selected (two-state) weak values.
//
// Outcome probabilities use p(m) = <psi| M_m^dagger M_m |psi>.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "caslab/core.hpp"
#include "caslab/random.hpp"

namespace caslab {

class KrausSet {
public:
    // Throws unless sum_m M_m^dagger M_m = I within 1e-10. Labels default to
    // "0", "1", ...
    explicit KrausSet(std::vector<Matrix> operators, std::vector<std::string> labels = {});

    // Projectors onto the columns of an orthonormal basis (default computational).
    static KrausSet projective(const Matrix& basis);
    static KrausSet computational(std::size_t dim);
    static KrausSet identity(std::size_t dim);

    const std::vector<Matrix>& operators() const { return ops_; }
    const std::vector<std::string>& labels() const { return labels_; }
    std::size_t size() const { return ops_.size(); }
    std::size_t dim() const { return static_cast<std::size_t>(ops_.front().rows()); }
    std::size_t index_of(const std::string& label) const;  // throws std::out_of_range

private:
    std::vector<Matrix> ops_;
    std::vector<std::string> labels_;
};

class PovmSet {
public:
    // Each effect PSD within 1e-8; effects sum to I within 1e-10.
    explicit PovmSet(std::vector<Matrix> effects);
    static PovmSet from_kraus(const KrausSet& kraus);

    const std::vector<Matrix>& effects() const { return effects_; }

private:
    std::vector<Matrix> effects_;
};

double born_probability(const StateVector& psi, const KrausSet& kraus, std::size_t outcome);
double born_probability(const StateVector& psi, const KrausSet& kraus, const std::string& label);
double born_probability(const StateVector& psi, const PovmSet& povm, std::size_t outcome);

struct MeasurementResult {
    std::size_t outcome;
    StateVector state;
};

// Samples an outcome by Born probabilities and returns M_m|psi> renormalized.
// Throws std::runtime_error when every probability is below 1e-14.
MeasurementResult apply_measurement(const StateVector& psi, const KrausSet& kraus, Rng& rng);

struct DensityUpdate {
    double probability = 0.0;
    std::optional<DensityMatrix> state;  // empty when probability < 1e-14
    bool flagged = false;
};

// (tr(M rho M^dagger), M rho M^dagger / tr(...)) for outcome m.
DensityUpdate density_update(const DensityMatrix& rho, const KrausSet& kraus, std::size_t outcome);

enum class CouplingRule { fixed_p, proportional_to_n };

struct SiteMeasurementConfig {
    double p_site = 0.0;
    // Columns are the single-site measurement basis; empty means sigma^z.
    Matrix basis;
    CouplingRule coupling_rule = CouplingRule::fixed_p;
    double rate_constant = 0.0;  // c, used with proportional_to_n

    void validate() const;
    double effective_p(std::size_t n_sites) const;  // min(1, c N) or p_site
    Matrix site_basis() const;
};

struct SiteKraus {
    KrausSet kraus;
    std::vector<std::size_t> measured_sites;
};

// Each qubit site is measured with probability effective_p; the returned set
// is the tensor product over sites of (basis projectors | identity), one
// operator per joint outcome of the measured subset.
SiteKraus build_site_kraus(const SubsystemLayout& layout, const SiteMeasurementConfig& config, Rng& rng);

struct SiteOutcome {
    std::size_t site;
    int result;
};

// Projective measurement of a single qubit site in `basis` (columns), applied
// directly to the amplitudes. Equivalent in distribution to the matching
// element of build_site_kraus, without materializing full-size operators.
SiteOutcome measure_site(Vector& amplitudes, const SubsystemLayout& layout, std::size_t site, const Matrix& basis,
                         Rng& rng);

struct PointerGrid {
    std::size_t points = 512;
    double extent_sigmas = 8.0;  // grid covers [-extent*sigma, extent*sigma)
};

struct WeakMeasurementSetup {
    Matrix observable;      // A, Hermitian
    double coupling = 0.0;  // g, integrated impulse strength
    double pointer_sigma = 1.0;
    PointerGrid grid;

    void validate() const;
};

struct PointerDistribution {
    std::vector<double> x;
    std::vector<double> probability;  // per grid cell, sums to 1
    double mean_shift = 0.0;
    // Probability of the post-selection (1 for unselected runs).
    double postselection_probability = 1.0;
};

// Evolves |psi> (x) |pointer> under exp(-i g A (x) P) and returns the pointer
// position marginal after tracing out the system.
PointerDistribution weak_measure(const StateVector& psi, const WeakMeasurementSetup& setup);

struct PrePostSelection {
    StateVector initial;
    StateVector final;
};

// Pointer distribution conditioned on a successful post-selection onto
// `final` after the coupling.
PointerDistribution weak_measure_postselected(const PrePostSelection& sel, const WeakMeasurementSetup& setup);

struct WeakValue {
    cplx value{0.0, 0.0};
    bool divergent = false;
    double magnitude_estimate = 0.0;  // |<f|A|i>| / |<f|i>| when divergent
};

WeakValue weak_value(const PrePostSelection& sel, const Matrix& observable);

// first_order: |<f|i>|^2. Otherwise the exact probability of the coupled
// evolution followed by projection onto |f> (pointer traced out).
double postselection_probability(const PrePostSelection& sel, const WeakMeasurementSetup& setup, bool first_order);

// True iff sigma > |g| * (lambda_max - lambda_min) of A (strict).
bool weakness_check(const WeakMeasurementSetup& setup);

struct WeaknessDecomposition {
    cplx q{0.0, 0.0};
    double eps_norm = 0.0;
    bool is_weak = false;
};

// op = q (I + eps) with q = tr(op)/dim. Throws std::domain_error when
// q <= 0 (not decomposable in this form).
WeaknessDecomposition decompose_weakness(const Matrix& op, double tol);

}  // namespace caslab
