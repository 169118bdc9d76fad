// entanglement.hpp
// Mixed-basis hybrid entangled states, CHSH evaluation and optimization, and
// the combinatorics of isotope-labeled entanglement patterns.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "caslab/core.hpp"

namespace caslab {

// Every degree of freedom is truncated to a qubit (two modes).
enum class MixedBasisKind {
    position_spin,
    position_polarization,
    spin_polarization,
    momentum_spin,
    momentum_polarization,
};

inline constexpr std::array<MixedBasisKind, 5> kAllMixedBasisKinds{
    MixedBasisKind::position_spin,         MixedBasisKind::position_polarization, MixedBasisKind::spin_polarization,
    MixedBasisKind::momentum_spin,         MixedBasisKind::momentum_polarization,
};

std::string to_string(MixedBasisKind kind);
MixedBasisKind mixed_basis_from_string(const std::string& name);

// The three basis pairs that the pair relations are built from.
inline constexpr std::array<MixedBasisKind, 3> kRelationBases{
    MixedBasisKind::position_spin, MixedBasisKind::position_polarization, MixedBasisKind::spin_polarization};

// none | single(b) | double(first, second), first != second | triple.
// Doubles are ordered pairs of distinct basis pairs, giving 3 * 2 = 6 of them.
struct PairRelation {
    enum class Tag { none, single, double_pair, triple };
    Tag tag = Tag::none;
    int first = -1;   // index into kRelationBases
    int second = -1;  // double only

    int code() const;  // canonical index in [0, 11)
    static PairRelation from_code(int code);
    std::string name() const;
    bool operator==(const PairRelation&) const = default;
};

std::vector<PairRelation> enumerate_pair_relations();

using BigInt = boost::multiprecision::cpp_int;

BigInt pattern_space_size(unsigned n_pairs = 45);
std::uint64_t pair_count(unsigned n_labels = 10);

struct LabeledAtom {
    std::string label;  // isotope label from the palette
    int position = 0;   // residue index in the peptide
    bool operator==(const LabeledAtom&) const = default;
};

// Two non-natural labels each for C, N, O and four for S: ten detectable signals.
const std::vector<std::string>& isotope_palette();

struct EntanglementPattern {
    std::vector<LabeledAtom> atoms;  // 10 slots
    // Canonical lexicographic pair order: (0,1), (0,2), ..., (8,9).
    std::vector<PairRelation> relations;

    void validate() const;
    const PairRelation& relation(std::size_t i, std::size_t j) const;
    bool operator==(const EntanglementPattern&) const = default;
};

// Index of the unordered pair (i, j), i != j, in canonical order.
std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n_atoms = 10);

EntanglementPattern sample_pattern(int peptide_length, std::uint64_t seed);

nlohmann::json to_json(const EntanglementPattern& pattern);
EntanglementPattern pattern_from_json(const nlohmann::json& doc);

struct HybridState {
    MixedBasisKind kind;
    StateVector state;  // 2 (x) 2, dof A first
};

enum class HybridForm { bell_phi_plus, product, custom };

// custom takes four amplitudes (|00>, |01>, |10>, |11>).
HybridState build_hybrid_state(MixedBasisKind kind, HybridForm form, const std::vector<cplx>& amplitudes = {});

struct ChshSettings {
    double a = 0.0;
    double a_prime = 0.0;
    double b = 0.0;
    double b_prime = 0.0;
};

// E(x, y) for dichotomic observables cos(t) Z + sin(t) X on each side.
double correlator(const StateVector& state, double angle_a, double angle_b);

// S = E(a,b) + E(a,b') + E(a',b) - E(a',b').
double chsh_value(const HybridState& state, const ChshSettings& settings);
double chsh_value(const StateVector& state, const ChshSettings& settings);

struct ChshOptimum {
    ChshSettings settings;
    double s_max = 0.0;
};

// 2-degree grid search followed by coordinate-wise local refinement.
ChshOptimum chsh_optimize(const HybridState& state);

}  // namespace caslab
