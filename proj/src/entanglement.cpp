#include "caslab/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "caslab/random.hpp"

namespace caslab {

std::string to_string(MixedBasisKind kind) {
    switch (kind) {
        case MixedBasisKind::position_spin: return "position_spin";
        case MixedBasisKind::position_polarization: return "position_polarization";
        case MixedBasisKind::spin_polarization: return "spin_polarization";
        case MixedBasisKind::momentum_spin: return "momentum_spin";
        case MixedBasisKind::momentum_polarization: return "momentum_polarization";
    }
    return "position_spin";
}

MixedBasisKind mixed_basis_from_string(const std::string& name) {
    for (auto k : kAllMixedBasisKinds) {
        if (to_string(k) == name) return k;
    }
    throw std::invalid_argument("unknown mixed-basis kind '" + name + "'");
}

int PairRelation::code() const {
    switch (tag) {
        case Tag::none: return 0;
        case Tag::single: return 1 + first;
        case Tag::double_pair: return 4 + first * 2 + (second > first ? second - 1 : second);
        case Tag::triple: return 10;
    }
    return 0;
}

PairRelation PairRelation::from_code(int code) {
    if (code < 0 || code > 10) throw std::out_of_range("PairRelation: code outside [0, 11)");
    if (code == 0) return {};
    if (code <= 3) return {Tag::single, code - 1, -1};
    if (code == 10) return {Tag::triple, -1, -1};
    const int k = code - 4;
    const int first = k / 2;
    int second = k % 2;
    if (second >= first) ++second;
    return {Tag::double_pair, first, second};
}

std::string PairRelation::name() const {
    auto basis = [](int i) { return to_string(kRelationBases[static_cast<std::size_t>(i)]); };
    switch (tag) {
        case Tag::none: return "none";
        case Tag::single: return "single:" + basis(first);
        case Tag::double_pair: return "double:" + basis(first) + "+" + basis(second);
        case Tag::triple: return "triple";
    }
    return "none";
}

std::vector<PairRelation> enumerate_pair_relations() {
    std::vector<PairRelation> out;
    out.push_back({});
    for (int b = 0; b < 3; ++b) out.push_back({PairRelation::Tag::single, b, -1});
    for (int f = 0; f < 3; ++f) {
        for (int s = 0; s < 3; ++s) {
            if (s != f) out.push_back({PairRelation::Tag::double_pair, f, s});
        }
    }
    out.push_back({PairRelation::Tag::triple, -1, -1});
    return out;
}

BigInt pattern_space_size(unsigned n_pairs) {
    BigInt out = 1;
    const BigInt relations = static_cast<unsigned>(enumerate_pair_relations().size());
    for (unsigned i = 0; i < n_pairs; ++i) out *= relations;
    return out;
}

std::uint64_t pair_count(unsigned n_labels) {
    if (n_labels < 2) throw std::invalid_argument("pair_count: need at least 2 labels");
    return static_cast<std::uint64_t>(n_labels) * (n_labels - 1) / 2;
}

const std::vector<std::string>& isotope_palette() {
    static const std::vector<std::string> palette{"C-a", "C-b", "N-a", "N-b", "O-a",
                                                  "O-b", "S-a", "S-b", "S-c", "S-d"};
    return palette;
}

std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n_atoms) {
    if (i == j || i >= n_atoms || j >= n_atoms) throw std::out_of_range("pair_index: invalid atom pair");
    if (i > j) std::swap(i, j);
    // Pairs before row i: sum_{r<i} (n - 1 - r)
    return i * (2 * n_atoms - i - 1) / 2 + (j - i - 1);
}

void EntanglementPattern::validate() const {
    const auto& palette = isotope_palette();
    if (atoms.size() != palette.size()) throw std::invalid_argument("EntanglementPattern: expected 10 labeled atoms");
    if (relations.size() != pair_count(static_cast<unsigned>(atoms.size()))) {
        throw std::invalid_argument("EntanglementPattern: expected 45 pair relations");
    }
    std::set<int> positions;
    std::set<std::string> labels;
    for (const auto& a : atoms) {
        if (a.position < 0) throw std::invalid_argument("EntanglementPattern: negative position");
        if (!positions.insert(a.position).second) throw std::invalid_argument("EntanglementPattern: duplicate position");
        if (std::find(palette.begin(), palette.end(), a.label) == palette.end()) {
            throw std::invalid_argument("EntanglementPattern: label '" + a.label + "' not in palette");
        }
        if (!labels.insert(a.label).second) throw std::invalid_argument("EntanglementPattern: duplicate label");
    }
    for (const auto& r : relations) (void)PairRelation::from_code(r.code());
}

const PairRelation& EntanglementPattern::relation(std::size_t i, std::size_t j) const {
    return relations.at(pair_index(i, j, atoms.size()));
}

EntanglementPattern sample_pattern(int peptide_length, std::uint64_t seed) {
    const auto& palette = isotope_palette();
    if (peptide_length < static_cast<int>(palette.size())) {
        throw std::invalid_argument("sample_pattern: peptide shorter than the number of labels");
    }
    Rng rng(seed);
    std::vector<int> positions(static_cast<std::size_t>(peptide_length));
    std::iota(positions.begin(), positions.end(), 0);
    for (std::size_t i = 0; i < palette.size(); ++i) {
        const std::size_t j = i + uniform_index(rng, positions.size() - i);
        std::swap(positions[i], positions[j]);
    }
    EntanglementPattern p;
    for (std::size_t i = 0; i < palette.size(); ++i) p.atoms.push_back({palette[i], positions[i]});
    const std::size_t n_pairs = pair_count(static_cast<unsigned>(palette.size()));
    for (std::size_t k = 0; k < n_pairs; ++k) {
        p.relations.push_back(PairRelation::from_code(static_cast<int>(uniform_index(rng, 11))));
    }
    return p;
}

nlohmann::json to_json(const EntanglementPattern& pattern) {
    pattern.validate();
    nlohmann::json atoms = nlohmann::json::array();
    for (const auto& a : pattern.atoms) atoms.push_back({{"label", a.label}, {"position", a.position}});
    nlohmann::json pairs = nlohmann::json::array();
    const std::size_t n = pattern.atoms.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            pairs.push_back({{"i", i}, {"j", j}, {"relation", pattern.relation(i, j).name()}});
        }
    }
    return {{"atoms", atoms}, {"pairs", pairs}};
}

EntanglementPattern pattern_from_json(const nlohmann::json& doc) {
    EntanglementPattern p;
    for (const auto& a : doc.at("atoms")) p.atoms.push_back({a.at("label").get<std::string>(), a.at("position").get<int>()});
    const std::size_t n = p.atoms.size();
    if (n < 2) throw std::invalid_argument("pattern_from_json: too few atoms");
    p.relations.assign(pair_count(static_cast<unsigned>(n)), PairRelation{});
    std::vector<bool> seen(p.relations.size(), false);
    const auto all = enumerate_pair_relations();
    for (const auto& e : doc.at("pairs")) {
        const std::size_t k = pair_index(e.at("i").get<std::size_t>(), e.at("j").get<std::size_t>(), n);
        const auto name = e.at("relation").get<std::string>();
        auto it = std::find_if(all.begin(), all.end(), [&](const PairRelation& r) { return r.name() == name; });
        if (it == all.end()) throw std::invalid_argument("pattern_from_json: unknown relation '" + name + "'");
        if (seen[k]) throw std::invalid_argument("pattern_from_json: duplicate pair entry");
        seen[k] = true;
        p.relations[k] = *it;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
        throw std::invalid_argument("pattern_from_json: missing pair entries");
    }
    p.validate();
    return p;
}

HybridState build_hybrid_state(MixedBasisKind kind, HybridForm form, const std::vector<cplx>& amplitudes) {
    const auto layout = SubsystemLayout::qubits(2);
    Vector v = Vector::Zero(4);
    switch (form) {
        case HybridForm::bell_phi_plus:
            v(0) = v(3) = 1.0 / std::sqrt(2.0);
            break;
        case HybridForm::product:
            v(0) = 1.0;
            break;
        case HybridForm::custom: {
            if (amplitudes.size() != 4) throw std::invalid_argument("build_hybrid_state: custom form needs 4 amplitudes");
            for (int i = 0; i < 4; ++i) v(i) = amplitudes[static_cast<std::size_t>(i)];
            const double norm = v.norm();
            if (!(norm > 1e-12) || !std::isfinite(norm)) {
                throw std::invalid_argument("build_hybrid_state: custom amplitudes not normalizable");
            }
            if (std::abs(norm - 1.0) > 1e-10) {
                throw std::invalid_argument("build_hybrid_state: custom amplitudes must be normalized");
            }
            break;
        }
    }
    return {kind, StateVector(std::move(v), layout)};
}

namespace {

// Correlation tensor restricted to the x-z plane: T[i][j] = <s_i (x) s_j>, i,j in {z, x}.
std::array<std::array<double, 2>, 2> xz_correlations(const StateVector& state) {
    if (state.dim() != 4) throw std::invalid_argument("CHSH requires a two-qubit state");
    const Vector& v = state.amplitudes();
    auto expect = [&](const Eigen::Matrix4cd& op) { return v.dot(op * v).real(); };
    Eigen::Matrix2cd z, x;
    z << 1, 0, 0, -1;
    x << 0, 1, 1, 0;
    auto kron = [](const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
        Eigen::Matrix4cd out;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
        return out;
    };
    return {{{expect(kron(z, z)), expect(kron(z, x))}, {expect(kron(x, z)), expect(kron(x, x))}}};
}

double correlator_from(const std::array<std::array<double, 2>, 2>& t, double a, double b) {
    const double ca = std::cos(a), sa = std::sin(a), cb = std::cos(b), sb = std::sin(b);
    return ca * cb * t[0][0] + ca * sb * t[0][1] + sa * cb * t[1][0] + sa * sb * t[1][1];
}

double chsh_from(const std::array<std::array<double, 2>, 2>& t, const ChshSettings& s) {
    return correlator_from(t, s.a, s.b) + correlator_from(t, s.a, s.b_prime) + correlator_from(t, s.a_prime, s.b) -
           correlator_from(t, s.a_prime, s.b_prime);
}

}  // namespace

double correlator(const StateVector& state, double angle_a, double angle_b) {
    return correlator_from(xz_correlations(state), angle_a, angle_b);
}

double chsh_value(const StateVector& state, const ChshSettings& settings) {
    return chsh_from(xz_correlations(state), settings);
}

double chsh_value(const HybridState& state, const ChshSettings& settings) { return chsh_value(state.state, settings); }

ChshOptimum chsh_optimize(const HybridState& state) {
    const auto t = xz_correlations(state.state);
    constexpr int kGrid = 180;  // 2 degree steps over [0, 2 pi)
    const double step = 2.0 * M_PI / kGrid;
    std::array<double, kGrid> angles{};
    for (int i = 0; i < kGrid; ++i) angles[static_cast<std::size_t>(i)] = i * step;

    // For fixed (a, a'), S splits into a b-term and a b'-term that are
    // maximized independently.
    ChshOptimum best{{}, -INFINITY};
    for (double a : angles) {
        for (double ap : angles) {
            double best_b = -INFINITY, arg_b = 0.0, best_bp = -INFINITY, arg_bp = 0.0;
            for (double b : angles) {
                const double plus = correlator_from(t, a, b) + correlator_from(t, ap, b);
                const double minus = correlator_from(t, a, b) - correlator_from(t, ap, b);
                if (plus > best_b) {
                    best_b = plus;
                    arg_b = b;
                }
                if (minus > best_bp) {
                    best_bp = minus;
                    arg_bp = b;
                }
            }
            if (best_b + best_bp > best.s_max) best = {{a, ap, arg_b, arg_bp}, best_b + best_bp};
        }
    }

    // Coordinate-wise pattern search with shrinking step.
    double h = step;
    ChshSettings s = best.settings;
    double value = chsh_from(t, s);
    while (h > 1e-10) {
        bool improved = false;
        for (double ChshSettings::*field : {&ChshSettings::a, &ChshSettings::a_prime, &ChshSettings::b, &ChshSettings::b_prime}) {
            for (double sign : {1.0, -1.0}) {
                ChshSettings trial = s;
                trial.*field += sign * h;
                const double v = chsh_from(t, trial);
                if (v > value) {
                    s = trial;
                    value = v;
                    improved = true;
                }
            }
        }
        if (!improved) h *= 0.5;
    }
    return {s, value};
}

}  // namespace caslab
