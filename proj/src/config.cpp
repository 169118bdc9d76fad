#include "caslab/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "caslab/serialization.hpp"

namespace caslab {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class FieldType { number, integer, boolean, choice, number_list, integer_list, object, state, observable, initial };

struct Field {
    std::string name;
    FieldType type;
    json fallback;
    double lo = -kInf;
    double hi = kInf;
    bool lo_open = false;
    bool hi_open = false;
    std::vector<std::string> choices{};
    std::vector<Field> children{};
    std::size_t min_items = 0;
    bool nullable = false;
};

Field number(std::string name, double def, double lo = -kInf, double hi = kInf, bool lo_open = false,
             bool hi_open = false) {
    return Field{std::move(name), FieldType::number, def, lo, hi, lo_open, hi_open, {}, {}, 0, false};
}
Field positive(std::string name, double def) { return number(std::move(name), def, 0.0, kInf, true); }
Field nonnegative(std::string name, double def) { return number(std::move(name), def, 0.0); }
Field unit_interval(std::string name, double def) { return number(std::move(name), def, 0.0, 1.0); }

Field integer(std::string name, long long def, double lo, double hi) {
    return Field{std::move(name), FieldType::integer, def, lo, hi, false, false, {}, {}, 0, false};
}
Field flag(std::string name, bool def) { return Field{std::move(name), FieldType::boolean, def}; }
Field choice(std::string name, std::string def, std::vector<std::string> choices) {
    return Field{std::move(name), FieldType::choice, std::move(def), -kInf, kInf, false, false, std::move(choices)};
}
Field numbers(std::string name, json def, double lo, bool lo_open, std::size_t min_items) {
    return Field{std::move(name), FieldType::number_list, std::move(def), lo, kInf, lo_open, false, {}, {}, min_items};
}
Field integers(std::string name, json def, double lo, double hi, std::size_t min_items) {
    return Field{std::move(name), FieldType::integer_list, std::move(def), lo, hi, false, false, {}, {}, min_items};
}
Field object(std::string name, std::vector<Field> children) {
    Field f{std::move(name), FieldType::object, json::object()};
    f.children = std::move(children);
    return f;
}
Field state(std::string name, json def, bool nullable) {
    Field f{std::move(name), FieldType::state, std::move(def)};
    f.nullable = nullable;
    return f;
}

std::vector<Field> model_fields() {
    return {
        choice("kind", "heisenberg_xyz", {"ising_z", "heisenberg_xyz", "nk_spin_glass"}),
        integer("length", 6, 2, 12),
        number("coupling", 1.0),
        number("transverse_field", 0.0),
        choice("boundary", "open", {"open", "periodic"}),
        integer("ruggedness", 2, 0, 11),
        integer("model_seed", 1, 0, 9.0e15),
        positive("energy_scale", 3.0),
    };
}

std::vector<Field> competition_fields() {
    return {
        integer("n_bases", 2, 1, 4096),
        positive("delta", 1.0),
        nonnegative("decay", 1.0),
        positive("rate_constant", 1.0),
        positive("n_variables", 10.0),
        object("selection",
               {choice("kind", "proportional_with_floor", {"proportional_with_floor", "softmax", "uniform"}),
                nonnegative("floor", 0.1), nonnegative("beta", 1.0)}),
        nonnegative("temperature", 0.0),
        nonnegative("erasure_constant", 1.0),
        positive("threshold", 5.0),
        positive("horizon", 100.0),
        nonnegative("burn_in", 0.0),
        numbers("initial_amplitudes", json::array(), 0.0, false, 0),
        flag("stop_at_dominance", true),
    };
}

std::vector<Field> with(std::vector<Field> base, std::vector<Field> extra) {
    for (auto& f : extra) base.push_back(std::move(f));
    return base;
}

std::vector<Field> build_schema(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::zeno:
            return {positive("omega", 1.0), positive("total_time", M_PI),
                    integers("k_values", json::array({1, 10, 100, 1000}), 1, 1e9, 1)};
        case ExperimentKind::trajectory:
            return {
                object("model", model_fields()),
                Field{"initial", FieldType::initial, "neel"},
                positive("dt", 0.1),
                integer("steps", 100, 1, 1e6),
                object("measurement",
                       {unit_interval("p_site", 0.0), choice("rule", "fixed_p", {"fixed_p", "proportional_to_n"}),
                        nonnegative("rate_constant", 0.0), choice("basis", "z", {"z", "x"}),
                        choice("mode", "simultaneous", {"simultaneous", "sequential"})}),
                object("decoherence",
                       {choice("kind", "none", {"none", "exponential", "power_law"}), nonnegative("rate", 0.0),
                        positive("scale", 1.0), positive("exponent", 1.0)}),
                flag("density_matrix_mode", false),
                number("late_fraction", 0.25, 0.0, 1.0, true),
                integer("qze_window", 10, 1, 1e6),
            };
        case ExperimentKind::competition:
            return competition_fields();
        case ExperimentKind::temperature_sweep:
            return with(competition_fields(),
                        {numbers("temperatures", json::array({0.0, 1.0, 2.0, 4.0, 8.0}), 0.0, false, 2)});
        case ExperimentKind::n_scaling:
            return with(competition_fields(),
                        {numbers("n_values", json::array({4.0, 8.0, 16.0, 32.0, 64.0}), 0.0, true, 2)});
        case ExperimentKind::spacing:
            return {
                choice("source", "model", {"model", "poisson", "wigner"}),
                object("model", model_fields()),
                integer("levels", 2000, 4, 1e7),
                integer("unfolding_degree", 5, 1, 15),
                number("edge_fraction", 0.1, 0.0, 0.5, false, true),
                number("ordered_below", 0.3, 0.0, 1.0, true, true),
                number("chaotic_above", 0.7, 0.0, 1.0, true, true),
            };
        case ExperimentKind::weak:
            return {
                Field{"observable", FieldType::observable, "z"},
                number("coupling", 0.1),
                positive("pointer_sigma", 1.0),
                integer("grid_points", 512, 16, 1 << 22),
                positive("extent_sigmas", 8.0),
                state("initial", json{{"dims", {2}}, {"re", {0.6, 0.8}}, {"im", {0.0, 0.0}}}, false),
                state("final", nullptr, true),
            };
        case ExperimentKind::chsh:
            return {
                choice("basis_kind", "spin_polarization",
                       {"position_spin", "position_polarization", "spin_polarization", "momentum_spin",
                        "momentum_polarization"}),
                choice("form", "bell_phi_plus", {"bell_phi_plus", "product", "custom"}),
                numbers("amplitudes_re", json::array(), -kInf, false, 0),
                numbers("amplitudes_im", json::array(), -kInf, false, 0),
                integer("angle_steps", 181, 2, 1e6),
            };
        case ExperimentKind::patterns:
            return {integer("peptide_length", 30, 10, 1e6), integer("n_pairs", 45, 0, 1e5)};
        case ExperimentKind::madelung:
            return {
                choice("state", "oscillator_ground", {"oscillator_ground", "oscillator_first", "gaussian_packet"}),
                integer("points", 512, 16, 1 << 22),
                positive("extent", 8.0),
                positive("hbar", 1.0),
                positive("mass", 1.0),
                positive("omega", 1.0),
                number("momentum", 0.0),
                positive("width", 1.0),
                number("center", 0.0),
                number("relative_mask", 1e-6, 0.0, 1.0, true, true),
            };
    }
    throw ConfigError("unknown experiment kind");
}

const std::vector<Field>& schema_for(ExperimentKind kind) {
    static const std::map<ExperimentKind, std::vector<Field>> schemas = [] {
        std::map<ExperimentKind, std::vector<Field>> m;
        for (auto k : all_experiment_kinds()) m.emplace(k, build_schema(k));
        return m;
    }();
    return schemas.at(kind);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

std::string type_name(FieldType t) {
    switch (t) {
        case FieldType::number: return "number";
        case FieldType::integer: return "integer";
        case FieldType::boolean: return "boolean";
        case FieldType::choice: return "string";
        case FieldType::number_list: return "number[]";
        case FieldType::integer_list: return "integer[]";
        case FieldType::object: return "object";
        case FieldType::state: return "state";
        case FieldType::observable: return "observable";
        case FieldType::initial: return "initial_state";
    }
    return "?";
}

void check_range(double x, const Field& f, const std::string& path) {
    const bool below = f.lo_open ? !(x > f.lo) : !(x >= f.lo);
    const bool above = f.hi_open ? !(x < f.hi) : !(x <= f.hi);
    if (below || above) {
        std::ostringstream os;
        os << path << ": value " << x << " outside " << (f.lo_open ? "(" : "[") << f.lo << ", " << f.hi
           << (f.hi_open || std::isinf(f.hi) ? ")" : "]");
        throw ConfigError(os.str());
    }
}

json normalize_object(const json& given, const std::vector<Field>& fields, const std::string& path);

json normalize_integer(const json& v, const Field& f, const std::string& path) {
    if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer");
    const double x = v.is_number_unsigned() ? static_cast<double>(v.get<std::uint64_t>())
                                            : static_cast<double>(v.get<std::int64_t>());
    check_range(x, f, path);
    return v.get<std::int64_t>();
}

json normalize_field(const Field& f, const json* given, const std::string& path) {
    if (!given) {
        if (f.type == FieldType::object) return normalize_object(json::object(), f.children, path);
        return f.fallback;
    }
    const json& v = *given;
    switch (f.type) {
        case FieldType::number:
            if (!v.is_number()) throw ConfigError(path + ": expected a number");
            check_range(v.get<double>(), f, path);
            return v.get<double>();
        case FieldType::integer:
            return normalize_integer(v, f, path);
        case FieldType::boolean:
            if (!v.is_boolean()) throw ConfigError(path + ": expected true or false");
            return v;
        case FieldType::choice: {
            if (!v.is_string()) throw ConfigError(path + ": expected a string");
            const auto s = v.get<std::string>();
            for (const auto& c : f.choices) {
                if (c == s) return s;
            }
            std::string list;
            for (const auto& c : f.choices) list += (list.empty() ? "" : ", ") + c;
            throw ConfigError(path + ": '" + s + "' is not one of {" + list + "}");
        }
        case FieldType::number_list:
        case FieldType::integer_list: {
            if (!v.is_array()) throw ConfigError(path + ": expected an array");
            if (v.size() < f.min_items) {
                throw ConfigError(path + ": at least " + std::to_string(f.min_items) + " entries required");
            }
            json out = json::array();
            for (std::size_t i = 0; i < v.size(); ++i) {
                const auto item_path = path + "[" + std::to_string(i) + "]";
                if (f.type == FieldType::integer_list) {
                    out.push_back(normalize_integer(v[i], f, item_path));
                } else {
                    if (!v[i].is_number()) throw ConfigError(item_path + ": expected a number");
                    check_range(v[i].get<double>(), f, item_path);
                    out.push_back(v[i].get<double>());
                }
            }
            return out;
        }
        case FieldType::object:
            return normalize_object(v, f.children, path);
        case FieldType::state:
            if (v.is_null() && f.nullable) return nullptr;
            try {
                return to_json(state_from_json(v));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(path + ": " + e.what());
            }
        case FieldType::observable: {
            if (v.is_string()) {
                const auto s = v.get<std::string>();
                if (s == "x" || s == "y" || s == "z") return s;
                throw ConfigError(path + ": named observables are x, y and z");
            }
            Matrix m;
            try {
                m = matrix_from_json(v);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(path + ": " + e.what());
            }
            if (m.rows() != m.cols() || m.rows() < 2) throw ConfigError(path + ": observable must be square");
            if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kStateTol) {
                throw ConfigError(path + ": observable must be Hermitian");
            }
            return matrix_to_json(m);
        }
        case FieldType::initial: {
            if (v.is_string()) {
                const auto s = v.get<std::string>();
                if (s == "neel" || s == "all_up" || s == "all_down") return s;
                throw ConfigError(path + ": named initial states are neel, all_up and all_down");
            }
            if (!v.is_array() || v.empty()) throw ConfigError(path + ": expected a name or a list of 0/1 digits");
            for (const auto& d : v) {
                if (!d.is_number_integer() || (d.get<int>() != 0 && d.get<int>() != 1)) {
                    throw ConfigError(path + ": digits must be 0 or 1");
                }
            }
            return v;
        }
    }
    throw ConfigError(path + ": unsupported field type");
}

json normalize_object(const json& given, const std::vector<Field>& fields, const std::string& path) {
    if (!given.is_object()) throw ConfigError((path.empty() ? "params" : path) + ": expected an object");
    for (const auto& item : given.items()) {
        bool known = false;
        for (const auto& f : fields) known = known || f.name == item.key();
        if (!known) throw ConfigError("unknown field '" + join(path, item.key()) + "'");
    }
    json out = json::object();
    for (const auto& f : fields) {
        const auto it = given.find(f.name);
        out[f.name] = normalize_field(f, it == given.end() ? nullptr : &*it, join(path, f.name));
    }
    return out;
}

const Field* find_field(const std::vector<Field>& fields, const std::string& dotted) {
    const std::vector<Field>* level = &fields;
    const Field* found = nullptr;
    std::size_t start = 0;
    while (true) {
        const auto dot = dotted.find('.', start);
        const auto key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        found = nullptr;
        for (const auto& f : *level) {
            if (f.name == key) found = &f;
        }
        if (!found) return nullptr;
        if (dot == std::string::npos) return found;
        if (found->type != FieldType::object) return nullptr;
        level = &found->children;
        start = dot + 1;
    }
}

bool is_scalar(FieldType t) {
    return t == FieldType::number || t == FieldType::integer || t == FieldType::boolean || t == FieldType::choice;
}

std::uint64_t parse_seed(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw ConfigError(path + ": expected an unsigned 64-bit integer");
}

void set_path(json& params, const std::string& dotted, const json& value) {
    json* node = &params;
    std::size_t start = 0;
    while (true) {
        const auto dot = dotted.find('.', start);
        if (dot == std::string::npos) {
            (*node)[dotted.substr(start)] = value;
            return;
        }
        node = &(*node)[dotted.substr(start, dot - start)];
        start = dot + 1;
    }
}

nlohmann::ordered_json describe(const std::vector<Field>& fields) {
    nlohmann::ordered_json out = nlohmann::ordered_json::object();
    for (const auto& f : fields) {
        nlohmann::ordered_json d{{"type", type_name(f.type)}};
        if (f.type == FieldType::object) {
            d["fields"] = describe(f.children);
        } else {
            d["default"] = f.fallback;
        }
        if (std::isfinite(f.lo)) d[f.lo_open ? "exclusive_min" : "min"] = f.lo;
        if (std::isfinite(f.hi)) d[f.hi_open ? "exclusive_max" : "max"] = f.hi;
        if (!f.choices.empty()) d["choices"] = f.choices;
        if (f.min_items) d["min_items"] = f.min_items;
        if (f.nullable) d["nullable"] = true;
        out[f.name] = std::move(d);
    }
    return out;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::zeno: return "zeno";
        case ExperimentKind::trajectory: return "trajectory";
        case ExperimentKind::competition: return "competition";
        case ExperimentKind::temperature_sweep: return "temperature_sweep";
        case ExperimentKind::n_scaling: return "n_scaling";
        case ExperimentKind::spacing: return "spacing";
        case ExperimentKind::weak: return "weak";
        case ExperimentKind::chsh: return "chsh";
        case ExperimentKind::patterns: return "patterns";
        case ExperimentKind::madelung: return "madelung";
    }
    return "?";
}

const std::vector<ExperimentKind>& all_experiment_kinds() {
    static const std::vector<ExperimentKind> kinds{
        ExperimentKind::zeno,    ExperimentKind::trajectory, ExperimentKind::competition,
        ExperimentKind::temperature_sweep, ExperimentKind::n_scaling, ExperimentKind::spacing,
        ExperimentKind::weak,    ExperimentKind::chsh,       ExperimentKind::patterns,
        ExperimentKind::madelung,
    };
    return kinds;
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
    for (auto k : all_experiment_kinds()) {
        if (to_string(k) == name) return k;
    }
    throw ConfigError("kind: unknown experiment kind '" + name + "'");
}

json ExperimentConfig::to_json() const {
    json doc{{"kind", caslab::to_string(kind)}, {"seed", seed}, {"repeat", repeat}, {"params", params}};
    if (output) doc["output"] = *output;
    if (!grid.empty()) {
        json g = json::object();
        for (const auto& [path, values] : grid) g[path] = values;
        doc["grid"] = g;
    }
    return doc;
}

ExperimentConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config: top level must be an object");
    static const std::set<std::string> top{"kind", "seed", "repeat", "output", "params", "grid"};
    for (const auto& item : doc.items()) {
        if (!top.count(item.key())) throw ConfigError("unknown field '" + item.key() + "'");
    }
    if (!doc.contains("kind") || !doc["kind"].is_string()) throw ConfigError("kind: required string");

    ExperimentConfig cfg;
    cfg.kind = experiment_kind_from_string(doc["kind"].get<std::string>());
    if (doc.contains("seed")) cfg.seed = parse_seed(doc["seed"], "seed");
    if (doc.contains("repeat")) {
        const auto& r = doc["repeat"];
        if (!r.is_number_integer() || r.get<std::int64_t>() < 1 || r.get<std::int64_t>() > 10000000) {
            throw ConfigError("repeat: expected an integer in [1, 10000000]");
        }
        cfg.repeat = r.get<std::uint64_t>();
    }
    if (doc.contains("output")) {
        if (!doc["output"].is_string() || doc["output"].get<std::string>().empty()) {
            throw ConfigError("output: expected a non-empty path string");
        }
        cfg.output = doc["output"].get<std::string>();
    }
    const auto& schema = schema_for(cfg.kind);
    cfg.params = normalize_object(doc.contains("params") ? doc["params"] : json::object(), schema, "params");

    if (doc.contains("grid")) {
        const auto& g = doc["grid"];
        if (!g.is_object() || g.empty()) throw ConfigError("grid: expected a non-empty object of value lists");
        for (const auto& item : g.items()) {
            const auto path = "grid." + item.key();
            if (!item.value().is_array() || item.value().empty()) throw ConfigError(path + ": expected a non-empty array");
            std::vector<json> values;
            for (std::size_t i = 0; i < item.value().size(); ++i) {
                const auto& v = item.value()[i];
                const auto vpath = path + "[" + std::to_string(i) + "]";
                if (item.key() == "seed") {
                    values.push_back(parse_seed(v, vpath));
                    continue;
                }
                const Field* f = find_field(schema, item.key());
                if (!f || !is_scalar(f->type)) throw ConfigError(path + ": not a scalar parameter of this kind");
                values.push_back(normalize_field(*f, &v, vpath));
            }
            for (std::size_t i = 0; i < values.size(); ++i)
                for (std::size_t j = i + 1; j < values.size(); ++j)
                    if (values[i] == values[j]) throw ConfigError(path + ": duplicate grid value");
            cfg.grid.emplace_back(item.key(), std::move(values));
        }
        // json objects iterate in key order, so the axes are already sorted.
        std::size_t total = 1;
        for (const auto& axis : cfg.grid) {
            total *= axis.second.size();
            if (total > kMaxGridPoints) {
                throw ConfigError("grid: more than " + std::to_string(kMaxGridPoints) + " points");
            }
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    json doc;
    try {
        doc = json::parse(text.str());
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

ExperimentConfig apply_assignments(const ExperimentConfig& base,
                                   const std::vector<std::pair<std::string, json>>& values) {
    json doc = base.to_json();
    doc.erase("grid");
    for (const auto& [path, value] : values) {
        if (path == "seed") {
            doc["seed"] = value;
        } else {
            set_path(doc["params"], path, value);
        }
    }
    return parse_config(doc);
}

std::size_t grid_size(const std::vector<GridAxis>& grid) {
    std::size_t total = 1;
    for (const auto& axis : grid) total *= axis.second.size();
    return total;
}

nlohmann::ordered_json schema_document() {
    nlohmann::ordered_json doc;
    doc["top_level"] = {
        {"kind", {{"type", "string"}, {"required", true}}},
        {"seed", {{"type", "uint64"}, {"default", 0}}},
        {"repeat", {{"type", "integer"}, {"default", 1}, {"min", 1}, {"max", 10000000}}},
        {"output", {{"type", "string"}, {"default", nullptr}}},
        {"params", {{"type", "object"}}},
        {"grid", {{"type", "object"}, {"max_points", kMaxGridPoints}}},
    };
    nlohmann::ordered_json kinds = nlohmann::ordered_json::object();
    for (auto k : all_experiment_kinds()) kinds[to_string(k)] = describe(schema_for(k));
    doc["kinds"] = kinds;
    return doc;
}

}  // namespace caslab
