#include "caslab/harness.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "caslab/log.hpp"
#include "caslab/parallel.hpp"
#include "caslab/table.hpp"

namespace caslab {

namespace fs = std::filesystem;
using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kSummary = "summary.json";
constexpr const char* kPoints = "points";

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_file(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to '" + path.string() + "'");
}

// Write to a temporary name in the same directory, then rename over the target.
void write_file_atomic(const fs::path& path, const std::string& bytes) {
    fs::path tmp = path;
    tmp += ".tmp";
    write_file(tmp, bytes);
    fs::rename(tmp, path);
}

fs::path staging_path(const fs::path& out) {
    fs::path parent = out.parent_path();
    return parent / ("." + out.filename().string() + ".tmp-" + std::to_string(::getpid()));
}

bool directory_empty(const fs::path& dir) { return fs::directory_iterator(dir) == fs::directory_iterator(); }

void prepare_target(const fs::path& out) {
    if (!fs::exists(out)) return;
    if (!fs::is_directory(out)) throw ConfigError("output path '" + out.string() + "' exists and is not a directory");
    if (!directory_empty(out) && !fs::exists(out / kManifest)) {
        throw ConfigError("refusing to overwrite non-empty directory '" + out.string() + "' without a manifest");
    }
}

ojson file_entry(const std::string& name, const std::string& bytes) {
    return ojson{{"name", name}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}};
}

ojson read_json(const fs::path& path) {
    try {
        return ojson::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw std::runtime_error("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

std::string json_text(const ojson& doc) { return doc.dump(2) + "\n"; }

Cell json_cell(const ojson& v) {
    if (v.is_null()) return std::monostate{};
    if (v.is_boolean()) return std::string(v.get<bool>() ? "true" : "false");
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

}  // namespace

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string to_string(OutputFormat format) { return format == OutputFormat::csv ? "csv" : "json"; }

OutputFormat output_format_from_string(const std::string& name) {
    if (name == "csv") return OutputFormat::csv;
    if (name == "json") return OutputFormat::json;
    throw ConfigError("format: expected csv or json, got '" + name + "'");
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string config_hash(const ExperimentConfig& config) {
    json doc = config.to_json();
    doc.erase("output");
    return sha256_hex(doc.dump());
}

std::vector<std::pair<std::string, std::string>> render_result(const ExperimentResult& result, OutputFormat format) {
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& [name, table] : result.tables) {
        if (format == OutputFormat::csv) {
            files.emplace_back(name + ".csv", to_csv(table));
        } else {
            files.emplace_back(name + ".json", json_text(to_json(table)));
        }
    }
    for (const auto& doc : result.documents) files.push_back(doc);
    files.emplace_back(kSummary, json_text(result.summary));
    std::set<std::string> seen{kManifest};
    for (const auto& f : files) {
        if (!seen.insert(f.first).second) throw std::logic_error("duplicate output file name '" + f.first + "'");
    }
    return files;
}

RunReport run_to_directory(const ExperimentConfig& config, const fs::path& out, const HarnessOptions& options) {
    prepare_target(out);
    const auto started = utc_now();
    log_info("running " + to_string(config.kind) + " (seed " + std::to_string(config.seed) + ") into " + out.string());
    const auto result = run_experiment(config, options.jobs);
    auto files = render_result(result, options.format);

    ojson listing = ojson::array();
    auto sorted = files;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [name, bytes] : sorted) listing.push_back(file_entry(name, bytes));

    ojson manifest;
    manifest["tool"] = "caslab";
    manifest["version"] = CASLAB_VERSION;
    manifest["kind"] = to_string(config.kind);
    manifest["config_hash"] = config_hash(config);
    manifest["seed"] = config.seed;
    manifest["repeat"] = config.repeat;
    manifest["format"] = to_string(options.format);
    manifest["started_at"] = started;
    manifest["finished_at"] = utc_now();
    manifest["parameters"] = parameter_echo(config);
    manifest["config"] = ojson::parse(config.to_json().dump());
    manifest["files"] = listing;

    if (!out.parent_path().empty()) fs::create_directories(out.parent_path());
    const fs::path staging = staging_path(out);
    fs::remove_all(staging);
    fs::create_directory(staging);
    try {
        for (const auto& [name, bytes] : files) write_file(staging / name, bytes);
        write_file(staging / kManifest, json_text(manifest));
        prepare_target(out);
        fs::remove_all(out);
        fs::rename(staging, out);
    } catch (...) {
        std::error_code ec;
        fs::remove_all(staging, ec);
        throw;
    }
    log_debug("wrote " + std::to_string(files.size() + 1) + " files to " + out.string());
    return RunReport{out, manifest, result.summary};
}

int SweepReport::exit_code() const {
    if (config_failures) return kExitConfig;
    if (failed) return kExitNumerical;
    return kExitOk;
}

namespace {

struct GridPoint {
    std::string id;
    std::vector<json> values;  // one per axis
    std::string status = "pending";
    int exit_code = 0;
    std::string error{};
};

std::vector<GridPoint> enumerate_grid(const std::vector<GridAxis>& grid) {
    std::vector<std::vector<json>> combos{{}};
    for (const auto& axis : grid) {
        std::vector<std::vector<json>> next;
        for (const auto& c : combos) {
            for (const auto& v : axis.second) {
                auto e = c;
                e.push_back(v);
                next.push_back(std::move(e));
            }
        }
        combos = std::move(next);
    }
    std::sort(combos.begin(), combos.end());
    const std::size_t width = std::max<std::size_t>(4, std::to_string(combos.size() - 1).size());
    std::vector<GridPoint> points;
    for (std::size_t i = 0; i < combos.size(); ++i) {
        auto digits = std::to_string(i);
        points.push_back({"p" + std::string(width - digits.size(), '0') + digits, std::move(combos[i])});
    }
    return points;
}

ojson sweep_manifest(const ExperimentConfig& config, const std::vector<GridPoint>& points, const SweepOptions& options,
                     const std::string& started, const ojson& files, bool complete) {
    ojson m;
    m["tool"] = "caslab";
    m["version"] = CASLAB_VERSION;
    m["kind"] = "sweep";
    m["experiment"] = to_string(config.kind);
    m["config_hash"] = config_hash(config);
    m["seed"] = config.seed;
    m["format"] = to_string(options.run.format);
    m["started_at"] = started;
    m["updated_at"] = utc_now();
    m["status"] = complete ? "complete" : "incomplete";
    m["config"] = ojson::parse(config.to_json().dump());
    ojson pts = ojson::array();
    for (const auto& p : points) {
        ojson values = ojson::object();
        for (std::size_t a = 0; a < config.grid.size(); ++a) values[config.grid[a].first] = ojson::parse(p.values[a].dump());
        ojson entry{{"id", p.id}, {"values", values}, {"status", p.status}};
        if (p.status == "failed") {
            entry["exit_code"] = p.exit_code;
            entry["error"] = p.error;
        }
        pts.push_back(std::move(entry));
    }
    m["points"] = pts;
    m["files"] = files;
    return m;
}

Table build_aggregate(const ExperimentConfig& config, const std::vector<GridPoint>& points, const fs::path& out) {
    std::vector<std::string> metrics;
    std::vector<ojson> summaries(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].status != "ok") continue;
        summaries[i] = read_json(out / kPoints / points[i].id / kSummary);
        for (const auto& item : summaries[i].items()) {
            if (std::find(metrics.begin(), metrics.end(), item.key()) == metrics.end()) metrics.push_back(item.key());
        }
    }
    Table t;
    for (const auto& axis : config.grid) t.columns.push_back(axis.first);
    for (const char* c : {"point", "status", "error"}) t.columns.push_back(c);
    for (const auto& m : metrics) t.columns.push_back(m);
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::vector<Cell> row;
        for (const auto& v : points[i].values) row.push_back(json_cell(ojson::parse(v.dump())));
        row.emplace_back(points[i].id);
        row.emplace_back(points[i].status);
        row.emplace_back(points[i].error);
        for (const auto& m : metrics) {
            row.push_back(summaries[i].contains(m) ? json_cell(summaries[i][m]) : Cell(std::monostate{}));
        }
        t.add_row(std::move(row));
    }
    return t;
}

}  // namespace

SweepReport run_sweep(const ExperimentConfig& config, const fs::path& out, const SweepOptions& options) {
    if (config.grid.empty()) throw ConfigError("grid: a sweep needs at least one grid axis");
    auto points = enumerate_grid(config.grid);
    const auto hash = config_hash(config);
    std::string started = utc_now();

    if (fs::exists(out)) {
        if (!fs::is_directory(out)) throw ConfigError("output path '" + out.string() + "' is not a directory");
        if (fs::exists(out / kManifest)) {
            const auto prior = read_json(out / kManifest);
            if (prior.value("kind", "") != "sweep") throw ConfigError("'" + out.string() + "' holds a run, not a sweep");
            if (prior.value("config_hash", "") != hash || prior.value("format", "") != to_string(options.run.format)) {
                throw ConfigError("'" + out.string() + "' holds a sweep with a different config or format");
            }
            started = prior.value("started_at", started);
            std::set<std::string> done;
            for (const auto& p : prior["points"]) {
                if (p.value("status", "") == "ok") done.insert(p.value("id", ""));
            }
            for (auto& p : points) {
                if (done.count(p.id) && validate_output_directory(out / kPoints / p.id).ok) p.status = "ok";
            }
        } else if (!directory_empty(out)) {
            throw ConfigError("refusing to write a sweep into non-empty directory '" + out.string() + "'");
        }
    }
    fs::create_directories(out / kPoints);

    SweepReport report;
    report.points = points.size();
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].status == "ok") {
            ++report.skipped;
        } else {
            todo.push_back(i);
        }
    }
    if (options.max_new_points && todo.size() > *options.max_new_points) todo.resize(*options.max_new_points);
    log_info("sweep: " + std::to_string(points.size()) + " points, " + std::to_string(report.skipped) +
             " already complete, running " + std::to_string(todo.size()));

    std::mutex mutex;
    auto save_manifest = [&](bool complete, const ojson& files) {
        write_file_atomic(out / kManifest, json_text(sweep_manifest(config, points, options, started, files, complete)));
    };
    save_manifest(false, ojson::array());

    HarnessOptions inner = options.run;
    inner.jobs = 1;
    parallel_for(todo.size(), options.run.jobs, [&](std::size_t t) {
        GridPoint& point = points[todo[t]];
        std::vector<std::pair<std::string, json>> assignment;
        for (std::size_t a = 0; a < config.grid.size(); ++a) assignment.emplace_back(config.grid[a].first, point.values[a]);
        std::string status = "ok", error;
        int code = kExitOk;
        try {
            run_to_directory(apply_assignments(config, assignment), out / kPoints / point.id, inner);
        } catch (const std::exception& e) {
            status = "failed";
            error = e.what();
            code = exit_code_for(e);
            log_error("sweep point " + point.id + " failed: " + error);
        }
        std::lock_guard<std::mutex> lock(mutex);
        point.status = status;
        point.error = error;
        point.exit_code = code;
        save_manifest(false, ojson::array());
    });
    report.executed = todo.size();

    for (const auto& p : points) {
        if (p.status == "pending") ++report.pending;
        if (p.status == "failed") {
            ++report.failed;
            report.config_failures = report.config_failures || p.exit_code == kExitConfig;
        }
    }
    // Drop leftovers of an earlier interruption that never reached the manifest.
    for (const auto& entry : fs::directory_iterator(out / kPoints)) {
        const auto name = entry.path().filename().string();
        const bool known = std::any_of(points.begin(), points.end(),
                                       [&](const GridPoint& p) { return p.id == name && p.status == "ok"; });
        if (!known) fs::remove_all(entry.path());
    }

    report.complete = report.pending == 0;
    ojson files = ojson::array();
    if (report.complete) {
        const auto table = build_aggregate(config, points, out);
        const bool csv = options.run.format == OutputFormat::csv;
        const std::string name = csv ? "aggregate.csv" : "aggregate.json";
        const std::string bytes = csv ? to_csv(table) : json_text(to_json(table));
        write_file_atomic(out / name, bytes);
        files.push_back(file_entry(name, bytes));
    }
    save_manifest(report.complete, files);
    return report;
}

ManifestCheck validate_output_directory(const fs::path& dir) {
    ManifestCheck check;
    auto problem = [&](const std::string& p) {
        check.ok = false;
        check.problems.push_back(p);
    };
    if (!fs::is_directory(dir)) {
        problem("'" + dir.string() + "' is not a directory");
        return check;
    }
    ojson manifest;
    try {
        manifest = read_json(dir / kManifest);
    } catch (const std::exception& e) {
        problem(std::string("manifest unreadable: ") + e.what());
        return check;
    }
    std::set<std::string> expected{kManifest};
    if (!manifest.contains("files") || !manifest["files"].is_array()) {
        problem("manifest has no file list");
        return check;
    }
    for (const auto& f : manifest["files"]) {
        const auto name = f.value("name", "");
        expected.insert(name);
        const fs::path path = dir / name;
        if (!fs::is_regular_file(path)) {
            problem("listed file '" + name + "' is missing");
            continue;
        }
        const auto bytes = read_file(path);
        if (bytes.size() != f.value("bytes", std::size_t{0})) problem("byte length of '" + name + "' differs");
        if (sha256_hex(bytes) != f.value("sha256", "")) problem("digest of '" + name + "' differs");
    }
    const bool sweep = manifest.value("kind", "") == "sweep";
    std::set<std::string> completed;
    if (sweep) {
        expected.insert(kPoints);
        for (const auto& p : manifest["points"]) {
            if (p.value("status", "") == "ok") completed.insert(p.value("id", ""));
        }
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (!expected.count(name)) problem("unlisted entry '" + name + "'");
    }
    if (sweep) {
        std::set<std::string> present;
        if (fs::is_directory(dir / kPoints)) {
            for (const auto& entry : fs::directory_iterator(dir / kPoints)) present.insert(entry.path().filename().string());
        }
        for (const auto& name : present) {
            if (!completed.count(name)) problem("point directory '" + name + "' is not recorded as complete");
        }
        for (const auto& id : completed) {
            const auto sub = validate_output_directory(dir / kPoints / id);
            for (const auto& p : sub.problems) problem(id + ": " + p);
        }
    }
    return check;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const std::logic_error*>(&e)) return kExitConfig;
    return kExitNumerical;
}

ojson diagnostic(const std::string& command, const std::exception& e) {
    const int code = exit_code_for(e);
    return ojson{{"command", command},
                 {"exit_code", code},
                 {"category", code == kExitConfig ? "config_error" : "numerical_error"},
                 {"message", e.what()},
                 {"version", CASLAB_VERSION}};
}

}  // namespace caslab
