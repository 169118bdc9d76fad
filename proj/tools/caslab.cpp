// caslab: command-line front end.
//
//   caslab run      --config PATH [--seed U64] [--out DIR] [--jobs N] [--format csv|json]
//   caslab sweep    --config PATH [--seed U64] [--out DIR] [--jobs N] [--format csv|json] [--max-points N]
//   caslab plot     RESULTS.csv --kind KIND [--out FILE.svg]
//   caslab validate [--config PATH] [--schema] [DIR ...]
//
// Exit status: 0 success, 2 config error, 3 numerical error.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "caslab/config.hpp"
#include "caslab/harness.hpp"
#include "caslab/log.hpp"
#include "caslab/plot.hpp"

namespace fs = std::filesystem;
using namespace caslab;

namespace {

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::size_t jobs = 1;
    std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "experiment config (JSON)")->required();
    cmd->add_option("--seed", f.seed, "override the config seed");
    cmd->add_option("--out", f.out, "output directory (overrides the config)");
    cmd->add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--format", f.format, "table format")->check(CLI::IsMember({"csv", "json"}));
}

ExperimentConfig load(const CommonFlags& f, fs::path& out) {
    auto cfg = load_config(f.config);
    if (f.seed) cfg.seed = *f.seed;
    if (!f.out.empty()) {
        out = f.out;
    } else if (cfg.output) {
        out = *cfg.output;
    } else {
        throw ConfigError("no output directory: pass --out or set \"output\" in the config");
    }
    return cfg;
}

int report_failure(const std::string& command, const std::exception& e) {
    const auto doc = diagnostic(command, e);
    std::cerr << doc.dump() << '\n';
    return doc["exit_code"].get<int>();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"caslab: measurement, competition and entanglement experiments"};
    app.set_version_flag("--version", std::string(CASLAB_VERSION));
    app.require_subcommand(1);

    CommonFlags run_flags, sweep_flags;
    auto* run = app.add_subcommand("run", "run one experiment");
    add_common(run, run_flags);

    auto* sweep = app.add_subcommand("sweep", "run the config's parameter grid");
    add_common(sweep, sweep_flags);
    std::optional<std::size_t> max_points;
    sweep->add_option("--max-points", max_points, "stop after this many new points (resume later)");

    std::string plot_input, plot_kind, plot_out;
    auto* plot = app.add_subcommand("plot", "render a results CSV as SVG");
    plot->add_option("results", plot_input, "results CSV")->required();
    plot->add_option("--kind", plot_kind, "survival | entropy | amplitude_race | dominance | spacing | chsh")->required();
    plot->add_option("--out", plot_out, "SVG path (default: ./<results stem>_<kind>.svg)");

    std::string validate_config;
    std::vector<std::string> validate_dirs;
    bool print_schema = false;
    auto* validate = app.add_subcommand("validate", "check a config or output directories");
    validate->add_option("--config", validate_config, "config to check");
    validate->add_flag("--schema", print_schema, "print the config schema");
    validate->add_option("dirs", validate_dirs, "output directories to check against their manifests");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    std::string command = app.get_subcommands().front()->get_name();
    try {
        if (*run) {
            fs::path out;
            const auto cfg = load(run_flags, out);
            if (!cfg.grid.empty()) throw ConfigError("grid: configs with a grid run through 'sweep'");
            HarnessOptions options{run_flags.jobs, output_format_from_string(run_flags.format)};
            const auto report = run_to_directory(cfg, out, options);
            std::cout << report.summary.dump(2) << '\n';
            return kExitOk;
        }
        if (*sweep) {
            fs::path out;
            const auto cfg = load(sweep_flags, out);
            SweepOptions options{{sweep_flags.jobs, output_format_from_string(sweep_flags.format)}, max_points};
            const auto report = run_sweep(cfg, out, options);
            nlohmann::ordered_json doc{{"points", report.points},   {"executed", report.executed},
                                       {"skipped", report.skipped}, {"failed", report.failed},
                                       {"pending", report.pending}, {"complete", report.complete}};
            std::cout << doc.dump(2) << '\n';
            return report.exit_code();
        }
        if (*plot) {
            const auto kind = plot_kind_from_string(plot_kind);
            fs::path out = plot_out;
            if (out.empty()) {
                // Current directory, so run directories keep matching their manifests.
                out = fs::path(plot_input).stem().string() + "_" + plot_kind + ".svg";
            }
            plot_file(plot_input, kind, out);
            log_info("wrote " + out.string());
            return kExitOk;
        }
        if (*validate) {
            if (print_schema) std::cout << schema_document().dump(2) << '\n';
            if (!validate_config.empty()) {
                const auto cfg = load_config(validate_config);
                std::cout << "config ok: kind " << to_string(cfg.kind) << ", hash " << config_hash(cfg) << ", "
                          << grid_size(cfg.grid) << " grid point(s)\n";
            }
            bool ok = true;
            for (const auto& d : validate_dirs) {
                const auto check = validate_output_directory(d);
                std::cout << d << ": " << (check.ok ? "ok" : "INVALID") << '\n';
                for (const auto& p : check.problems) std::cout << "  " << p << '\n';
                ok = ok && check.ok;
            }
            if (!print_schema && validate_config.empty() && validate_dirs.empty()) {
                throw ConfigError("validate: pass --config, --schema or at least one directory");
            }
            return ok ? kExitOk : kExitConfig;
        }
    } catch (const std::exception& e) {
        return report_failure(command, e);
    }
    return kExitOk;
}
