// adhoc-arena: deterministic ad hoc routing experiments. `run` executes one
// replica from a scenario file, `sweep` expands a grid file into replicas and
// aggregates them per cell, `plot` renders gnuplot panel scripts from an
// aggregate CSV. ADHOC_ARENA_SEED overrides the (master) seed of run/sweep.

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "arena/engine.hpp"
#include "arena/plots.hpp"
#include "arena/report.hpp"
#include "arena/scenario.hpp"
#include "arena/sweep.hpp"

namespace {

std::optional<std::uint64_t> env_seed_override() {
    const char* raw = std::getenv("ADHOC_ARENA_SEED");
    if (raw == nullptr || *raw == '\0') return std::nullopt;
    return arena::detail::parse_seed("ADHOC_ARENA_SEED", raw);
}

int cmd_run(const std::string& file, const std::filesystem::path& out_dir, bool route_log,
            bool mobility_trace) {
    arena::Scenario scn = arena::parse_scenario_file(file);
    if (const auto seed = env_seed_override()) scn.seed = *seed;

    arena::RunOptions opt;
    opt.route_log = route_log;
    opt.mobility_trace = mobility_trace;
    const arena::ReplicaResult res = arena::run_replica(scn, opt);

    std::filesystem::create_directories(out_dir);
    arena::write_text_file(out_dir / "report.csv",
                           arena::report_csv({arena::report_row_from(scn, res.metrics)}));
    arena::write_text_file(out_dir / "energy.csv", arena::energy_csv(res.ledger));
    arena::write_text_file(out_dir / "sessions.csv", arena::sessions_csv(res.sessions));
    if (route_log) {
        arena::write_text_file(out_dir / "route_events.csv",
                               arena::route_events_csv(res.route_events));
    }
    if (mobility_trace) {
        arena::write_text_file(out_dir / "mobility.csv",
                               arena::mobility_trace_csv(res.waypoint_trace));
    }
    std::cout << "replica " << scn.hash_hex() << " finished at t=" << res.end_time
              << "s; reports in " << out_dir.string() << "\n";
    return 0;
}

int cmd_sweep(const std::string& file, const std::filesystem::path& out_dir, int jobs,
              bool resume) {
    arena::SweepGrid grid = arena::parse_grid_file(file);
    if (const auto seed = env_seed_override()) grid.master_seed = *seed;

    const arena::SweepOutcome outcome = arena::run_sweep(grid, out_dir, jobs, resume);
    std::cout << "sweep: " << outcome.total << " replicas (" << outcome.executed
              << " executed, " << outcome.reused << " reused, " << outcome.failures.size()
              << " failed); outputs in " << out_dir.string() << "\n";
    for (const auto& [hash, msg] : outcome.failures) {
        std::cerr << "replica " << hash << " failed: " << msg << "\n";
    }
    return outcome.failures.empty() ? 0 : 1;
}

int cmd_plot(const std::string& csv, const std::filesystem::path& out_dir) {
    const arena::PlotOutcome outcome = arena::generate_plots_from_csv(csv, out_dir);
    for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "plot: wrote " << outcome.files.size() << " files to " << out_dir.string()
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic ad hoc network routing arena"};
    app.require_subcommand(1);

    std::string run_file, run_out = "out";
    bool route_log = false, mobility_trace = false;
    CLI::App* run = app.add_subcommand("run", "run one replica from a scenario file");
    run->add_option("file", run_file, "scenario file")->required();
    run->add_option("--out", run_out, "output directory")->capture_default_str();
    run->add_flag("--route-log", route_log, "also write route_events.csv");
    run->add_flag("--mobility-trace", mobility_trace, "also write mobility.csv");

    std::string sweep_file, sweep_out = "out";
    int jobs = std::max(1u, std::thread::hardware_concurrency());
    bool resume = false;
    CLI::App* sweep = app.add_subcommand("sweep", "run every replica of a grid file");
    sweep->add_option("file", sweep_file, "grid file")->required();
    sweep->add_option("--out", sweep_out, "output directory")->capture_default_str();
    sweep->add_option("--jobs", jobs, "worker threads")->capture_default_str();
    sweep->add_flag("--resume", resume, "skip replicas already present in replicas.csv");

    std::string plot_csv, plot_out = "plots";
    CLI::App* plot = app.add_subcommand("plot", "render gnuplot panels from an aggregate CSV");
    plot->add_option("csv", plot_csv, "aggregate CSV from `sweep`")->required();
    plot->add_option("--out", plot_out, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (app.got_subcommand(run)) return cmd_run(run_file, run_out, route_log, mobility_trace);
        if (app.got_subcommand(sweep)) return cmd_sweep(sweep_file, sweep_out, jobs, resume);
        if (app.got_subcommand(plot)) return cmd_plot(plot_csv, plot_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
