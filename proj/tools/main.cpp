// okflow CLI: run simulations, compare step-size controllers, measure the
// integrator's temporal order, and extract plot columns from run output.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "okflow/analysis.hpp"
#include "okflow/bench.hpp"
#include "okflow/config.hpp"
#include "okflow/driver.hpp"
#include "okflow/snapshot.hpp"
#include "okflow/timeseries.hpp"

namespace fs = std::filesystem;
using namespace okflow;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitAborted = 3;

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) parts.push_back(item);
    return parts;
}

struct RunOverrides {
    std::string controller;
    double fixed_dt = 0.0;
    std::optional<std::uint64_t> seed;
    std::string snapshots;
};

void apply_overrides(RunConfig& cfg, const RunOverrides& ov) {
    if (!ov.controller.empty()) {
        if (ov.controller == "fixed") {
            if (!(ov.fixed_dt > 0.0))
                throw ConfigError("--controller fixed requires --dt");
            cfg.mode = SteppingMode::Fixed;
            cfg.fixed_dt = ov.fixed_dt;
        } else {
            cfg.mode = SteppingMode::Adaptive;
            const double rho = cfg.gains.rho;
            cfg.gains = ControllerGains::preset(ov.controller);
            cfg.gains.rho = rho;
        }
    } else if (ov.fixed_dt > 0.0) {
        cfg.mode = SteppingMode::Fixed;
        cfg.fixed_dt = ov.fixed_dt;
    }
    if (ov.seed) cfg.ic.seed = *ov.seed;
    if (!ov.snapshots.empty()) {
        cfg.snapshot_times.clear();
        for (const auto& t : split_csv(ov.snapshots))
            cfg.snapshot_times.push_back(std::stod(t));
    }
}

std::string snapshot_filename(int index, double requested_t) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "snapshot_%03d_t%.6g.okf", index, requested_t);
    return buf;
}

int cmd_run(const std::string& config_path, const RunOverrides& ov, const std::string& out_dir) {
    RunConfig cfg = parse_config(config_path);
    apply_overrides(cfg, ov);
    cfg.validate();

    fs::create_directories(out_dir);
    TimeSeriesWriter series((fs::path(out_dir) / "timeseries.csv").string());
    int snap_index = 0;

    RunObserver obs;
    obs.on_record = [&](const StepRecord& rec) { series.append(rec); };
    obs.on_snapshot = [&](const Field& phi, double t, double requested) {
        const auto name = fs::path(out_dir) / snapshot_filename(snap_index++, requested);
        write_snapshot(phi, t, name.string());
    };

    const RunReport rep = run(cfg, &obs);
    write_snapshot(*rep.final_phi, rep.final_time,
                   (fs::path(out_dir) / "final.okf").string());

    const PatternMetrics pattern = classify_pattern(*rep.final_phi);
    const double final_energy =
        rep.records.empty() ? rep.initial_energy : rep.records.back().free_energy;
    const double final_mass =
        rep.records.empty() ? rep.initial_mass : rep.records.back().mass;

    nlohmann::json summary{
        {"outcome", to_string(rep.outcome)},
        {"final_time", rep.final_time},
        {"accepted_steps", rep.accepted_count},
        {"rejected_steps", rep.rejected_count},
        {"force_accepts", rep.force_accepts},
        {"avg_newton_iters", rep.avg_newton},
        {"avg_linear_iters", rep.avg_linear},
        {"total_linear_iters", rep.total_linear},
        {"initial_energy", rep.initial_energy},
        {"final_energy", final_energy},
        {"initial_mass", rep.initial_mass},
        {"final_mass", final_mass},
        {"mass_drift", std::abs(final_mass - rep.initial_mass)},
        {"pattern", to_string(pattern.pattern)},
        {"wall_time_seconds", rep.wall_time},
    };
    std::ofstream((fs::path(out_dir) / "summary.json").string()) << summary.dump(2) << '\n';

    std::printf("outcome: %s  t=%.6g  accepted=%ld rejected=%ld\n",
                to_string(rep.outcome).c_str(), rep.final_time, rep.accepted_count,
                rep.rejected_count);
    std::printf("energy: %.10g -> %.10g  mass drift: %.3e  pattern: %s\n",
                rep.initial_energy, final_energy, std::abs(final_mass - rep.initial_mass),
                to_string(pattern.pattern).c_str());
    std::printf("effort: avg newton %.3f, avg linear %.2f, total linear %ld (%.2fs)\n",
                rep.avg_newton, rep.avg_linear, rep.total_linear, rep.wall_time);

    const bool aborted = rep.outcome == RunOutcome::RejectStorm ||
                         rep.outcome == RunOutcome::SolverBreakdown;
    return aborted ? kExitAborted : kExitOk;
}

int cmd_bench(const std::vector<std::string>& config_paths, const std::string& controllers_csv,
              std::optional<std::uint64_t> seed, const std::string& out_dir) {
    std::vector<NamedConfig> configs;
    for (const auto& path : config_paths) {
        NamedConfig nc;
        nc.name = fs::path(path).stem().string();
        nc.config = parse_config(path);
        if (seed) nc.config.ic.seed = *seed;
        configs.push_back(std::move(nc));
    }
    const auto controllers = split_csv(controllers_csv);
    const auto rows = run_bench(configs, controllers);

    std::fputs(format_bench_table(rows).c_str(), stdout);
    fs::create_directories(out_dir);
    write_bench_csv((fs::path(out_dir) / "bench.csv").string(), rows);

    for (const auto& r : rows)
        if (!r.ok) return kExitAborted;
    return kExitOk;
}

int cmd_converge(const std::string& config_path, double horizon, const std::string& steps_csv,
                 int ref_steps, const std::string& out_dir) {
    RunConfig cfg = parse_config(config_path);
    std::vector<int> counts;
    for (const auto& s : split_csv(steps_csv)) counts.push_back(std::stoi(s));

    const ConvergenceStudy study = run_convergence_study(cfg, horizon, counts, ref_steps);

    std::printf("%12s %16s %10s\n", "dt", "l2_error", "order");
    for (std::size_t i = 0; i < study.dts.size(); ++i) {
        double pair_order = 0.0;
        if (i > 0)
            pair_order = std::log(study.errors[i - 1] / study.errors[i]) /
                         std::log(study.dts[i - 1] / study.dts[i]);
        std::printf("%12.6g %16.8e %10.4f\n", study.dts[i], study.errors[i], pair_order);
    }
    std::printf("observed order (least squares): %.4f\n", study.observed_order);

    fs::create_directories(out_dir);
    std::ofstream csv((fs::path(out_dir) / "converge.csv").string());
    csv << "dt,l2_error\n";
    char buf[64];
    for (std::size_t i = 0; i < study.dts.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", study.dts[i], study.errors[i]);
        csv << buf;
    }
    return kExitOk;
}

int cmd_plotdata(const std::string& series_path, const std::string& cols_csv,
                 const std::string& out_path) {
    const auto records = read_timeseries(series_path);
    const auto cols = split_csv(cols_csv);

    auto column_value = [](const StepRecord& r, const std::string& name) -> double {
        if (name == "step_index") return static_cast<double>(r.step_index);
        if (name == "attempt_index") return static_cast<double>(r.attempt_index);
        if (name == "time") return r.time;
        if (name == "dt") return r.dt;
        if (name == "r") return r.r;
        if (name == "accepted") return r.accepted ? 1.0 : 0.0;
        if (name == "newton_iters") return static_cast<double>(r.newton_iters);
        if (name == "linear_iters") return static_cast<double>(r.linear_iters);
        if (name == "free_energy") return r.free_energy;
        if (name == "mass") return r.mass;
        throw ConfigError("unknown column '" + name + "'");
    };

    std::ostringstream out;
    for (std::size_t i = 0; i < cols.size(); ++i)
        out << cols[i] << (i + 1 < cols.size() ? "," : "\n");
    char buf[40];
    for (const auto& rec : records) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", column_value(rec, cols[i]));
            out << buf << (i + 1 < cols.size() ? "," : "\n");
        }
    }
    if (out_path.empty()) {
        std::fputs(out.str().c_str(), stdout);
    } else {
        std::ofstream f(out_path, std::ios::trunc);
        f << out.str();
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cahn-Hilliard / Ohta-Kawasaki simulator with feedback-control "
                 "adaptive time stepping"};
    app.require_subcommand(1);

    // run
    auto* run_cmd = app.add_subcommand("run", "Run one simulation");
    std::string run_config, run_out = "okflow_out";
    RunOverrides run_ov;
    std::uint64_t seed_value = 0;
    bool seed_set = false;
    run_cmd->add_option("--config", run_config, "Config file (JSON)")->required();
    run_cmd->add_option("--controller", run_ov.controller, "i|pid|pc11|fixed");
    run_cmd->add_option("--dt", run_ov.fixed_dt, "Step size for fixed mode");
    run_cmd->add_option("--seed", seed_value, "Initial-condition seed")
        ->each([&](const std::string&) { seed_set = true; });
    run_cmd->add_option("--out", run_out, "Output directory");
    run_cmd->add_option("--snapshots", run_ov.snapshots, "Comma-separated snapshot times");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Compare controllers across configs");
    std::vector<std::string> bench_configs;
    std::string bench_controllers = "i,pid,pc11", bench_out = "okflow_out";
    std::uint64_t bench_seed = 0;
    bool bench_seed_set = false;
    bench_cmd->add_option("--config", bench_configs, "Config file(s)")->required();
    bench_cmd->add_option("--controllers", bench_controllers, "Comma-separated controllers");
    bench_cmd->add_option("--seed", bench_seed, "Override seed for all runs")
        ->each([&](const std::string&) { bench_seed_set = true; });
    bench_cmd->add_option("--out", bench_out, "Output directory");

    // converge
    auto* conv_cmd = app.add_subcommand("converge", "Fixed-step temporal order study");
    std::string conv_config, conv_steps = "32,64,128,256,512", conv_out = "okflow_out";
    double conv_horizon = 0.02;
    int conv_ref = 4096;
    conv_cmd->add_option("--config", conv_config, "Config file (JSON)")->required();
    conv_cmd->add_option("--horizon", conv_horizon, "Study end time");
    conv_cmd->add_option("--steps", conv_steps, "Comma-separated step counts");
    conv_cmd->add_option("--ref", conv_ref, "Reference step count");
    conv_cmd->add_option("--out", conv_out, "Output directory");

    // plotdata
    auto* plot_cmd = app.add_subcommand("plotdata", "Extract columns from a time series");
    std::string plot_series, plot_cols = "time,free_energy", plot_out;
    plot_cmd->add_option("--series", plot_series, "timeseries.csv path")->required();
    plot_cmd->add_option("--cols", plot_cols, "Comma-separated column names");
    plot_cmd->add_option("--out", plot_out, "Output file (stdout if omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            if (seed_set) run_ov.seed = seed_value;
            return cmd_run(run_config, run_ov, run_out);
        }
        if (*bench_cmd) {
            std::optional<std::uint64_t> s;
            if (bench_seed_set) s = bench_seed;
            return cmd_bench(bench_configs, bench_controllers, s, bench_out);
        }
        if (*conv_cmd)
            return cmd_converge(conv_config, conv_horizon, conv_steps, conv_ref, conv_out);
        if (*plot_cmd) return cmd_plotdata(plot_series, plot_cols, plot_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitAborted;
    }
    return kExitOk;
}
