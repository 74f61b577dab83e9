#include "okflow/bench.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace okflow {

std::vector<BenchRow> run_bench(const std::vector<NamedConfig>& configs,
                                const std::vector<std::string>& controllers) {
    if (configs.empty()) throw std::invalid_argument("bench: need at least one config");
    if (controllers.empty()) throw std::invalid_argument("bench: need at least one controller");

    std::vector<BenchRow> rows;
    for (const auto& named : configs) {
        const std::size_t group_start = rows.size();
        for (const auto& controller : controllers) {
            BenchRow row;
            row.config_name = named.name;
            row.controller = controller;
            try {
                RunConfig cfg = named.config;
                cfg.mode = SteppingMode::Adaptive;
                const double rho = cfg.gains.rho;
                cfg.gains = ControllerGains::preset(controller);
                cfg.gains.rho = rho;
                const RunReport rep = run(cfg);
                row.status = to_string(rep.outcome);
                row.ok = rep.outcome == RunOutcome::Completed ||
                         rep.outcome == RunOutcome::SteadyState;
                row.accepted = rep.accepted_count;
                row.rejected = rep.rejected_count;
                row.avg_newton = rep.avg_newton;
                row.avg_linear = rep.avg_linear;
                row.total_linear = rep.total_linear;
            } catch (const std::exception& e) {
                row.ok = false;
                row.status = std::string("error: ") + e.what();
            }
            rows.push_back(std::move(row));
        }
        long worst = 0;
        for (std::size_t i = group_start; i < rows.size(); ++i)
            if (rows[i].ok) worst = std::max(worst, rows[i].total_linear);
        for (std::size_t i = group_start; i < rows.size(); ++i)
            rows[i].rel_effort =
                rows[i].ok && worst > 0
                    ? static_cast<double>(rows[i].total_linear) / static_cast<double>(worst)
                    : 0.0;
    }
    return rows;
}

std::string format_bench_table(const std::vector<BenchRow>& rows) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-18s %-10s %9s %9s %12s %12s %13s %9s  %s\n",
                  "config", "controller", "accepted", "rejected", "avg_newton",
                  "avg_linear", "total_linear", "rel_cpu", "status");
    out << line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof(line),
                      "%-18s %-10s %9ld %9ld %12.4f %12.4f %13ld %9.2f  %s\n",
                      r.config_name.c_str(), r.controller.c_str(), r.accepted, r.rejected,
                      r.avg_newton, r.avg_linear, r.total_linear, r.rel_effort,
                      r.status.c_str());
        out << line;
    }
    return out.str();
}

void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("bench: cannot open '" + path + "' for writing");
    out << "config,controller,ok,accepted,rejected,avg_newton,avg_linear,"
           "total_linear,rel_cpu_effort,status\n";
    char buf[64];
    for (const auto& r : rows) {
        out << r.config_name << ',' << r.controller << ',' << (r.ok ? 1 : 0) << ','
            << r.accepted << ',' << r.rejected << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", r.avg_newton);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", r.avg_linear);
        out << buf << ',';
        out << r.total_linear << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", r.rel_effort);
        out << buf << ',' << r.status << '\n';
    }
}

}  // namespace okflow
