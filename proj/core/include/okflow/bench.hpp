// bench.hpp
// Controller-comparison harness: runs every (config, controller) pair and
// tabulates step counts, solver-iteration averages, and the relative CPU
// effort (total linear iterations normalized so the worst controller per
// config reads exactly 1.00).

#pragma once

#include <string>
#include <vector>

#include "okflow/driver.hpp"

namespace okflow {

struct BenchRow {
    std::string config_name;
    std::string controller;
    bool ok = false;           // false if the run aborted
    std::string status;        // run outcome
    long accepted = 0;
    long rejected = 0;
    double avg_newton = 0.0;
    double avg_linear = 0.0;
    long total_linear = 0;
    double rel_effort = 0.0;   // total_linear / max over the config's controllers
};

struct NamedConfig {
    std::string name;
    RunConfig config;
};

/// Run aborts become failed rows, never harness failures.
std::vector<BenchRow> run_bench(const std::vector<NamedConfig>& configs,
                                const std::vector<std::string>& controllers);

std::string format_bench_table(const std::vector<BenchRow>& rows);
void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows);

}  // namespace okflow
