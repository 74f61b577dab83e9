// driver.hpp
// Time-marching loop: attempt -> solve -> estimate -> decide -> advance or
// retry, with per-attempt diagnostics, deterministic initial conditions,
// steady-state detection, fixed-step mode, and the temporal-order study.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "okflow/adaptivity.hpp"
#include "okflow/model.hpp"
#include "okflow/solver.hpp"

namespace okflow {

/// Seeded random perturbation around a target mean.
struct IcSpec {
    double mean = 0.3;
    double amplitude = 0.05;
    std::uint64_t seed = 42;
};

enum class SteppingMode { Adaptive, Fixed };

struct GridConfig {
    std::vector<int> nodes{64, 64};
    std::vector<double> lengths{1.0, 1.0};
    BoundaryKind bc = BoundaryKind::Periodic;

    GridSpec make() const { return GridSpec(nodes, lengths, bc); }
};

struct RunConfig {
    GridConfig grid;
    PhysicalParams params;
    SolverSettings solver;
    Tolerances tol;
    ControllerGains gains;
    SteppingMode mode = SteppingMode::Adaptive;
    double fixed_dt = 0.0;  // required in Fixed mode
    double t_end = 0.5;
    IcSpec ic;
    std::vector<double> snapshot_times;
    double steady_state_eps = 0.0;  // 0 disables detection
    int max_rejects_per_step = 20;

    void validate() const;
};

/// Diagnostics for one solve attempt, accepted or not.
struct StepRecord {
    long step_index = 0;     // index of the step being attempted (1-based)
    int attempt_index = 0;   // 0 for the first try of a step
    double time = 0.0;       // prospective time at the end of the attempt
    double dt = 0.0;
    double r = 0.0;          // weighted error norm; NaN if the solve failed
    bool accepted = false;
    int newton_iters = 0;
    long linear_iters = 0;
    double free_energy = 0.0;
    double mass = 0.0;
};

enum class RunOutcome {
    Completed,        // reached t_end
    SteadyState,      // detector fired
    RejectStorm,      // max rejects per step exceeded; report is partial
    SolverBreakdown,  // nonlinear solve failed at dt_min; report is partial
};

std::string to_string(RunOutcome outcome);

struct RunReport {
    std::vector<StepRecord> records;
    long accepted_count = 0;
    long rejected_count = 0;
    long force_accepts = 0;  // steps accepted only because dt hit dt_min
    double avg_newton = 0.0;
    double avg_linear = 0.0;
    long total_linear = 0;  // absolute CPU effort across all attempts
    double wall_time = 0.0;
    RunOutcome outcome = RunOutcome::Completed;
    double initial_energy = 0.0;
    double initial_mass = 0.0;
    std::optional<Field> final_phi;
    double final_time = 0.0;
};

/// Observer hooks for streaming output; all optional.
struct RunObserver {
    std::function<void(const StepRecord&)> on_record;
    std::function<void(const Field& phi, double t, double requested_t)> on_snapshot;
};

/// phi0 = mean + amplitude * u with u i.i.d. uniform on [-1, 1] from a
/// deterministic generator, then shifted so the discrete mean matches the
/// target exactly.
Field make_initial_condition(GridPtr grid, const IcSpec& ic);

/// true iff max|next - prev| / dt < eps.
bool detect_steady_state(const Field& prev, const Field& next, double dt, double eps);

RunReport run(const RunConfig& cfg, const RunObserver* observer = nullptr);

/// Fixed-step refinement study: runs to `horizon` with horizon/steps for
/// each entry of `step_counts`, compares final fields against a
/// horizon/reference_steps run, and fits the observed order.
struct ConvergenceStudy {
    std::vector<double> dts;
    std::vector<double> errors;  // RMS vs the reference at the final time
    double observed_order = 0.0; // least-squares slope of log err vs log dt
};

ConvergenceStudy run_convergence_study(const RunConfig& base, double horizon,
                                       const std::vector<int>& step_counts,
                                       int reference_steps);

}  // namespace okflow
