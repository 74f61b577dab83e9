// solver.hpp
// Newton's method with a matrix-free restarted GMRES inner solver for the
// per-step coupled (phi, mu) system.

#pragma once

#include <vector>

#include "okflow/model.hpp"

namespace okflow {

enum class PreconditionerKind { Spectral, Diagonal, None };

std::string to_string(PreconditionerKind kind);
PreconditionerKind preconditioner_from_string(const std::string& name);

struct SolverSettings {
    double newton_rtol = 1e-5;
    double lin_rtol = 1e-5;
    double lin_atol = 1e-8;
    int max_newton = 30;
    int max_lin = 2000;
    PreconditionerKind preconditioner = PreconditionerKind::Spectral;
    int gmres_restart = 100;

    void validate() const;
};

struct SolveStats {
    int newton_iters = 0;
    long linear_iters = 0;  // summed over all Newton steps, converged or not
    bool converged = false;
    double final_residual_norm = 0.0;
    std::vector<double> residual_history;  // stacked l2 norm per Newton iterate
};

struct SolveResult {
    State state;
    SolveStats stats;
};

/// One implicit step: solve the coupled system for (phi, mu) at
/// prev.time + dt, starting Newton from `guess`. Convergence criterion is
/// the stacked residual l2 norm relative to its value at the guess, with an
/// absolute floor of 1e-12 so exact fixed points terminate immediately.
/// A non-converged result (Newton cap or linear stall) is reported through
/// stats.converged; the returned state is then the last iterate.
SolveResult solve_step(const State& prev, const State& guess, double dt,
                       const PhysicalParams& params, const SolverSettings& settings);

}  // namespace okflow
