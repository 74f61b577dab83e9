// adaptivity.hpp
// Feedback-control time-step adaptivity: extrapolation-based local error
// estimate, weighted error norm, and the exponent-family step controllers
// (I, PID, PC11) with safety factor and clamping.

#pragma once

#include <string>

#include "okflow/grid.hpp"

namespace okflow {

// Error estimates below this floor are treated as exactly resolved; the
// controller law divides by them, so exact zeros must not reach it.
inline constexpr double kErrorFloor = 1e-12;

/// Controller exponents and safety factor. Presets carry the literal
/// published gains (0.333, not 1/3).
struct ControllerGains {
    double kP = 0.0;
    double kI = 0.5;
    double kD = 0.0;
    double kT = 0.0;
    double rho = 0.9;
    std::string name = "i";

    static ControllerGains integral();
    static ControllerGains pid();
    static ControllerGains pc11();
    static ControllerGains preset(const std::string& name);
};

struct Tolerances {
    double tau_abs = 1e-4;
    double tau_rel = 1e-4;
    double dt_min = 1e-12;
    double dt_max = 5e-3;
    double dt0 = 1e-9;
    double growth_cap = 5.0;  // max per-proposal growth factor

    void validate() const;
};

/// Ring of the last two accepted error norms and step sizes. `*_prev` holds
/// the most recent accepted step, `*_prev2` the one before it; both are read
/// before the step being decided is pushed.
struct StepHistory {
    double r_prev2 = 1.0;
    double r_prev = 1.0;
    double dt_prev2 = 0.0;
    double dt_prev = 0.0;
    bool seeded = false;

    // Startup: pretend two unit-error steps of size dt0 were taken.
    void seed(double dt0);
    // Rotate in an accepted step.
    void push(double r, double dt);
};

/// Variable-step backward-difference error estimate from the last three
/// solution levels:
///   E = -(1/eta) phi_next + (1/(eta-1)) phi_n - (1/(eta(eta-1))) phi_prev,
///   eta = (dt_next + dt_n) / dt_next.
/// Exact zero on data affine in time; equals the half second difference for
/// equal steps.
Field bdf2_error(const Field& phi_next, const Field& phi_n, const Field& phi_prev,
                 double dt_next, double dt_n);

/// Weighted local truncation error norm:
///   r = sqrt( mean_i ( E_i / (tau_abs + tau_rel*max(|phi_i|, |phi_i+E_i|)) )^2 )
double wlte(const Field& error, const Field& phi_next, const Tolerances& tol);

/// Controller law:
///   dt_new = rho * (r_n/r_new)^kP * (1/r_new)^kI
///            * (r_n^2/(r_new r_nm1))^kD * (dt_cur/dt_prev)^kT * dt_cur
/// with all error values floored at kErrorFloor, growth capped at
/// tol.growth_cap per call, and the result clamped to [dt_min, dt_max].
double propose_dt(const ControllerGains& gains, const StepHistory& hist,
                  double r_new, double dt_cur, const Tolerances& tol);

enum class StepDecision { Accept, Reject };

/// Accept iff the weighted error is within tolerance (r <= 1, inclusive).
StepDecision decide(double r_new);

}  // namespace okflow
