// model.hpp
// Ohta-Kawasaki / Cahn-Hilliard physics: the double-well potential, the
// energy-stable chemical-potential closure, nodal residuals of the coupled
// (phi, mu) step, the exact Jacobian action, the screened Poisson solve for
// the nonlocal term, and the free-energy diagnostic.

#pragma once

#include <utility>

#include "okflow/grid.hpp"

namespace okflow {

/// Model constants for one PDE instance.
struct PhysicalParams {
    double epsilon = 0.1;   // interface parameter
    double sigma = 0.0;     // nonlocal strength, >= 0
    double phi_bar = 0.3;   // fixed mean, frozen from the initial condition
    double mobility = 1.0;

    void validate() const;
};

/// Coupled unknowns at one time level.
struct State {
    Field phi;
    Field mu;
    double time = 0.0;
};

// Double well psi(x) = (x^2-1)^2 / 4 and its derivatives.
inline double psi(double x) {
    const double q = x * x - 1.0;
    return 0.25 * q * q;
}
inline double psi_d1(double x) { return x * x * x - x; }
inline double psi_d2(double x) { return 3.0 * x * x - 1.0; }
inline double psi_d3(double x) { return 6.0 * x; }

// Truncated-Taylor closure of psi' at the new time level. Satisfies
//   psi_tilde_prime(a,b)*(a-b) - (psi(a)-psi(b)) == (a-b)^4/4
// exactly, which is what makes the implicit step energy stable.
inline double psi_tilde_prime(double a, double b) {
    const double j = a - b;
    return psi_d1(a) - 0.5 * psi_d2(a) * j + psi_d3(a) * j * j / 6.0;
}

// Derivative of psi_tilde_prime with respect to its first argument.
inline double psi_tilde_prime_da(double a, double b) {
    const double j = a - b;
    return 0.5 * psi_d2(a) - psi_d3(a) * j / 6.0 + j * j;
}

/// Nodal residuals of the implicit step from `prev` to `next`:
///   R_phi = (phi1 - phi0)/dt - M lap(mu1) + sigma((phi1+phi0)/2 - phi_bar)
///   R_mu  = mu1 - psi_tilde_prime(phi1, phi0) + eps^2 lap((phi1+phi0)/2)
std::pair<Field, Field> residual(const State& next, const State& prev, double dt,
                                 const PhysicalParams& params);

void residual_into(const GridSpec& g, const PhysicalParams& params, double dt,
                   std::span<const double> phi_next, std::span<const double> mu_next,
                   std::span<const double> phi_prev,
                   std::span<double> out_rphi, std::span<double> out_rmu,
                   std::span<double> scratch);

/// Action of the exact Jacobian of `residual` with respect to
/// (phi_next, mu_next) on a direction (dphi, dmu).
std::pair<Field, Field> jacobian_apply(const State& next, const State& prev, double dt,
                                       const PhysicalParams& params,
                                       const std::pair<Field, Field>& direction);

void jacobian_apply_into(const GridSpec& g, const PhysicalParams& params, double dt,
                         std::span<const double> phi_next, std::span<const double> phi_prev,
                         std::span<const double> dphi, std::span<const double> dmu,
                         std::span<double> out_jphi, std::span<double> out_jmu,
                         std::span<double> scratch);

/// Solves -lap(v) = rhs - mean(rhs) with gauge mean(v) = 0, by conjugate
/// gradients in the quadrature-weighted inner product to relative residual
/// 1e-10. Throws std::runtime_error if the iteration cap is hit.
Field poisson_solve(const Field& rhs, double rel_tol = 1e-10, int max_iter = 0);

/// F(phi) = integrate(psi(phi)) + eps^2/2 * grad_norm_sq_integral(phi)
///        + sigma/2 * integrate((phi - phi_bar) * v),  -lap(v) = phi - phi_bar.
double free_energy(const Field& phi, const PhysicalParams& params);

}  // namespace okflow
