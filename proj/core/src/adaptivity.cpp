#include "okflow/adaptivity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace okflow {

ControllerGains ControllerGains::integral() {
    return {0.0, 0.5, 0.0, 0.0, 0.9, "i"};
}

ControllerGains ControllerGains::pid() {
    return {0.075, 0.175, 0.01, 0.0, 0.9, "pid"};
}

ControllerGains ControllerGains::pc11() {
    return {0.333, 0.333, 0.0, 1.0, 0.9, "pc11"};
}

ControllerGains ControllerGains::preset(const std::string& name) {
    if (name == "i" || name == "integral") return integral();
    if (name == "pid") return pid();
    if (name == "pc11") return pc11();
    throw std::invalid_argument("unknown controller preset '" + name + "'");
}

void Tolerances::validate() const {
    if (!(tau_abs > 0.0) || !(tau_rel > 0.0))
        throw std::invalid_argument("tau_abs and tau_rel must be positive");
    if (!(dt_min > 0.0) || !(dt_min <= dt0) || !(dt0 <= dt_max))
        throw std::invalid_argument("step bounds must satisfy 0 < dt_min <= dt0 <= dt_max");
    if (!(growth_cap > 1.0))
        throw std::invalid_argument("growth_cap must exceed 1");
}

void StepHistory::seed(double dt0) {
    r_prev2 = 1.0;
    r_prev = 1.0;
    dt_prev2 = dt0;
    dt_prev = dt0;
    seeded = true;
}

void StepHistory::push(double r, double dt) {
    r_prev2 = r_prev;
    r_prev = std::max(r, kErrorFloor);
    dt_prev2 = dt_prev;
    dt_prev = dt;
}

Field bdf2_error(const Field& phi_next, const Field& phi_n, const Field& phi_prev,
                 double dt_next, double dt_n) {
    require_same_grid(phi_next, phi_n);
    require_same_grid(phi_next, phi_prev);
    if (!(dt_next > 0.0) || !(dt_n > 0.0))
        throw std::invalid_argument("bdf2_error: step sizes must be positive");

    const double eta = (dt_next + dt_n) / dt_next;
    if (eta <= 1.0 + 1e-14)
        throw std::invalid_argument("bdf2_error: degenerate step ratio (eta <= 1)");

    const double c_next = -1.0 / eta;
    const double c_n = 1.0 / (eta - 1.0);
    const double c_prev = -1.0 / (eta * (eta - 1.0));

    Field e(phi_next.grid_ptr());
    for (std::size_t i = 0; i < e.size(); ++i)
        e[i] = c_next * phi_next[i] + c_n * phi_n[i] + c_prev * phi_prev[i];
    return e;
}

double wlte(const Field& error, const Field& phi_next, const Tolerances& tol) {
    require_same_grid(error, phi_next);
    const std::size_t n = error.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = phi_next[i];
        const double denom =
            tol.tau_abs + tol.tau_rel * std::max(std::abs(p), std::abs(p + error[i]));
        const double q = error[i] / denom;
        acc += q * q;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

double propose_dt(const ControllerGains& gains, const StepHistory& hist,
                  double r_new, double dt_cur, const Tolerances& tol) {
    const double rp = std::max(r_new, kErrorFloor);
    const double rn = std::max(hist.r_prev, kErrorFloor);
    const double rn1 = std::max(hist.r_prev2, kErrorFloor);

    double factor = gains.rho;
    factor *= std::pow(rn / rp, gains.kP);
    factor *= std::pow(1.0 / rp, gains.kI);
    factor *= std::pow(rn * rn / (rp * rn1), gains.kD);
    if (gains.kT != 0.0 && hist.dt_prev > 0.0)
        factor *= std::pow(dt_cur / hist.dt_prev, gains.kT);

    double dt = factor * dt_cur;
    dt = std::min(dt, tol.growth_cap * dt_cur);
    return std::clamp(dt, tol.dt_min, tol.dt_max);
}

StepDecision decide(double r_new) {
    return r_new <= 1.0 ? StepDecision::Accept : StepDecision::Reject;
}

}  // namespace okflow
