#include "okflow/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace okflow {

std::string to_string(RunOutcome outcome) {
    switch (outcome) {
        case RunOutcome::Completed: return "completed";
        case RunOutcome::SteadyState: return "steady-state";
        case RunOutcome::RejectStorm: return "reject-storm";
        case RunOutcome::SolverBreakdown: return "solver-breakdown";
    }
    return "unknown";
}

void RunConfig::validate() const {
    params.validate();
    solver.validate();
    tol.validate();
    if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
    if (!(ic.amplitude >= 0.0)) throw std::invalid_argument("ic amplitude must be non-negative");
    if (mode == SteppingMode::Fixed && !(fixed_dt > 0.0))
        throw std::invalid_argument("fixed-step mode requires a positive dt");
    if (max_rejects_per_step < 0)
        throw std::invalid_argument("max_rejects_per_step must be non-negative");
}

Field make_initial_condition(GridPtr grid, const IcSpec& ic) {
    Field phi(std::move(grid), ic.mean);
    if (ic.amplitude > 0.0) {
        // Raw engine output mapped to [-1, 1); mt19937_64 output is
        // standardized, so the field is identical across platforms.
        std::mt19937_64 rng(ic.seed);
        for (std::size_t i = 0; i < phi.size(); ++i) {
            const double u = 2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0;
            phi[i] = ic.mean + ic.amplitude * u;
        }
        const double shift = ic.mean - mean(phi);
        for (std::size_t i = 0; i < phi.size(); ++i) phi[i] += shift;
    }
    return phi;
}

bool detect_steady_state(const Field& prev, const Field& next, double dt, double eps) {
    require_same_grid(prev, next);
    if (!(dt > 0.0)) throw std::invalid_argument("detect_steady_state: dt must be positive");
    double maxdiff = 0.0;
    for (std::size_t i = 0; i < prev.size(); ++i)
        maxdiff = std::max(maxdiff, std::abs(next[i] - prev[i]));
    return maxdiff / dt < eps;
}

RunReport run(const RunConfig& cfg, const RunObserver* observer) {
    cfg.validate();
    const auto t_start = std::chrono::steady_clock::now();
    constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

    const GridPtr grid = std::make_shared<const GridSpec>(cfg.grid.make());
    Field phi = make_initial_condition(grid, cfg.ic);

    PhysicalParams params = cfg.params;
    params.phi_bar = mean(phi);  // frozen for the whole run
    params.validate();

    // mu0 = psi'(phi0) - eps^2 lap(phi0); only the Newton guess depends on it.
    Field mu = laplacian(phi);
    for (std::size_t i = 0; i < mu.size(); ++i)
        mu[i] = psi_d1(phi[i]) - params.epsilon * params.epsilon * mu[i];

    RunReport report;
    report.initial_energy = free_energy(phi, params);
    report.initial_mass = mean(phi);

    const bool fixed = cfg.mode == SteppingMode::Fixed;
    double t = 0.0;
    double dt = fixed ? cfg.fixed_dt : cfg.tol.dt0;
    double dt_last_accepted = 0.0;
    std::optional<Field> phi_prev;
    StepHistory hist;
    bool first_step = true;
    long step_index = 1;
    std::size_t next_snapshot = 0;

    auto emit = [&](const StepRecord& rec) {
        report.records.push_back(rec);
        if (observer && observer->on_record) observer->on_record(rec);
    };

    std::vector<double> snapshot_times = cfg.snapshot_times;
    std::sort(snapshot_times.begin(), snapshot_times.end());

    const double t_guard = cfg.t_end * (1.0 - 1e-12);
    while (t < t_guard) {
        int attempts = 0;
        double dt_att = std::min(dt, cfg.t_end - t);
        bool advanced = false;

        while (!advanced) {
            const State prev_state{phi, mu, t};
            SolveResult sol = solve_step(prev_state, prev_state, dt_att, params, cfg.solver);

            StepRecord rec;
            rec.step_index = step_index;
            rec.attempt_index = attempts;
            rec.time = t + dt_att;
            rec.dt = dt_att;
            rec.newton_iters = sol.stats.newton_iters;
            rec.linear_iters = sol.stats.linear_iters;
            report.total_linear += sol.stats.linear_iters;

            if (!sol.stats.converged) {
                rec.r = kNaN;
                rec.accepted = false;
                rec.free_energy = kNaN;
                rec.mass = kNaN;
                emit(rec);
                ++report.rejected_count;
                if (dt_att <= cfg.tol.dt_min * (1.0 + 1e-12)) {
                    report.outcome = RunOutcome::SolverBreakdown;
                    goto finish;
                }
                if (++attempts > cfg.max_rejects_per_step) {
                    report.outcome = RunOutcome::RejectStorm;
                    goto finish;
                }
                // no error estimate exists for a failed solve; halve instead
                dt_att = std::max(cfg.tol.dt_min, 0.5 * dt_att);
                continue;
            }

            rec.free_energy = free_energy(sol.state.phi, params);
            rec.mass = mean(sol.state.phi);

            double r = 0.0;
            bool forced = false;
            if (!fixed && !first_step) {
                const Field err = bdf2_error(sol.state.phi, phi, *phi_prev,
                                             dt_att, dt_last_accepted);
                r = wlte(err, sol.state.phi, cfg.tol);
                if (decide(r) == StepDecision::Reject) {
                    if (dt_att <= cfg.tol.dt_min * (1.0 + 1e-12)) {
                        forced = true;  // cannot shrink further
                    } else {
                        rec.r = r;
                        rec.accepted = false;
                        emit(rec);
                        ++report.rejected_count;
                        if (++attempts > cfg.max_rejects_per_step) {
                            report.outcome = RunOutcome::RejectStorm;
                            goto finish;
                        }
                        const double proposal = propose_dt(cfg.gains, hist, r, dt_att, cfg.tol);
                        dt_att = std::max(cfg.tol.dt_min, std::min(proposal, 0.9 * dt_att));
                        continue;
                    }
                }
            }

            rec.r = r;
            rec.accepted = true;
            emit(rec);
            ++report.accepted_count;
            if (forced) ++report.force_accepts;

            if (!fixed) {
                if (first_step) {
                    hist.seed(dt_att);  // next step repeats dt0
                } else {
                    const double next_dt = propose_dt(cfg.gains, hist, r, dt_att, cfg.tol);
                    hist.push(r, dt_att);
                    dt = next_dt;
                }
            }

            phi_prev = std::move(phi);
            phi = std::move(sol.state.phi);
            mu = std::move(sol.state.mu);
            t += dt_att;
            dt_last_accepted = dt_att;
            first_step = false;
            ++step_index;
            advanced = true;

            while (next_snapshot < snapshot_times.size() &&
                   t >= snapshot_times[next_snapshot] * (1.0 - 1e-12)) {
                if (observer && observer->on_snapshot)
                    observer->on_snapshot(phi, t, snapshot_times[next_snapshot]);
                ++next_snapshot;
            }

            if (cfg.steady_state_eps > 0.0 &&
                detect_steady_state(*phi_prev, phi, dt_att, cfg.steady_state_eps)) {
                report.outcome = RunOutcome::SteadyState;
                goto finish;
            }
        }
    }

finish:
    const long attempts_total = report.accepted_count + report.rejected_count;
    if (attempts_total > 0) {
        long newton_total = 0;
        for (const auto& rec : report.records) newton_total += rec.newton_iters;
        report.avg_newton = static_cast<double>(newton_total) / attempts_total;
        report.avg_linear = static_cast<double>(report.total_linear) / attempts_total;
    }
    report.final_phi = std::move(phi);
    report.final_time = t;
    report.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

ConvergenceStudy run_convergence_study(const RunConfig& base, double horizon,
                                       const std::vector<int>& step_counts,
                                       int reference_steps) {
    if (!(horizon > 0.0)) throw std::invalid_argument("convergence horizon must be positive");
    if (step_counts.empty()) throw std::invalid_argument("need at least one step count");
    for (int s : step_counts)
        if (s < 1 || s >= reference_steps)
            throw std::invalid_argument("step counts must be positive and below the reference");

    auto fixed_run = [&](int steps) {
        RunConfig cfg = base;
        cfg.mode = SteppingMode::Fixed;
        cfg.fixed_dt = horizon / steps;
        cfg.t_end = horizon;
        cfg.snapshot_times.clear();
        cfg.steady_state_eps = 0.0;
        RunReport rep = run(cfg);
        if (rep.outcome != RunOutcome::Completed)
            throw std::runtime_error("convergence study run aborted: " + to_string(rep.outcome));
        return std::move(*rep.final_phi);
    };

    const Field ref = fixed_run(reference_steps);

    ConvergenceStudy study;
    for (int steps : step_counts) {
        const Field sol = fixed_run(steps);
        double acc = 0.0;
        for (std::size_t i = 0; i < sol.size(); ++i) {
            const double d = sol[i] - ref[i];
            acc += d * d;
        }
        study.dts.push_back(horizon / steps);
        study.errors.push_back(std::sqrt(acc / static_cast<double>(sol.size())));
    }

    // least-squares slope of log(err) against log(dt)
    const std::size_t m = study.dts.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double x = std::log(study.dts[i]);
        const double y = std::log(std::max(study.errors[i], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = m * sxx - sx * sx;
    study.observed_order = denom != 0.0 ? (m * sxy - sx * sy) / denom : 0.0;
    return study;
}

}  // namespace okflow
