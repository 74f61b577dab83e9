#include "okflow/solver.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>

#include "spectral.hpp"

namespace okflow {

std::string to_string(PreconditionerKind kind) {
    switch (kind) {
        case PreconditionerKind::Spectral: return "spectral";
        case PreconditionerKind::Diagonal: return "diag";
        case PreconditionerKind::None: return "none";
    }
    return "unknown";
}

PreconditionerKind preconditioner_from_string(const std::string& name) {
    if (name == "spectral") return PreconditionerKind::Spectral;
    if (name == "diag" || name == "diagonal") return PreconditionerKind::Diagonal;
    if (name == "none" || name == "identity") return PreconditionerKind::None;
    throw std::invalid_argument("unknown preconditioner '" + name + "'");
}

void SolverSettings::validate() const {
    if (!(newton_rtol > 0.0) || !(lin_rtol > 0.0) || !(lin_atol > 0.0))
        throw std::invalid_argument("solver tolerances must be positive");
    if (max_newton < 1 || max_lin < 1)
        throw std::invalid_argument("solver iteration caps must be at least 1");
    if (gmres_restart < 1)
        throw std::invalid_argument("gmres restart length must be at least 1");
}

namespace {

double norm2(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

using ApplyFn = std::function<void(std::span<const double>, std::span<double>)>;

struct GmresOutcome {
    int iterations = 0;
    bool converged = false;
    double residual = 0.0;
};

// Right-preconditioned restarted GMRES with modified Gram-Schmidt and Givens
// rotations. Solves A x = b for x starting from zero; the Givens residual is
// the true residual norm of the unpreconditioned system.
GmresOutcome gmres(const ApplyFn& apply_op, const ApplyFn& apply_precond,
                   std::span<const double> b, std::span<double> x,
                   double rtol, double atol, int max_iter, int restart) {
    const std::size_t n = b.size();
    GmresOutcome out;

    const double normb = norm2(b);
    const double target = std::max(rtol * normb, atol);
    if (normb <= atol) {
        out.converged = true;
        out.residual = normb;
        return out;
    }

    std::vector<std::vector<double>> V;
    std::vector<double> H((restart + 1) * restart, 0.0);
    std::vector<double> cs(restart), sn(restart), g(restart + 1);
    std::vector<double> z(n), w(n), r(n);
    auto h = [&](int i, int j) -> double& { return H[static_cast<std::size_t>(j) * (restart + 1) + i]; };

    double res = normb;
    while (out.iterations < max_iter) {
        // r = b - A x
        if (out.iterations == 0) {
            std::copy(b.begin(), b.end(), r.begin());
        } else {
            apply_op(x, w);
            for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - w[i];
        }
        double beta = norm2(r);
        if (beta <= target) {
            out.converged = true;
            out.residual = beta;
            return out;
        }

        if (V.empty()) V.emplace_back(n);
        for (std::size_t i = 0; i < n; ++i) V[0][i] = r[i] / beta;
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;

        int j = 0;
        for (; j < restart && out.iterations < max_iter; ++j) {
            ++out.iterations;
            apply_precond(V[j], z);
            apply_op(z, w);
            for (int i = 0; i <= j; ++i) {
                const double hij = dot(w, V[i]);
                h(i, j) = hij;
                for (std::size_t k = 0; k < n; ++k) w[k] -= hij * V[i][k];
            }
            const double hj1 = norm2(w);
            h(j + 1, j) = hj1;
            if (static_cast<int>(V.size()) <= j + 1) V.emplace_back(n);
            if (hj1 > 0.0)
                for (std::size_t k = 0; k < n; ++k) V[j + 1][k] = w[k] / hj1;

            // apply accumulated rotations, then form a new one
            for (int i = 0; i < j; ++i) {
                const double t = cs[i] * h(i, j) + sn[i] * h(i + 1, j);
                h(i + 1, j) = -sn[i] * h(i, j) + cs[i] * h(i + 1, j);
                h(i, j) = t;
            }
            const double denom = std::hypot(h(j, j), h(j + 1, j));
            if (denom == 0.0) {
                cs[j] = 1.0;
                sn[j] = 0.0;
            } else {
                cs[j] = h(j, j) / denom;
                sn[j] = h(j + 1, j) / denom;
            }
            h(j, j) = cs[j] * h(j, j) + sn[j] * h(j + 1, j);
            h(j + 1, j) = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j] * g[j];
            res = std::abs(g[j + 1]);
            if (res <= target || hj1 == 0.0) {
                ++j;
                break;
            }
        }

        // back-substitute and accumulate the correction through the preconditioner
        std::vector<double> y(j, 0.0);
        for (int i = j - 1; i >= 0; --i) {
            double s = g[i];
            for (int k = i + 1; k < j; ++k) s -= h(i, k) * y[k];
            y[i] = s / h(i, i);
        }
        std::fill(w.begin(), w.end(), 0.0);
        for (int i = 0; i < j; ++i)
            for (std::size_t k = 0; k < n; ++k) w[k] += y[i] * V[i][k];
        apply_precond(w, z);
        for (std::size_t k = 0; k < n; ++k) x[k] += z[k];

        if (res <= target) {
            out.converged = true;
            out.residual = res;
            return out;
        }
    }
    out.residual = res;
    return out;
}

}  // namespace

SolveResult solve_step(const State& prev, const State& guess, double dt,
                       const PhysicalParams& params, const SolverSettings& settings) {
    require_same_grid(prev.phi, prev.mu);
    require_same_grid(prev.phi, guess.phi);
    require_same_grid(prev.phi, guess.mu);
    if (!(dt > 0.0)) throw std::invalid_argument("solve_step: dt must be positive");

    const GridPtr grid = prev.phi.grid_ptr();
    const GridSpec& g = *grid;
    const std::size_t n = g.node_count();
    constexpr double kAbsFloor = 1e-12;

    std::vector<double> phi(guess.phi.vec());
    std::vector<double> mu(guess.mu.vec());
    std::vector<double> res(2 * n), step(2 * n), scratch(n);

    auto eval_residual = [&]() {
        residual_into(g, params, dt, phi, mu, prev.phi.values(),
                      std::span<double>(res).subspan(0, n),
                      std::span<double>(res).subspan(n, n), scratch);
    };

    SolveResult result{State{Field(grid), Field(grid), prev.time + dt}, SolveStats{}};
    SolveStats& stats = result.stats;

    eval_residual();
    double rnorm = norm2(res);
    stats.residual_history.push_back(rnorm);
    const double tol = std::max(settings.newton_rtol * rnorm, kAbsFloor);

    std::unique_ptr<SpectralPreconditioner> spectral;
    if (settings.preconditioner == PreconditionerKind::Spectral)
        spectral = std::make_unique<SpectralPreconditioner>(grid, params);

    const double inv_dt = 1.0 / dt;
    const double diag_phi = inv_dt + 0.5 * params.sigma;

    ApplyFn apply_op = [&](std::span<const double> v, std::span<double> out) {
        jacobian_apply_into(g, params, dt, phi, prev.phi.values(),
                            v.subspan(0, n), v.subspan(n, n),
                            out.subspan(0, n), out.subspan(n, n), scratch);
    };
    ApplyFn apply_precond = [&](std::span<const double> v, std::span<double> out) {
        switch (settings.preconditioner) {
            case PreconditionerKind::Spectral:
                spectral->apply(v, out);
                break;
            case PreconditionerKind::Diagonal:
                for (std::size_t i = 0; i < n; ++i) out[i] = v[i] / diag_phi;
                for (std::size_t i = n; i < 2 * n; ++i) out[i] = v[i];
                break;
            case PreconditionerKind::None:
                std::copy(v.begin(), v.end(), out.begin());
                break;
        }
    };

    bool converged = rnorm <= tol;
    while (!converged && stats.newton_iters < settings.max_newton) {
        if (spectral) {
            // freeze the nonlinear coefficient at its current spatial mean
            double cbar = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                cbar += psi_tilde_prime_da(phi[i], prev.phi[i]);
            spectral->set_step(inv_dt, cbar / static_cast<double>(n));
        }

        std::vector<double> rhs(2 * n);
        for (std::size_t i = 0; i < 2 * n; ++i) rhs[i] = -res[i];
        std::fill(step.begin(), step.end(), 0.0);
        const GmresOutcome lin = gmres(apply_op, apply_precond, rhs, step,
                                       settings.lin_rtol, settings.lin_atol,
                                       settings.max_lin, settings.gmres_restart);
        stats.linear_iters += lin.iterations;
        if (!lin.converged) break;  // stall: let the driver shrink dt

        for (std::size_t i = 0; i < n; ++i) phi[i] += step[i];
        for (std::size_t i = 0; i < n; ++i) mu[i] += step[n + i];
        ++stats.newton_iters;

        eval_residual();
        rnorm = norm2(res);
        stats.residual_history.push_back(rnorm);
        converged = rnorm <= tol;
    }

    stats.converged = converged;
    stats.final_residual_norm = rnorm;
    result.state.phi.vec() = std::move(phi);
    result.state.mu.vec() = std::move(mu);
    return result;
}

}  // namespace okflow
