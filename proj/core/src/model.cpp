#include "okflow/model.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace okflow {

void PhysicalParams::validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (!(mobility > 0.0)) throw std::invalid_argument("mobility must be positive");
    if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be non-negative");
    if (!(phi_bar > -1.0 && phi_bar < 1.0))
        throw std::invalid_argument("phi_bar must lie in (-1, 1)");
}

void residual_into(const GridSpec& g, const PhysicalParams& params, double dt,
                   std::span<const double> phi_next, std::span<const double> mu_next,
                   std::span<const double> phi_prev,
                   std::span<double> out_rphi, std::span<double> out_rmu,
                   std::span<double> scratch) {
    const std::size_t n = g.node_count();
    const double inv_dt = 1.0 / dt;
    const double half_eps_sq = 0.5 * params.epsilon * params.epsilon;

    // R_phi = jump/dt - M lap(mu1) + sigma(mid - phi_bar)
    laplacian_into(g, mu_next, scratch);
    for (std::size_t i = 0; i < n; ++i) {
        const double mid = 0.5 * (phi_next[i] + phi_prev[i]);
        out_rphi[i] = (phi_next[i] - phi_prev[i]) * inv_dt -
                      params.mobility * scratch[i] +
                      params.sigma * (mid - params.phi_bar);
    }

    // R_mu = mu1 - psi_tilde'(phi1, phi0) + eps^2 lap(mid)
    for (std::size_t i = 0; i < n; ++i)
        out_rmu[i] = phi_next[i] + phi_prev[i];  // 2*mid, scaled below
    laplacian_into(g, out_rmu, scratch);
    for (std::size_t i = 0; i < n; ++i)
        out_rmu[i] = mu_next[i] - psi_tilde_prime(phi_next[i], phi_prev[i]) +
                     half_eps_sq * scratch[i];
}

std::pair<Field, Field> residual(const State& next, const State& prev, double dt,
                                 const PhysicalParams& params) {
    require_same_grid(next.phi, next.mu);
    require_same_grid(next.phi, prev.phi);
    if (!(dt > 0.0)) throw std::invalid_argument("residual: dt must be positive");

    const GridSpec& g = next.phi.grid();
    Field rphi(next.phi.grid_ptr());
    Field rmu(next.phi.grid_ptr());
    std::vector<double> scratch(g.node_count());
    residual_into(g, params, dt, next.phi.values(), next.mu.values(),
                  prev.phi.values(), rphi.values(), rmu.values(), scratch);
    return {std::move(rphi), std::move(rmu)};
}

void jacobian_apply_into(const GridSpec& g, const PhysicalParams& params, double dt,
                         std::span<const double> phi_next, std::span<const double> phi_prev,
                         std::span<const double> dphi, std::span<const double> dmu,
                         std::span<double> out_jphi, std::span<double> out_jmu,
                         std::span<double> scratch) {
    const std::size_t n = g.node_count();
    const double inv_dt = 1.0 / dt;
    const double half_sigma = 0.5 * params.sigma;
    const double half_eps_sq = 0.5 * params.epsilon * params.epsilon;

    laplacian_into(g, dmu, scratch);
    for (std::size_t i = 0; i < n; ++i)
        out_jphi[i] = (inv_dt + half_sigma) * dphi[i] - params.mobility * scratch[i];

    laplacian_into(g, dphi, scratch);
    for (std::size_t i = 0; i < n; ++i)
        out_jmu[i] = dmu[i] - psi_tilde_prime_da(phi_next[i], phi_prev[i]) * dphi[i] +
                     half_eps_sq * scratch[i];
}

std::pair<Field, Field> jacobian_apply(const State& next, const State& prev, double dt,
                                       const PhysicalParams& params,
                                       const std::pair<Field, Field>& direction) {
    require_same_grid(next.phi, prev.phi);
    require_same_grid(next.phi, direction.first);
    require_same_grid(next.phi, direction.second);
    if (!(dt > 0.0)) throw std::invalid_argument("jacobian_apply: dt must be positive");

    const GridSpec& g = next.phi.grid();
    Field jphi(next.phi.grid_ptr());
    Field jmu(next.phi.grid_ptr());
    std::vector<double> scratch(g.node_count());
    jacobian_apply_into(g, params, dt, next.phi.values(), prev.phi.values(),
                        direction.first.values(), direction.second.values(),
                        jphi.values(), jmu.values(), scratch);
    return {std::move(jphi), std::move(jmu)};
}

namespace {

double weighted_dot(const GridSpec& g, std::span<const double> a, std::span<const double> b) {
    const auto& w = g.node_weight();
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += w[i] * a[i] * b[i];
    return acc;
}

}  // namespace

Field poisson_solve(const Field& rhs, double rel_tol, int max_iter) {
    const GridSpec& g = rhs.grid();
    const std::size_t n = g.node_count();
    if (max_iter <= 0) max_iter = static_cast<int>(std::max<std::size_t>(2000, 10 * n));

    // Project the right-hand side onto mean zero; the operator -lap maps
    // onto that subspace exactly (discrete divergence theorem), so CG stays
    // compatible throughout.
    Field b(rhs.grid_ptr(), std::vector<double>(rhs.vec()));
    const double rhs_mean = mean(b);
    for (std::size_t i = 0; i < n; ++i) b[i] -= rhs_mean;

    Field x(rhs.grid_ptr());
    std::vector<double> r(b.vec());
    std::vector<double> p(r);
    std::vector<double> q(n);

    const double bnorm2 = weighted_dot(g, r, r);
    if (bnorm2 == 0.0) return x;
    const double tol2 = rel_tol * rel_tol * bnorm2;

    double rr = bnorm2;
    for (int it = 0; it < max_iter; ++it) {
        laplacian_into(g, p, q);
        for (std::size_t i = 0; i < n; ++i) q[i] = -q[i];
        const double pq = weighted_dot(g, p, q);
        const double alpha = rr / pq;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        const double rr_new = weighted_dot(g, r, r);
        if (rr_new <= tol2) {
            const double gauge = mean(x);
            for (std::size_t i = 0; i < n; ++i) x[i] -= gauge;
            return x;
        }
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    }
    throw std::runtime_error("poisson_solve: CG did not reach tolerance within iteration cap");
}

double free_energy(const Field& phi, const PhysicalParams& params) {
    const GridSpec& g = phi.grid();
    Field bulk(phi.grid_ptr());
    for (std::size_t i = 0; i < g.node_count(); ++i) bulk[i] = psi(phi[i]);

    double f = integrate(bulk) +
               0.5 * params.epsilon * params.epsilon * grad_norm_sq_integral(phi);

    if (params.sigma > 0.0) {
        Field dev(phi.grid_ptr());
        for (std::size_t i = 0; i < g.node_count(); ++i) dev[i] = phi[i] - params.phi_bar;
        Field v = poisson_solve(dev);
        for (std::size_t i = 0; i < g.node_count(); ++i) dev[i] *= v[i];
        f += 0.5 * params.sigma * integrate(dev);
    }
    return f;
}

}  // namespace okflow
