#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "okflow/model.hpp"

using namespace okflow;
using std::numbers::pi;

namespace {

GridPtr make_grid(std::vector<int> nodes, std::vector<double> lengths, BoundaryKind bc) {
    return std::make_shared<const GridSpec>(std::move(nodes), std::move(lengths), bc);
}

Field random_field(GridPtr grid, unsigned seed, double center = 0.0, double amp = 1.0) {
    Field f(std::move(grid));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(center - amp, center + amp);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = dist(rng);
    return f;
}

// Dense periodic 5-point Laplacian assembled by index arithmetic only;
// independent of the grid module's stencil code.
std::vector<double> dense_periodic_laplacian(int nx, int ny, double hx, double hy) {
    const int n = nx * ny;
    std::vector<double> L(static_cast<std::size_t>(n) * n, 0.0);
    auto at = [&](int r, int c) -> double& { return L[static_cast<std::size_t>(r) * n + c]; };
    auto id = [&](int x, int y) { return ((x + nx) % nx) * ny + ((y + ny) % ny); };
    for (int x = 0; x < nx; ++x)
        for (int y = 0; y < ny; ++y) {
            const int r = id(x, y);
            at(r, r) += -2.0 / (hx * hx) - 2.0 / (hy * hy);
            at(r, id(x - 1, y)) += 1.0 / (hx * hx);
            at(r, id(x + 1, y)) += 1.0 / (hx * hx);
            at(r, id(x, y - 1)) += 1.0 / (hy * hy);
            at(r, id(x, y + 1)) += 1.0 / (hy * hy);
        }
    return L;
}

std::vector<double> matvec(const std::vector<double>& A, const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<double> y(n, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) y[r] += A[r * n + c] * x[c];
    return y;
}

}  // namespace

TEST_CASE("double well values at the minima and worked points") {
    CHECK(psi(1.0) == 0.0);
    CHECK(psi(-1.0) == 0.0);
    CHECK(psi_d1(1.0) == 0.0);
    CHECK(psi_d1(-1.0) == 0.0);
    CHECK(psi(0.0) == 0.25);
    CHECK(psi_d2(0.0) == -1.0);
    CHECK(psi_d1(0.5) == doctest::Approx(-0.375).epsilon(1e-15));
    CHECK(psi_d3(0.5) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("psi_tilde_prime: zero jump, worked value, quartic remainder") {
    for (double a : {-1.3, -0.2, 0.0, 0.7, 1.9})
        CHECK(psi_tilde_prime(a, a) == psi_d1(a));

    // a=1, b=0: 0 - 2*(1/2) + 6*(1/6) = 0
    CHECK(psi_tilde_prime(1.0, 0.0) == doctest::Approx(0.0).epsilon(1e-15));

    // remainder identity at the worked point: 0 - (0 - 0.25) = 0.25 = (a-b)^4/4
    const double lhs = psi_tilde_prime(1.0, 0.0) * 1.0 - (psi(1.0) - psi(0.0));
    CHECK(lhs == doctest::Approx(0.25).epsilon(1e-15));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int i = 0; i < 20000; ++i) {
        const double a = dist(rng), b = dist(rng);
        const double rem = psi_tilde_prime(a, b) * (a - b) - (psi(a) - psi(b));
        const double expect = std::pow(a - b, 4) / 4.0;
        CHECK(std::abs(rem - expect) <= 1e-12);
    }
}

TEST_CASE("residual vanishes at the uniform fixed point") {
    auto g = make_grid({8, 8}, {1, 1}, BoundaryKind::Periodic);
    PhysicalParams params{.epsilon = 0.1, .sigma = 250.0, .phi_bar = 0.3, .mobility = 1.0};
    State prev{Field(g, 0.3), Field(g, psi_d1(0.3)), 0.0};
    State next{Field(g, 0.3), Field(g, psi_d1(0.3)), 1e-3};
    auto [rphi, rmu] = residual(next, prev, 1e-3, params);
    for (std::size_t i = 0; i < rphi.size(); ++i) {
        CHECK(rphi[i] == 0.0);
        CHECK(rmu[i] == 0.0);
    }
}

TEST_CASE("residual matches a dense hand assembly on a 4x4 periodic grid") {
    const int nx = 4, ny = 4;
    auto g = make_grid({nx, ny}, {1, 1}, BoundaryKind::Periodic);
    PhysicalParams params{.epsilon = 0.07, .sigma = 0.0, .phi_bar = 0.3, .mobility = 1.0};
    const double dt = 2e-4;

    Field phi0 = random_field(g, 1, 0.3, 0.2);
    Field phi1 = random_field(g, 2, 0.3, 0.2);
    Field mu1 = random_field(g, 3, 0.0, 1.0);

    const auto L = dense_periodic_laplacian(nx, ny, g->spacing(0), g->spacing(1));
    const auto lap_mu = matvec(L, mu1.vec());
    std::vector<double> mid(phi1.size());
    for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (phi1[i] + phi0[i]);
    const auto lap_mid = matvec(L, mid);

    std::vector<double> rphi_expect(mid.size()), rmu_expect(mid.size());
    for (std::size_t i = 0; i < mid.size(); ++i) {
        rphi_expect[i] = (phi1[i] - phi0[i]) / dt - params.mobility * lap_mu[i] +
                         params.sigma * (mid[i] - params.phi_bar);
        const double a = phi1[i], b = phi0[i], j = a - b;
        const double tilde = psi_d1(a) - 0.5 * psi_d2(a) * j + psi_d3(a) * j * j / 6.0;
        rmu_expect[i] = mu1[i] - tilde + params.epsilon * params.epsilon * lap_mid[i];
    }

    State prev{phi0, Field(g), 0.0};
    State next{phi1, mu1, dt};
    auto [rphi, rmu] = residual(next, prev, dt, params);
    for (std::size_t i = 0; i < mid.size(); ++i) {
        CHECK(rphi[i] == doctest::Approx(rphi_expect[i]).epsilon(1e-13));
        CHECK(rmu[i] == doctest::Approx(rmu_expect[i]).epsilon(1e-13));
    }
}

TEST_CASE("constant shift of mu leaves R_phi unchanged and shifts R_mu") {
    auto g = make_grid({6, 6}, {1, 1}, BoundaryKind::Periodic);
    PhysicalParams params{.epsilon = 0.1, .sigma = 5.0, .phi_bar = 0.1, .mobility = 2.0};
    const double dt = 1e-3, shift = 0.37;

    Field phi0 = random_field(g, 4, 0.1, 0.3);
    Field phi1 = random_field(g, 5, 0.1, 0.3);
    Field mu1 = random_field(g, 6);
    Field mu_shifted(g, mu1.vec());
    for (std::size_t i = 0; i < mu_shifted.size(); ++i) mu_shifted[i] += shift;

    State prev{phi0, Field(g), 0.0};
    auto [rphi_a, rmu_a] = residual({phi1, mu1, dt}, prev, dt, params);
    auto [rphi_b, rmu_b] = residual({phi1, mu_shifted, dt}, prev, dt, params);
    for (std::size_t i = 0; i < rphi_a.size(); ++i) {
        CHECK(rphi_b[i] == doctest::Approx(rphi_a[i]).epsilon(1e-12));
        CHECK(rmu_b[i] - rmu_a[i] == doctest::Approx(shift).epsilon(1e-12));
    }
}

TEST_CASE("jacobian_apply agrees with directional finite differences") {
    auto g = make_grid({8, 8}, {1, 1}, BoundaryKind::Periodic);
    PhysicalParams params{.epsilon = 0.1, .sigma = 100.0, .phi_bar = 0.3, .mobility = 1.0};
    const double dt = 1e-4;

    Field phi0 = random_field(g, 10, 0.3, 0.2);
    Field phi1 = random_field(g, 11, 0.3, 0.2);
    Field mu1 = random_field(g, 12);
    Field dphi = random_field(g, 13);
    Field dmu = random_field(g, 14);
    State prev{phi0, Field(g), 0.0};
    State next{phi1, mu1, dt};

    auto [jphi, jmu] = jacobian_apply(next, prev, dt, params, {dphi, dmu});
    auto [r0phi, r0mu] = residual(next, prev, dt, params);

    double prev_err = -1.0;
    for (double theta : {1e-4, 1e-5, 1e-6, 1e-7}) {
        Field phi_t(g, phi1.vec());
        Field mu_t(g, mu1.vec());
        for (std::size_t i = 0; i < phi_t.size(); ++i) {
            phi_t[i] += theta * dphi[i];
            mu_t[i] += theta * dmu[i];
        }
        auto [rphi, rmu] = residual({phi_t, mu_t, dt}, prev, dt, params);
        double err = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < rphi.size(); ++i) {
            const double fd_phi = (rphi[i] - r0phi[i]) / theta;
            const double fd_mu = (rmu[i] - r0mu[i]) / theta;
            err += (fd_phi - jphi[i]) * (fd_phi - jphi[i]) +
                   (fd_mu - jmu[i]) * (fd_mu - jmu[i]);
            scale += jphi[i] * jphi[i] + jmu[i] * jmu[i];
        }
        err = std::sqrt(err / scale);
        if (prev_err > 0.0) {
            const double slope = std::log10(prev_err / err);
            CHECK(slope > 0.7);  // first order in theta
            CHECK(slope < 1.3);
        }
        prev_err = err;
    }
}

TEST_CASE("jacobian_apply of the zero direction is zero") {
    auto g = make_grid({4, 4}, {1, 1}, BoundaryKind::NoFlux);
    PhysicalParams params;
    State prev{random_field(g, 20, 0.3, 0.2), Field(g), 0.0};
    State next{random_field(g, 21, 0.3, 0.2), random_field(g, 22), 1e-3};
    auto [jphi, jmu] = jacobian_apply(next, prev, 1e-3, params, {Field(g), Field(g)});
    for (std::size_t i = 0; i < jphi.size(); ++i) {
        CHECK(jphi[i] == 0.0);
        CHECK(jmu[i] == 0.0);
    }
}

TEST_CASE("jacobian linear part matches a dense oracle on a 4x4 grid") {
    // With phi1 = phi0 = 1/sqrt(3) the nonlinear coefficient vanishes
    // identically, leaving the sigma / Laplacian / identity structure.
    const int nx = 4, ny = 4;
    auto g = make_grid({nx, ny}, {1, 1}, BoundaryKind::Periodic);
    PhysicalParams params{.epsilon = 0.13, .sigma = 40.0, .phi_bar = 0.2, .mobility = 1.7};
    const double dt = 3e-4;
    const double c = 1.0 / std::sqrt(3.0);

    Field phi0(g, c), phi1(g, c);
    Field dphi = random_field(g, 30);
    Field dmu = random_field(g, 31);

    const auto L = dense_periodic_laplacian(nx, ny, g->spacing(0), g->spacing(1));
    const auto lap_dmu = matvec(L, dmu.vec());
    const auto lap_dphi = matvec(L, dphi.vec());

    State prev{phi0, Field(g), 0.0};
    State next{phi1, Field(g), dt};
    auto [jphi, jmu] = jacobian_apply(next, prev, dt, params, {dphi, dmu});
    for (std::size_t i = 0; i < jphi.size(); ++i) {
        const double expect_phi = (1.0 / dt + 0.5 * params.sigma) * dphi[i] -
                                  params.mobility * lap_dmu[i];
        const double expect_mu =
            dmu[i] + 0.5 * params.epsilon * params.epsilon * lap_dphi[i];
        CHECK(jphi[i] == doctest::Approx(expect_phi).epsilon(1e-12));
        CHECK(jmu[i] == doctest::Approx(expect_mu).epsilon(1e-12));
    }
}

TEST_CASE("poisson solve: zero rhs, sine mode, gauge") {
    auto g = make_grid({64, 4}, {1, 1}, BoundaryKind::Periodic);

    Field zero(g);
    Field v0 = poisson_solve(zero);
    for (std::size_t i = 0; i < v0.size(); ++i) CHECK(v0[i] == 0.0);

    const GridSpec& gs = *g;
    Field rhs(g);
    std::size_t i = 0;
    for (int x = 0; x < gs.nodes(0); ++x)
        for (int y = 0; y < gs.nodes(1); ++y, ++i)
            rhs[i] = std::sin(2 * pi * x * gs.spacing(0));
    Field v = poisson_solve(rhs);
    i = 0;
    for (int x = 0; x < gs.nodes(0); ++x)
        for (int y = 0; y < gs.nodes(1); ++y, ++i) {
            const double exact = std::sin(2 * pi * x * gs.spacing(0)) / (4 * pi * pi);
            CHECK(v[i] == doctest::Approx(exact).epsilon(0.01));
        }

    Field noise = random_field(g, 40);
    Field vg = poisson_solve(noise);
    CHECK(std::abs(mean(vg)) <= 1e-12);
    // residual check: -lap(v) should reproduce the projected rhs
    Field lap = laplacian(vg);
    const double noise_mean = mean(noise);
    for (std::size_t k = 0; k < lap.size(); ++k)
        CHECK(-lap[k] == doctest::Approx(noise[k] - noise_mean).epsilon(1e-7));
}

TEST_CASE("free energy: wells, uniform zero state, dense quadrature oracle") {
    auto g = make_grid({16, 16}, {1, 1}, BoundaryKind::Periodic);
    PhysicalParams params{.epsilon = 0.1, .sigma = 0.0, .phi_bar = 0.3, .mobility = 1.0};

    CHECK(free_energy(Field(g, 1.0), params) == doctest::Approx(0.0).epsilon(1e-15));

    PhysicalParams with_sigma = params;
    with_sigma.sigma = 123.0;
    with_sigma.phi_bar = 1e-6;  // rhs = phi - phi_bar is constant, v = 0
    CHECK(free_energy(Field(g, 0.0), with_sigma) == doctest::Approx(0.25).epsilon(1e-12));

    // Ginzburg-Landau value against an independent explicit quadrature.
    Field f = random_field(g, 50, 0.0, 0.9);
    const int n = 16;
    const double h = g->spacing(0);
    double bulk = 0.0, grad = 0.0;
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            const double c = f[static_cast<std::size_t>(x) * n + y];
            const double xp = f[static_cast<std::size_t>((x + 1) % n) * n + y];
            const double yp = f[static_cast<std::size_t>(x) * n + (y + 1) % n];
            const double q = c * c - 1.0;
            bulk += 0.25 * q * q * h * h;
            grad += ((xp - c) / h) * ((xp - c) / h) * h * h;
            grad += ((yp - c) / h) * ((yp - c) / h) * h * h;
        }
    const double expect = bulk + 0.5 * params.epsilon * params.epsilon * grad;
    CHECK(free_energy(f, params) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("nonlocal energy: the two quadratic forms agree") {
    auto g = make_grid({32, 32}, {1, 1}, BoundaryKind::Periodic);
    PhysicalParams params{.epsilon = 0.1, .sigma = 321.0, .phi_bar = 0.25, .mobility = 1.0};
    Field phi = random_field(g, 60, 0.25, 0.5);

    Field dev(g);
    for (std::size_t i = 0; i < phi.size(); ++i) dev[i] = phi[i] - params.phi_bar;
    Field v = poisson_solve(dev);

    Field prod(g);
    for (std::size_t i = 0; i < phi.size(); ++i) prod[i] = dev[i] * v[i];
    const double form_a = integrate(prod);
    const double form_b = grad_norm_sq_integral(v);
    CHECK(form_a == doctest::Approx(form_b).epsilon(1e-8));
}

TEST_CASE("params validation") {
    PhysicalParams bad;
    bad.epsilon = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = PhysicalParams{};
    bad.sigma = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = PhysicalParams{};
    bad.phi_bar = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
