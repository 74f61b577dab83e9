#include "spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>

namespace okflow {

namespace {

// Eigenvalue of the 1D second-difference operator for mode m on an axis.
double axis_eigenvalue(bool periodic, int m, int n, double h) {
    const double angle = periodic
                             ? 2.0 * std::numbers::pi * m / n
                             : std::numbers::pi * m / (n - 1);
    return (2.0 * std::cos(angle) - 2.0) / (h * h);
}

}  // namespace

SpectralPreconditioner::SpectralPreconditioner(GridPtr grid, const PhysicalParams& params)
    : grid_(std::move(grid)), params_(params),
      periodic_(grid_->bc() == BoundaryKind::Periodic) {
    const GridSpec& g = *grid_;
    const int dims = g.dims();
    const int nx = g.nodes(0);
    const int ny = g.nodes(1);
    const int nz = dims == 3 ? g.nodes(2) : 1;
    const std::size_t n = g.node_count();

    real_buf_ = fftw_alloc_real(n);

    if (periodic_) {
        const int last = dims == 3 ? nz : ny;
        const int lastc = last / 2 + 1;
        mode_count_ = dims == 2 ? static_cast<std::size_t>(nx) * lastc
                                : static_cast<std::size_t>(nx) * ny * lastc;
        cplx_buf_ = fftw_alloc_complex(mode_count_);
        auto* cb = static_cast<fftw_complex*>(cplx_buf_);
        if (dims == 2) {
            fwd_ = fftw_plan_dft_r2c_2d(nx, ny, real_buf_, cb, FFTW_ESTIMATE);
            inv_ = fftw_plan_dft_c2r_2d(nx, ny, cb, real_buf_, FFTW_ESTIMATE);
        } else {
            fwd_ = fftw_plan_dft_r2c_3d(nx, ny, nz, real_buf_, cb, FFTW_ESTIMATE);
            inv_ = fftw_plan_dft_c2r_3d(nx, ny, nz, cb, real_buf_, FFTW_ESTIMATE);
        }
        norm_ = static_cast<double>(n);

        eig_.resize(mode_count_);
        std::size_t k = 0;
        if (dims == 2) {
            for (int mx = 0; mx < nx; ++mx) {
                const double ex = axis_eigenvalue(true, mx, nx, g.spacing(0));
                for (int my = 0; my < lastc; ++my, ++k)
                    eig_[k] = ex + axis_eigenvalue(true, my, ny, g.spacing(1));
            }
        } else {
            for (int mx = 0; mx < nx; ++mx) {
                const double ex = axis_eigenvalue(true, mx, nx, g.spacing(0));
                for (int my = 0; my < ny; ++my) {
                    const double exy = ex + axis_eigenvalue(true, my, ny, g.spacing(1));
                    for (int mz = 0; mz < lastc; ++mz, ++k)
                        eig_[k] = exy + axis_eigenvalue(true, mz, nz, g.spacing(2));
                }
            }
        }
        phi_hat_.resize(mode_count_);
        mu_hat_.resize(mode_count_);
    } else {
        mode_count_ = n;
        if (dims == 2) {
            fwd_ = fftw_plan_r2r_2d(nx, ny, real_buf_, real_buf_,
                                    FFTW_REDFT00, FFTW_REDFT00, FFTW_ESTIMATE);
            inv_ = fwd_;  // REDFT00 is its own inverse up to scaling
            norm_ = 4.0 * (nx - 1) * (ny - 1);
        } else {
            fwd_ = fftw_plan_r2r_3d(nx, ny, nz, real_buf_, real_buf_,
                                    FFTW_REDFT00, FFTW_REDFT00, FFTW_REDFT00, FFTW_ESTIMATE);
            inv_ = fwd_;
            norm_ = 8.0 * (nx - 1) * (ny - 1) * (nz - 1);
        }

        eig_.resize(mode_count_);
        std::size_t k = 0;
        for (int mx = 0; mx < nx; ++mx) {
            const double ex = axis_eigenvalue(false, mx, nx, g.spacing(0));
            for (int my = 0; my < ny; ++my) {
                const double exy = ex + axis_eigenvalue(false, my, ny, g.spacing(1));
                if (dims == 2) {
                    eig_[k++] = exy;
                } else {
                    for (int mz = 0; mz < nz; ++mz, ++k)
                        eig_[k] = exy + axis_eigenvalue(false, mz, nz, g.spacing(2));
                }
            }
        }
        phi_hat_r_.resize(mode_count_);
        mu_hat_r_.resize(mode_count_);
    }
}

SpectralPreconditioner::~SpectralPreconditioner() {
    if (fwd_) fftw_destroy_plan(fwd_);
    if (inv_ && inv_ != fwd_) fftw_destroy_plan(inv_);
    if (real_buf_) fftw_free(real_buf_);
    if (cplx_buf_) fftw_free(cplx_buf_);
}

void SpectralPreconditioner::set_step(double inv_dt, double cbar) {
    inv_dt_ = inv_dt;
    cbar_ = cbar;
}

void SpectralPreconditioner::transform_forward(std::span<const double> in,
                                               std::vector<std::complex<double>>& out_c,
                                               std::vector<double>& out_r) {
    const std::size_t n = grid_->node_count();
    std::memcpy(real_buf_, in.data(), n * sizeof(double));
    fftw_execute(fwd_);
    if (periodic_) {
        std::memcpy(out_c.data(), cplx_buf_, mode_count_ * sizeof(fftw_complex));
    } else {
        std::memcpy(out_r.data(), real_buf_, mode_count_ * sizeof(double));
    }
}

void SpectralPreconditioner::transform_inverse(std::vector<std::complex<double>>& in_c,
                                               std::vector<double>& in_r,
                                               std::span<double> out) {
    const std::size_t n = grid_->node_count();
    if (periodic_) {
        std::memcpy(cplx_buf_, in_c.data(), mode_count_ * sizeof(fftw_complex));
        fftw_execute(inv_);
    } else {
        std::memcpy(real_buf_, in_r.data(), mode_count_ * sizeof(double));
        fftw_execute(inv_);
    }
    const double s = 1.0 / norm_;
    for (std::size_t i = 0; i < n; ++i) out[i] = real_buf_[i] * s;
}

void SpectralPreconditioner::apply(std::span<const double> in, std::span<double> out) {
    const std::size_t n = grid_->node_count();
    const double a = inv_dt_ + 0.5 * params_.sigma;
    const double half_eps_sq = 0.5 * params_.epsilon * params_.epsilon;
    const double mob = params_.mobility;

    transform_forward(in.subspan(0, n), phi_hat_, phi_hat_r_);
    transform_forward(in.subspan(n, n), mu_hat_, mu_hat_r_);

    // Per mode, invert [[a, -M*lam], [-cbar + eps^2/2*lam, 1]].
    for (std::size_t k = 0; k < mode_count_; ++k) {
        const double lam = eig_[k];
        const double b = -mob * lam;
        const double c = -cbar_ + half_eps_sq * lam;
        double det = a - b * c;
        const double scale = std::abs(a) + std::abs(b * c) + 1e-300;
        if (std::abs(det) < 1e-13 * scale)
            det = (det < 0.0 ? -1.0 : 1.0) * 1e-13 * scale;
        if (periodic_) {
            const std::complex<double> r1 = phi_hat_[k];
            const std::complex<double> r2 = mu_hat_[k];
            phi_hat_[k] = (r1 - b * r2) / det;
            mu_hat_[k] = (a * r2 - c * r1) / det;
        } else {
            const double r1 = phi_hat_r_[k];
            const double r2 = mu_hat_r_[k];
            phi_hat_r_[k] = (r1 - b * r2) / det;
            mu_hat_r_[k] = (a * r2 - c * r1) / det;
        }
    }

    transform_inverse(phi_hat_, phi_hat_r_, out.subspan(0, n));
    transform_inverse(mu_hat_, mu_hat_r_, out.subspan(n, n));
}

}  // namespace okflow
