// spectral.hpp
// Constant-coefficient inverse of the step Jacobian, applied per Fourier /
// cosine mode. Used as a preconditioner for the matrix-free Krylov solver.
// Internal to the solver; not part of the installed API.

#pragma once

#include <complex>
#include <span>
#include <vector>

#include "okflow/grid.hpp"
#include "okflow/model.hpp"

struct fftw_plan_s;

namespace okflow {

// Solves P [dphi; dmu] = [r1; r2] where P is the Jacobian with the
// pointwise psi_tilde'' coefficient frozen at a constant. Diagonal per
// transform mode, so the apply costs a handful of FFTs.
class SpectralPreconditioner {
public:
    SpectralPreconditioner(GridPtr grid, const PhysicalParams& params);
    ~SpectralPreconditioner();

    SpectralPreconditioner(const SpectralPreconditioner&) = delete;
    SpectralPreconditioner& operator=(const SpectralPreconditioner&) = delete;

    // inv_dt = 1/dt; cbar = frozen value of d(psi_tilde')/dphi.
    void set_step(double inv_dt, double cbar);

    // in/out are stacked [phi; mu] vectors of length 2 * node_count.
    void apply(std::span<const double> in, std::span<double> out);

private:
    GridPtr grid_;
    PhysicalParams params_;
    bool periodic_;
    double inv_dt_ = 1.0;
    double cbar_ = 0.0;
    double norm_ = 1.0;              // transform round-trip scale
    std::size_t mode_count_ = 0;     // complex modes (periodic) or real modes (no-flux)
    std::vector<double> eig_;        // Laplacian eigenvalue per mode

    double* real_buf_ = nullptr;     // fftw-allocated
    void* cplx_buf_ = nullptr;       // fftw_complex*, periodic only
    fftw_plan_s* fwd_ = nullptr;
    fftw_plan_s* inv_ = nullptr;

    void transform_forward(std::span<const double> in, std::vector<std::complex<double>>& out_c,
                           std::vector<double>& out_r);
    void transform_inverse(std::vector<std::complex<double>>& in_c, std::vector<double>& in_r,
                           std::span<double> out);

    std::vector<std::complex<double>> phi_hat_, mu_hat_;
    std::vector<double> phi_hat_r_, mu_hat_r_;
};

}  // namespace okflow
