// SPDX-License-Identifier: Apache-2.0
//
// LRA-LMMSE channel estimation from 1-bit pilot observations, plus the
// closed-form MSE approximation for Rayleigh channels.

#pragma once

#include <cmath>
#include <numbers>

#include "cnet/bussgang.hpp"
#include "cnet/channel.hpp"
#include "cnet/model.hpp"

namespace cnet {

/// Estimation filter and the quantities derived from it.
struct EstimatorSolution {
    MatrixXd w;             // 2*N_r*N_t x tau*(2*N_r+alpha) LMMSE filter
    MatrixXd phi_hat;       // effective pilot matrix A_Rp B_eff Phi_tilde_R
    MatrixXd err_corr;      // E[eps eps^T], 2*N_r*N_t square
    double analytic_mse = 0.0;
};

/// W = R Phi_hat^T C_zQp^{-1} with Phi_hat = A_Rp B_eff Phi_tilde_R.
/// err_corr = R - R Phi_hat^T C_zQp^{-1} Phi_hat R; analytic_mse is its trace.
inline EstimatorSolution lra_lmmse_filter(const PilotMatrix& pilots, const MatrixXd& b_eff,
                                          const MatrixXd& r_h, double sigma_n2) {
    const MatrixXd c_zrp = pilot_covariance(pilots, b_eff, r_h, sigma_n2);
    const CovarianceSet cov = make_covariance_set(c_zrp);

    EstimatorSolution sol;
    sol.phi_hat = cov.a_r.asDiagonal() * (b_eff * pilots.phi_tilde_real);
    const MatrixXd phi_r = sol.phi_hat * r_h;                  // C_zQp x dim(h)
    const MatrixXd cinv_phi_r = sym_solve(cov.c_zq, phi_r);
    sol.w = cinv_phi_r.transpose();
    sol.err_corr = r_h - phi_r.transpose() * cinv_phi_r;
    sol.analytic_mse = sol.err_corr.trace();
    return sol;
}

/// h_hat_R = W z_Qp for the quantized pilot observation z_Qp.
inline VectorXd estimate_channel_real(const EstimatorSolution& sol, const VectorXd& z_qp) {
    return sol.w * z_qp;
}

inline MatrixXcd estimate_channel(const EstimatorSolution& sol, const VectorXd& z_qp,
                                  const SystemConfig& cfg) {
    return channel_from_vector(estimate_channel_real(sol, z_qp), cfg.n_antennas, cfg.n_users);
}

/// Per-entry estimation quality factor for Rayleigh channels with orthogonal
/// pilots, tau = N_t and a comparator network of size alpha.
inline double kappa(const SystemConfig& cfg, int alpha) {
    const double load = 1.0 + static_cast<double>(alpha) / (2.0 * cfg.n_antennas);
    const double pm2 = std::numbers::pi - 2.0;
    return 0.5 * (cfg.n_users * cfg.sigma_x2 / (cfg.n_users * cfg.sigma_x2 + cfg.sigma_n2)) *
           (1.0 - pm2 / (2.0 * load + pm2));
}

/// Closed-form approximation of the total estimation MSE, N_r N_t (1 - 2 kappa).
inline double approx_sum_mse(const SystemConfig& cfg, int alpha) {
    return static_cast<double>(cfg.n_antennas) * cfg.n_users * (1.0 - 2.0 * kappa(cfg, alpha));
}

}  // namespace cnet
