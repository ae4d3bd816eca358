// SPDX-License-Identifier: Apache-2.0
//
// Ergodic sum-rate lower bound per real-valued stream under the Bussgang
// data model, plus the closed-form matched-filter rate approximation.

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cnet/bussgang.hpp"
#include "cnet/estimator.hpp"
#include "cnet/model.hpp"

namespace cnet {

/// Per-stream second moments behind SINR_k: desired power, interference,
/// estimation-error leakage, AWGN and quantization noise.
struct RateDecomposition {
    Eigen::RowVectorXd d_rk;   // g_Rk^T A_Rd B, length 2N_r
    double t_desired = 0.0;
    double t_interference = 0.0;
    double t_est_error = 0.0;
    double t_awgn = 0.0;
    double t_quant = 0.0;
    double sinr_k = 0.0;
    double rate_k = 0.0;       // bits per channel use
};

/// SINR_k = sigma_x2 |d h_k|^2 / (sigma_x2 sum_{i!=k}|d h_i|^2
///          + sigma_x2 sum_i |d eps_i|^2 + sigma_n2 ||d||^2 + 2 g^T C_nq g),
/// rate_k = 1/2 log2(1+SINR_k). Degenerate g = 0 gives rate 0.
inline RateDecomposition stream_rate(Eigen::Index k, const MatrixXd& h_hat_real,
                                     const MatrixXd& err_real, const VectorXd& g_k,
                                     const MatrixXd& b, const VectorXd& a_rd,
                                     const MatrixXd& c_nq, const SystemConfig& cfg) {
    if (h_hat_real.cols() != 2 * cfg.n_users || k < 0 || k >= h_hat_real.cols())
        throw std::invalid_argument("stream_rate: stream index out of range");
    RateDecomposition r;
    r.d_rk = g_k.transpose() * a_rd.asDiagonal() * b;
    const Eigen::RowVectorXd dh = r.d_rk * h_hat_real;
    r.t_desired = cfg.sigma_x2 * dh(k) * dh(k);
    r.t_interference = cfg.sigma_x2 * (dh.squaredNorm() - dh(k) * dh(k));
    if (err_real.size() > 0) r.t_est_error = cfg.sigma_x2 * (r.d_rk * err_real).squaredNorm();
    r.t_awgn = cfg.sigma_n2 * r.d_rk.squaredNorm();
    r.t_quant = 2.0 * g_k.dot(c_nq * g_k);
    const double den = r.t_interference + r.t_est_error + r.t_awgn + r.t_quant;
    if (den <= 0.0 || r.t_desired <= 0.0) {
        r.sinr_k = 0.0;
        r.rate_k = 0.0;
        return r;
    }
    r.sinr_k = r.t_desired / den;
    r.rate_k = 0.5 * std::log2(1.0 + r.sinr_k);
    return r;
}

/// C_nq for the data phase; diagonal is identically 1 - 2/pi.
inline MatrixXd data_quantization_noise(const MatrixXd& h_real, const MatrixXd& b,
                                        const SystemConfig& cfg) {
    const CovarianceSet cov = make_covariance_set(data_covariance(h_real, b, cfg));
    return quantization_noise_covariance(cov.c_zq, cov.a_r, cov.c_zr);
}

/// Sum of the 2N_t stream rates for one channel/estimate realization.
/// err_real may be empty (perfect CSI).
inline double sum_rate_for_channel(const MatrixXd& h_hat_real, const MatrixXd& err_real,
                                   const MatrixXd& g, const MatrixXd& b, const VectorXd& a_rd,
                                   const MatrixXd& c_nq, const SystemConfig& cfg) {
    double sum = 0.0;
    for (Eigen::Index k = 0; k < 2 * cfg.n_users; ++k)
        sum += stream_rate(k, h_hat_real, err_real, g.col(k), b, a_rd, c_nq, cfg).rate_k;
    return sum;
}

/// Closed-form prefactors of the matched-filter rate approximation.
struct MfRateParams {
    double zeta = 0.0;     // Bussgang data-gain prefactor
    double delta_b = 1.0;  // E[B^T B]^2 + Cov[B^T B] scale
    double kappa = 0.5;
};

inline MfRateParams mf_rate_params(const SystemConfig& cfg, int alpha, double kappa_val) {
    MfRateParams p;
    p.zeta = std::sqrt((2.0 / std::numbers::pi) * 2.0 /
                       (cfg.n_users * cfg.sigma_x2 + cfg.sigma_n2));
    const double nr = cfg.n_antennas;
    const double load = 1.0 + alpha / (2.0 * nr);
    p.delta_b = load * load + alpha * (nr - 1.0) / (4.0 * nr * nr);
    p.kappa = kappa_val;
    return p;
}

/// Closed-form per-stream matched-filter rate. With perfect_csi the variance
/// term vanishes and kappa is fixed at 1/2.
inline double analytic_mf_rate(const SystemConfig& cfg, int alpha, double kappa_val,
                               bool perfect_csi = false) {
    const MfRateParams p = mf_rate_params(cfg, alpha, perfect_csi ? 0.5 : kappa_val);
    const double nr = cfg.n_antennas;
    const double load = 1.0 + alpha / (2.0 * nr);
    const double streams = 2.0 * cfg.n_users;  // K
    const double zeta_m2 = 1.0 / (p.zeta * p.zeta);
    const double quant_gap = 2.0 / std::numbers::pi -
                             (p.zeta * p.zeta) * (cfg.n_users * cfg.sigma_x2 + cfg.sigma_n2) / 2.0;

    double num = cfg.sigma_x2 * load * load * 2.0 * nr * p.kappa;
    double den = 0.5 * cfg.sigma_x2 * p.delta_b * (streams - 1.0) +
                 cfg.sigma_n2 * p.delta_b +
                 2.0 * ((std::numbers::pi - 2.0) / std::numbers::pi) * zeta_m2 * load +
                 2.0 * zeta_m2 * p.delta_b * quant_gap;
    if (perfect_csi)
        num = cfg.sigma_x2 * load * load * nr;
    else
        den += 0.5 * cfg.sigma_x2 * load * load * (2.0 * p.kappa + 1.0);
    return 0.5 * std::log2(1.0 + num / den);
}

}  // namespace cnet
