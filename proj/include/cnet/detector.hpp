// SPDX-License-Identifier: Apache-2.0
//
// LMMSE data detection on quantized comparator-network outputs, including
// robust variants that model residual channel uncertainty.

#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "cnet/bussgang.hpp"
#include "cnet/channel.hpp"
#include "cnet/model.hpp"
#include "cnet/rng.hpp"

namespace cnet {

/// x_hat_R = g^T z_Q; g has one column per real symbol dimension (2*N_t).
struct DetectorFilter {
    MatrixXd g;        // (2*N_r+alpha) x 2*N_t
    MatrixXd c_zq;     // quantized-output covariance used to build g
    MatrixXd c_zqx;    // cross-covariance E[z_Q x_R^T]
};

/// Plain LMMSE detector for a known channel: g = C_zQ^{-1} C_zQx with
/// C_zQx = A_R (sigma_x2/2) B H_R.
inline DetectorFilter lmmse_detector(const MatrixXd& h_real, const MatrixXd& b,
                                     const SystemConfig& cfg) {
    const CovarianceSet cov = make_covariance_set(data_covariance(h_real, b, cfg));
    DetectorFilter f;
    f.c_zq = cov.c_zq;
    f.c_zqx = cov.a_r.asDiagonal() * (0.5 * cfg.sigma_x2 * b * h_real);
    f.g = sym_solve(f.c_zq, f.c_zqx);
    return f;
}

enum class GammaMode { Exact, Sampled };

// 2N_r x 2N_rN_t symbol matrix with X_R h_R = [Re(Hx); Im(Hx)].
namespace detail {
inline MatrixXd symbol_real_matrix(const VectorXcd& x, int n_antennas) {
    const int nt = static_cast<int>(x.size()), nr = n_antennas;
    MatrixXd m = MatrixXd::Zero(2 * nr, static_cast<Eigen::Index>(2 * nr) * nt);
    for (int u = 0; u < nt; ++u) {
        const double a = x(u).real(), b = x(u).imag();
        for (int r = 0; r < nr; ++r) {
            m(r, u * nr + r) = a;
            m(r, nr * nt + u * nr + r) = -b;
            m(nr + r, u * nr + r) = b;
            m(nr + r, nr * nt + u * nr + r) = a;
        }
    }
    return m;
}
}  // namespace detail

/// Gamma_R = E_x[X_R M X_R^T] over QPSK inputs, for a symmetric kernel M of
/// size 2*N_r*N_t. Exact mode enumerates all 4^{N_t} constellations and is
/// used whenever 4^{N_t} <= 65536; Sampled mode Monte Carlo averages.
inline MatrixXd gamma_matrix(const MatrixXd& m, const SystemConfig& cfg,
                             GammaMode mode = GammaMode::Exact, std::mt19937_64* rng = nullptr,
                             int n_samples = 4096) {
    const int nr = cfg.n_antennas, nt = cfg.n_users;
    if (m.rows() != 2 * nr * nt || m.cols() != 2 * nr * nt)
        throw std::invalid_argument("gamma_matrix: kernel dimension mismatch");
    MatrixXd gamma = MatrixXd::Zero(2 * nr, 2 * nr);
    const double amp = std::sqrt(cfg.sigma_x2 / 2.0);
    if (mode == GammaMode::Exact) {
        const std::uint64_t count = 1ull << (2 * nt);
        if (count > 65536ull)
            throw std::invalid_argument("gamma_matrix: constellation too large for Exact mode");
        VectorXcd x(nt);
        for (std::uint64_t idx = 0; idx < count; ++idx) {
            for (int u = 0; u < nt; ++u) {
                const double re = (idx >> (2 * u)) & 1 ? -amp : amp;
                const double im = (idx >> (2 * u + 1)) & 1 ? -amp : amp;
                x(u) = {re, im};
            }
            const MatrixXd xr = detail::symbol_real_matrix(x, nr);
            gamma += xr * m * xr.transpose();
        }
        gamma /= static_cast<double>(count);
    } else {
        if (rng == nullptr) throw std::invalid_argument("gamma_matrix: Sampled mode needs rng");
        for (int s = 0; s < n_samples; ++s) {
            const QpskDraw d = qpsk_source(cfg, *rng);
            const MatrixXd xr = detail::symbol_real_matrix(d.symbols, nr);
            gamma += xr * m * xr.transpose();
        }
        gamma /= static_cast<double>(n_samples);
    }
    return gamma;
}

/// Robust detector that trusts a fraction lambda of the channel energy:
/// C_zRr = lambda sigma_x2/2 B H1 H1^T B^T + (1-lambda) B Gamma_R B^T
///         + sigma_n2/2 B B^T, cross term sqrt(lambda) sigma_x2/2 B H1.
inline DetectorFilter robust_lambda_detector(const MatrixXd& h1_real, const MatrixXd& b,
                                             const MatrixXd& gamma_r, double lambda,
                                             const SystemConfig& cfg) {
    if (lambda < 0.0 || lambda > 1.0)
        throw std::invalid_argument("robust_lambda_detector: lambda must be in [0, 1]");
    const MatrixXd bh = b * h1_real;
    const MatrixXd c_zr = lambda * 0.5 * cfg.sigma_x2 * bh * bh.transpose() +
                          (1.0 - lambda) * b * gamma_r * b.transpose() +
                          0.5 * cfg.sigma_n2 * b * b.transpose();
    const CovarianceSet cov = make_covariance_set(c_zr);
    DetectorFilter f;
    f.c_zq = cov.c_zq;
    f.c_zqx = cov.a_r.asDiagonal() * (std::sqrt(lambda) * 0.5 * cfg.sigma_x2 * bh);
    f.g = sym_solve(f.c_zq, f.c_zqx);
    return f;
}

/// Robust detector driven by the estimator error statistics: uses the
/// estimated channel plus Gamma_R built from the error correlation kernel.
inline DetectorFilter robust_estimation_detector(const MatrixXd& h_hat_real, const MatrixXd& b,
                                                 const MatrixXd& gamma_err,
                                                 const SystemConfig& cfg) {
    const MatrixXd bh = b * h_hat_real;
    const MatrixXd c_zr = 0.5 * cfg.sigma_x2 * bh * bh.transpose() +
                          b * gamma_err * b.transpose() +
                          0.5 * cfg.sigma_n2 * b * b.transpose();
    const CovarianceSet cov = make_covariance_set(c_zr);
    DetectorFilter f;
    f.c_zq = cov.c_zq;
    f.c_zqx = cov.a_r.asDiagonal() * (0.5 * cfg.sigma_x2 * bh);
    f.g = sym_solve(f.c_zq, f.c_zqx);
    return f;
}

/// Filters the quantized observation and hard-slices QPSK bits; returns the
/// number of bit errors against the transmitted labels.
inline int detect_and_slice(const DetectorFilter& f, const VectorXd& z_q, const QpskDraw& tx,
                            const SystemConfig& cfg) {
    const VectorXd x_hat = f.g.transpose() * z_q;
    const int nt = cfg.n_users;
    int errors = 0;
    for (int u = 0; u < nt; ++u) {
        const int b0 = x_hat(u) >= 0.0 ? 0 : 1;
        const int b1 = x_hat(nt + u) >= 0.0 ? 0 : 1;
        errors += (b0 != tx.bits[2 * u]) + (b1 != tx.bits[2 * u + 1]);
    }
    return errors;
}

/// One data-phase observation: z_Q = Q(B(H_R x_R + n_R)).
inline VectorXd transmit_data(const MatrixXd& h_real, const MatrixXd& b, const VectorXcd& x,
                              double sigma_n2, std::mt19937_64& rng) {
    VectorXd y = h_real * complex_to_real_vector(x);
    std::normal_distribution<double> noise(0.0, std::sqrt(sigma_n2 / 2.0));
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += noise(rng);
    return quantize(b * y);
}

}  // namespace cnet
