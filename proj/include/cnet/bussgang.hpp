// SPDX-License-Identifier: Apache-2.0
//
// Bussgang-decomposition building blocks: arcsine law, diagonal Bussgang
// gains and covariance assembly for pilot and data phases.

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cnet/channel.hpp"
#include "cnet/model.hpp"

namespace cnet {

struct SingularCovariance : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {
inline void require_positive_diagonal(const MatrixXd& c) {
    if ((c.diagonal().array() <= 0.0).any())
        throw SingularCovariance("covariance has non-positive diagonal");
}
}  // namespace detail

/// Solve A X = B for symmetric PD A; one diagonal-jitter retry before failing.
inline MatrixXd sym_solve(const MatrixXd& a, const MatrixXd& b) {
    Eigen::LLT<MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) return llt.solve(b);
    const double jitter = 1e-10 * a.diagonal().mean();
    MatrixXd aj = a;
    aj.diagonal().array() += jitter;
    Eigen::LLT<MatrixXd> llt2(aj);
    if (llt2.info() != Eigen::Success)
        throw SingularCovariance("symmetric solve failed after jitter");
    return llt2.solve(b);
}

/// C_zQ = (2/pi) asin(K C K) element-wise; arguments clamped to [-1, 1].
inline MatrixXd arcsine_correlation(const MatrixXd& c_zr) {
    detail::require_positive_diagonal(c_zr);
    const VectorXd k = c_zr.diagonal().array().rsqrt().matrix();
    MatrixXd rho = k.asDiagonal() * c_zr * k.asDiagonal();
    rho.diagonal().setOnes();
    return (2.0 / std::numbers::pi) *
           rho.unaryExpr([](double x) { return std::asin(std::clamp(x, -1.0, 1.0)); });
}

/// First-order expansion of the arcsine law around K C K ~ I.
inline MatrixXd arcsine_correlation_approx(const MatrixXd& c_zr) {
    detail::require_positive_diagonal(c_zr);
    const VectorXd k = c_zr.diagonal().array().rsqrt().matrix();
    MatrixXd rho = k.asDiagonal() * c_zr * k.asDiagonal();
    const Eigen::Index n = rho.rows();
    return (2.0 / std::numbers::pi) *
           (rho + (std::numbers::pi / 2.0 - 1.0) * MatrixXd::Identity(n, n));
}

/// Diagonal of A = sqrt(2/pi) diag(C)^{-1/2}.
inline VectorXd bussgang_gain(const MatrixXd& c_zr) {
    detail::require_positive_diagonal(c_zr);
    return std::sqrt(2.0 / std::numbers::pi) * c_zr.diagonal().array().rsqrt().matrix();
}

/// Unquantized covariance, its arcsine image and the Bussgang gain together.
struct CovarianceSet {
    MatrixXd c_zr;
    VectorXd k_r;   // diag(C)^{-1/2}
    MatrixXd c_zq;
    VectorXd a_r;   // sqrt(2/pi) * k_r
};

inline CovarianceSet make_covariance_set(MatrixXd c_zr) {
    CovarianceSet s;
    s.c_zr = std::move(c_zr);
    detail::require_positive_diagonal(s.c_zr);
    s.k_r = s.c_zr.diagonal().array().rsqrt().matrix();
    s.c_zq = arcsine_correlation(s.c_zr);
    s.a_r = std::sqrt(2.0 / std::numbers::pi) * s.k_r;
    return s;
}

/// C_zRp = B_eff (Phi_tilde_R R Phi_tilde_R^T + sigma_n2/2 I) B_eff^T.
inline MatrixXd pilot_covariance(const PilotMatrix& pilots, const MatrixXd& b_eff,
                                 const MatrixXd& r_h, double sigma_n2) {
    const MatrixXd& phi = pilots.phi_tilde_real;
    if (phi.cols() != r_h.rows() || b_eff.cols() != phi.rows())
        throw std::invalid_argument("pilot_covariance: dimension mismatch");
    MatrixXd inner = phi * r_h * phi.transpose();
    inner.diagonal().array() += 0.5 * sigma_n2;
    return b_eff * inner * b_eff.transpose();
}

/// Scalar pilot Bussgang gain sqrt((2/pi) * 2/(N_t sigma_x2 + sigma_n2)),
/// valid for R_h = I/2, tau = N_t and orthogonal pilots.
inline double closed_form_pilot_gain(const SystemConfig& cfg) {
    return std::sqrt((2.0 / std::numbers::pi) * 2.0 /
                     (cfg.n_users * cfg.sigma_x2 + cfg.sigma_n2));
}

/// C_zR = sigma_x2/2 B H_R H_R^T B^T + sigma_n2/2 B B^T (data phase).
inline MatrixXd data_covariance(const MatrixXd& h_real, const MatrixXd& b,
                                const SystemConfig& cfg) {
    const MatrixXd bh = b * h_real;
    return 0.5 * cfg.sigma_x2 * bh * bh.transpose() +
           0.5 * cfg.sigma_n2 * b * b.transpose();
}

/// C_nq = C_zQ - A C_zR A^T; diagonal is identically 1 - 2/pi.
inline MatrixXd quantization_noise_covariance(const MatrixXd& c_zq, const VectorXd& a_r,
                                              const MatrixXd& c_zr) {
    return c_zq - a_r.asDiagonal() * c_zr * a_r.asDiagonal();
}

}  // namespace cnet
