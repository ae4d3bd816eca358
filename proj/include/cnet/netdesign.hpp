// SPDX-License-Identifier: Apache-2.0
//
// Comparator-network selection: per-comparator virtual SINR, per-stream MSE
// under the linearized model, greedy MSE search and sequential SINR search.
//
// The greedy search evaluates candidate swaps through rank-one Schur
// complements of a precomputed full-network covariance, so a full scan costs
// one factorization per slot instead of one per candidate.

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cnet/bussgang.hpp"
#include "cnet/detector.hpp"
#include "cnet/model.hpp"

namespace cnet {

struct StreamMetrics {
    VectorXd mse_per_stream;  // 2N_t
    MatrixXd sinr_table;      // alpha_f x 2N_t
};

/// SINR_{l,k} = (sigma_x2/2)|[B'H_R]_{l,k}|^2 /
///              ((sigma_x2/2) sum_{j!=k}|[B'H_R]_{l,j}|^2 + sigma_n2).
inline MatrixXd virtual_sinr(const MatrixXd& h_real, const MatrixXd& b_prime,
                             const SystemConfig& cfg) {
    const MatrixXd p = (b_prime * h_real).array().square();
    const VectorXd row_sums = p.rowwise().sum();
    MatrixXd sinr(p.rows(), p.cols());
    for (Eigen::Index l = 0; l < p.rows(); ++l)
        for (Eigen::Index k = 0; k < p.cols(); ++k)
            sinr(l, k) = 0.5 * cfg.sigma_x2 * p(l, k) /
                         (0.5 * cfg.sigma_x2 * (row_sums(l) - p(l, k)) + cfg.sigma_n2);
    return sinr;
}

/// MSE_k = [G^T C_zQ G - 2 G^T C_zQx + C_x]_{k,k} with the LMMSE G.
inline VectorXd per_stream_mse(const MatrixXd& h_real, const MatrixXd& b,
                               const SystemConfig& cfg) {
    const DetectorFilter f = lmmse_detector(h_real, b, cfg);
    const MatrixXd q = f.g.transpose() * f.c_zq * f.g - 2.0 * f.g.transpose() * f.c_zqx;
    return q.diagonal().array() + 0.5 * cfg.sigma_x2;
}

namespace detail {

/// Total linear-model MSE of an index subset of the precomputed full-network
/// covariances: trace(C_x) - trace(C_zQx^T C_zQ^{-1} C_zQx) on the subset.
inline double subset_total_mse(const MatrixXd& c_zq_full, const MatrixXd& c_zqx_full,
                               const std::vector<int>& rows, const SystemConfig& cfg) {
    const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index nx = c_zqx_full.cols();
    MatrixXd c(m, m);
    MatrixXd cx(m, nx);
    for (Eigen::Index a = 0; a < m; ++a) {
        cx.row(a) = c_zqx_full.row(rows[a]);
        for (Eigen::Index b = 0; b < m; ++b) c(a, b) = c_zq_full(rows[a], rows[b]);
    }
    const MatrixXd y = sym_solve(c, cx);
    return cfg.n_users * cfg.sigma_x2 - (cx.array() * y.array()).sum();
}

}  // namespace detail

/// Algorithm: start from the first alpha_p lexicographic pairs; for each slot,
/// scan every comparator row outside the network and swap in any candidate
/// that strictly lowers the total linear-model MSE, updating the incumbent
/// inside the scan. Ties keep the incumbent.
inline ComparatorNetwork greedy_mse_search(const MatrixXd& h_real, int alpha_p,
                                           const SystemConfig& cfg) {
    const int nr = cfg.n_antennas;
    const int alpha_f = fully_connected_size(nr);
    if (alpha_p < 0 || alpha_p > alpha_f)
        throw std::invalid_argument("greedy_mse_search: alpha_p out of range");

    const ComparatorNetwork full = fully_connected_network(nr);
    const MatrixXd b_full = build_b(full);
    const CovarianceSet cov = make_covariance_set(data_covariance(h_real, b_full, cfg));
    const MatrixXd c_zqx_full =
        cov.a_r.asDiagonal() * (0.5 * cfg.sigma_x2 * b_full * h_real);

    const int dim = 2 * nr;
    // selected[i] indexes the comparator list; row index in the covariances is
    // dim + selected[i]
    std::vector<int> selected(alpha_p);
    std::vector<char> in_net(alpha_f, 0);
    for (int i = 0; i < alpha_p; ++i) {
        selected[i] = i;
        in_net[i] = 1;
    }
    if (alpha_p == 0 || alpha_p == alpha_f)
        return ComparatorNetwork{nr, {full.pairs.begin(), full.pairs.begin() + alpha_p}};

    const Eigen::Index nx = c_zqx_full.cols();
    for (int slot = 0; slot < alpha_p; ++slot) {
        // rows held fixed during this scan: identity rows + other selected rows
        std::vector<int> rest;
        rest.reserve(dim + alpha_p - 1);
        for (int r = 0; r < dim; ++r) rest.push_back(r);
        for (int i = 0; i < alpha_p; ++i)
            if (i != slot) rest.push_back(dim + selected[i]);
        const Eigen::Index m = static_cast<Eigen::Index>(rest.size());

        MatrixXd c_m(m, m);
        MatrixXd cx_m(m, nx);
        for (Eigen::Index a = 0; a < m; ++a) {
            cx_m.row(a) = c_zqx_full.row(rest[a]);
            for (Eigen::Index b = 0; b < m; ++b) c_m(a, b) = cov.c_zq(rest[a], rest[b]);
        }
        Eigen::LLT<MatrixXd> llt(c_m);
        if (llt.info() != Eigen::Success)
            throw SingularCovariance("greedy_mse_search: base factorization failed");
        const MatrixXd y = llt.solve(cx_m);
        const double t0 = (cx_m.array() * y.array()).sum();

        // quadratic trace added by one extra row via its Schur complement
        VectorXd u(m);
        const auto added_trace = [&](int row) -> double {
            for (Eigen::Index a = 0; a < m; ++a) u(a) = cov.c_zq(rest[a], row);
            const VectorXd v = llt.solve(u);
            const double s = 1.0 - u.dot(v);
            if (s < 1e-12) return -1.0;  // degenerate, caller skips
            const VectorXd diff = c_zqx_full.row(row).transpose() - cx_m.transpose() * v;
            return diff.squaredNorm() / s;
        };

        int best = selected[slot];
        double best_mse = cfg.n_users * cfg.sigma_x2 - (t0 + added_trace(dim + best));
        for (int cand = 0; cand < alpha_f; ++cand) {
            if (in_net[cand]) continue;
            const double add = added_trace(dim + cand);
            if (add < 0.0) continue;
            const double mse = cfg.n_users * cfg.sigma_x2 - (t0 + add);
            if (mse < best_mse) {
                best_mse = mse;
                best = cand;
            }
        }
        if (best != selected[slot]) {
            in_net[selected[slot]] = 0;
            in_net[best] = 1;
            selected[slot] = best;
        }
    }

    ComparatorNetwork net{nr, {}};
    std::sort(selected.begin(), selected.end());
    net.pairs.reserve(alpha_p);
    for (int idx : selected) net.pairs.push_back(full.pairs[idx]);
    return net;
}

/// Algorithm: precompute the SINR table; repeat alpha_p times — find the
/// stream with the largest per-stream MSE under the current network, then
/// append the unused comparator with the largest SINR for that stream.
/// Ties resolve to the lowest index.
inline ComparatorNetwork sequential_sinr_search(const MatrixXd& h_real, int alpha_p,
                                                const SystemConfig& cfg) {
    const int nr = cfg.n_antennas;
    const int alpha_f = fully_connected_size(nr);
    if (alpha_p < 0 || alpha_p > alpha_f)
        throw std::invalid_argument("sequential_sinr_search: alpha_p out of range");

    const ComparatorNetwork full = fully_connected_network(nr);
    const MatrixXd sinr = virtual_sinr(h_real, build_b_prime(full), cfg);

    ComparatorNetwork net{nr, {}};
    std::vector<char> used(alpha_f, 0);
    for (int step = 0; step < alpha_p; ++step) {
        const VectorXd mse = per_stream_mse(h_real, build_b(net), cfg);
        Eigen::Index k_max = 0;
        mse.maxCoeff(&k_max);
        int l_max = -1;
        double best = -1.0;
        for (int l = 0; l < alpha_f; ++l) {
            if (used[l]) continue;
            if (sinr(l, k_max) > best) {
                best = sinr(l, k_max);
                l_max = l;
            }
        }
        used[l_max] = 1;
        net.pairs.push_back(full.pairs[l_max]);
    }
    return net;
}

}  // namespace cnet
