// SPDX-License-Identifier: Apache-2.0
//
// Real-valued system representation for 1-bit receivers with a comparator
// network: complex<->real expansions, the sign quantizer and the network
// matrices B', B and B_eff.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cnet {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Scenario root: dimensions, powers and pilot length.
struct SystemConfig {
    int n_users = 1;      // N_t
    int n_antennas = 1;   // N_r
    double sigma_x2 = 1.0;
    double sigma_n2 = 1.0;
    int pilot_len = 1;    // tau

    void validate() const {
        if (n_users < 1 || n_antennas < 1 || pilot_len < 1)
            throw std::invalid_argument("SystemConfig: dimensions must be >= 1");
        if (!(sigma_x2 > 0.0) || !(sigma_n2 > 0.0))
            throw std::invalid_argument("SystemConfig: powers must be > 0");
        if (pilot_len < n_users)
            throw std::invalid_argument("SystemConfig: pilot_len must be >= n_users");
    }
};

/// Ordered list of comparator input pairs over the 2*N_r real dimensions.
struct ComparatorNetwork {
    int n_antennas = 0;
    std::vector<std::pair<int, int>> pairs;

    int alpha() const { return static_cast<int>(pairs.size()); }

    void validate() const {
        const int dim = 2 * n_antennas;
        std::vector<std::pair<int, int>> seen = pairs;
        std::sort(seen.begin(), seen.end());
        if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
            throw std::invalid_argument("ComparatorNetwork: duplicate pair");
        for (const auto& [i, j] : pairs)
            if (i < 0 || j <= i || j >= dim)
                throw std::invalid_argument("ComparatorNetwork: pair out of range");
    }
};

/// Maximum number of comparators, binom(2*N_r, 2).
inline int fully_connected_size(int n_antennas) {
    return n_antennas * (2 * n_antennas - 1);
}

namespace detail {
template <typename Derived>
    requires std::is_same_v<typename Derived::Scalar, double>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
    if (!m.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}
inline void require_finite(const MatrixXcd& m, const char* what) {
    if (!m.real().allFinite() || !m.imag().allFinite())
        throw std::invalid_argument(std::string(what) + ": non-finite entries");
}
}  // namespace detail

/// [[Re H, -Im H], [Im H, Re H]], doubling both dimensions.
inline MatrixXd complex_to_real_channel(const MatrixXcd& h) {
    detail::require_finite(h, "complex_to_real_channel");
    const auto rows = h.rows(), cols = h.cols();
    MatrixXd out(2 * rows, 2 * cols);
    out.topLeftCorner(rows, cols) = h.real();
    out.topRightCorner(rows, cols) = -h.imag();
    out.bottomLeftCorner(rows, cols) = h.imag();
    out.bottomRightCorner(rows, cols) = h.real();
    return out;
}

/// Inverse of complex_to_real_channel (reads the left block column).
inline MatrixXcd real_to_complex_channel(const MatrixXd& hr) {
    const auto rows = hr.rows() / 2, cols = hr.cols() / 2;
    MatrixXcd out(rows, cols);
    out.real() = hr.topLeftCorner(rows, cols);
    out.imag() = hr.bottomLeftCorner(rows, cols);
    return out;
}

/// Stacks [Re v; Im v].
inline VectorXd complex_to_real_vector(const VectorXcd& v) {
    VectorXd out(2 * v.size());
    out.head(v.size()) = v.real();
    out.tail(v.size()) = v.imag();
    return out;
}

inline VectorXcd real_to_complex_vector(const VectorXd& v) {
    const auto n = v.size() / 2;
    VectorXcd out(n);
    out.real() = v.head(n);
    out.imag() = v.tail(n);
    return out;
}

/// Element-wise 1-bit quantizer; sign(0) = +1.
inline VectorXd quantize(const VectorXd& v) {
    detail::require_finite(v, "quantize");
    return v.unaryExpr([](double x) { return x >= 0.0 ? 1.0 : -1.0; });
}

/// All binom(2*N_r, 2) pairs in lexicographic order.
inline ComparatorNetwork fully_connected_network(int n_antennas) {
    if (n_antennas < 1) throw std::invalid_argument("fully_connected_network: n_antennas >= 1");
    ComparatorNetwork net{n_antennas, {}};
    const int dim = 2 * n_antennas;
    net.pairs.reserve(fully_connected_size(n_antennas));
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) net.pairs.emplace_back(i, j);
    return net;
}

/// alpha_p pairs sampled uniformly without replacement from the full set.
inline ComparatorNetwork random_network(int n_antennas, int alpha_p, std::mt19937_64& rng) {
    const int alpha_f = fully_connected_size(n_antennas);
    if (alpha_p < 0 || alpha_p > alpha_f)
        throw std::invalid_argument("random_network: alpha_p exceeds fully connected size");
    ComparatorNetwork full = fully_connected_network(n_antennas);
    // partial Fisher-Yates over the lexicographic list
    for (int k = 0; k < alpha_p; ++k) {
        std::uniform_int_distribution<int> pick(k, alpha_f - 1);
        std::swap(full.pairs[k], full.pairs[pick(rng)]);
    }
    full.pairs.resize(alpha_p);
    return full;
}

/// alpha x 2N_r matrix with +-1/sqrt(2) at each pair; unit-norm rows.
inline MatrixXd build_b_prime(const ComparatorNetwork& net) {
    net.validate();
    const double s = 1.0 / std::sqrt(2.0);
    MatrixXd b = MatrixXd::Zero(net.alpha(), 2 * net.n_antennas);
    for (int r = 0; r < net.alpha(); ++r) {
        b(r, net.pairs[r].first) = s;
        b(r, net.pairs[r].second) = -s;
    }
    return b;
}

/// [I_{2N_r}; B'].
inline MatrixXd build_b(const ComparatorNetwork& net) {
    const int dim = 2 * net.n_antennas;
    MatrixXd b(dim + net.alpha(), dim);
    b.topRows(dim) = MatrixXd::Identity(dim, dim);
    b.bottomRows(net.alpha()) = build_b_prime(net);
    return b;
}

// Pilot-phase layout: y_Rp = [Re vec(Y_p); Im vec(Y_p)] with vec() stacking
// antenna entries within each pilot slot (slot-outer, antenna-inner).
// Comparator block rows are comparator-outer, slot-inner.
inline Eigen::Index pilot_real_index(int antenna_real_dim, int slot, int n_antennas, int tau) {
    // antenna_real_dim in [0, 2*N_r): first half real parts, second half imaginary
    if (antenna_real_dim < n_antennas)
        return static_cast<Eigen::Index>(slot) * n_antennas + antenna_real_dim;
    return static_cast<Eigen::Index>(tau) * n_antennas +
           static_cast<Eigen::Index>(slot) * n_antennas + (antenna_real_dim - n_antennas);
}

/// tau(2N_r+alpha) x tau(2N_r) effective network for the pilot phase.
inline MatrixXd build_b_eff(const ComparatorNetwork& net, int tau) {
    if (tau < 1) throw std::invalid_argument("build_b_eff: tau >= 1");
    net.validate();
    const int nr = net.n_antennas;
    const Eigen::Index top = static_cast<Eigen::Index>(tau) * 2 * nr;
    const double s = 1.0 / std::sqrt(2.0);
    MatrixXd b = MatrixXd::Zero(top + static_cast<Eigen::Index>(tau) * net.alpha(), top);
    b.topRows(top).setIdentity();
    for (int r = 0; r < net.alpha(); ++r) {
        for (int t = 0; t < tau; ++t) {
            const Eigen::Index row = top + static_cast<Eigen::Index>(r) * tau + t;
            b(row, pilot_real_index(net.pairs[r].first, t, nr, tau)) = s;
            b(row, pilot_real_index(net.pairs[r].second, t, nr, tau)) = -s;
        }
    }
    return b;
}

}  // namespace cnet
