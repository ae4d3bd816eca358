// SPDX-License-Identifier: Apache-2.0
//
// Channel and signal generation: Rayleigh and log-distance path-loss fading,
// orthogonal pilot construction, QPSK sources and SNR calibration.

#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "cnet/model.hpp"

namespace cnet {

struct ChannelRealization {
    MatrixXcd h;       // N_r x N_t
    MatrixXd h_real;   // 2N_r x 2N_t block expansion
    VectorXd betas;    // per-user large-scale gains
};

enum class FadingMode { Rayleigh, LogDistance };

struct LargeScaleProfile {
    double path_loss_exponent = 3.0;
    double reference_distance = 10.0;  // meters
    double cell_radius = 500.0;        // meters
    FadingMode mode = FadingMode::Rayleigh;

    void validate() const {
        if (!(path_loss_exponent > 0.0) || !(reference_distance > 0.0) || !(cell_radius > 0.0))
            throw std::invalid_argument("LargeScaleProfile: parameters must be > 0");
    }
};

struct PilotMatrix {
    MatrixXcd phi;             // tau x N_t
    MatrixXd phi_tilde_real;   // 2*tau*N_r x 2*N_r*N_t, expansion of Phi (x) I_{N_r}
};

/// h_R = [Re vec(H); Im vec(H)].
inline VectorXd channel_vector_real(const MatrixXcd& h) {
    const VectorXcd hv = Eigen::Map<const VectorXcd>(h.data(), h.size());
    return complex_to_real_vector(hv);
}

inline MatrixXcd channel_from_vector(const VectorXd& h_r, int n_antennas, int n_users) {
    const VectorXcd hv = real_to_complex_vector(h_r);
    return Eigen::Map<const MatrixXcd>(hv.data(), n_antennas, n_users);
}

inline MatrixXcd draw_iid_gaussian(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    MatrixXcd h(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) h(r, c) = {gauss(rng), gauss(rng)};
    return h;
}

/// i.i.d. CN(0,1) entries, beta_i = 1.
inline ChannelRealization rayleigh_channel(const SystemConfig& cfg, std::mt19937_64& rng) {
    ChannelRealization ch;
    ch.h = draw_iid_gaussian(cfg.n_antennas, cfg.n_users, rng);
    ch.h_real = complex_to_real_channel(ch.h);
    ch.betas = VectorXd::Ones(cfg.n_users);
    return ch;
}

/// Users uniform on a disc; beta_i = (d0/d_i)^n_PL with d_i clamped to d0.
inline ChannelRealization pathloss_channel(const SystemConfig& cfg, const LargeScaleProfile& profile,
                                           std::mt19937_64& rng) {
    profile.validate();
    if (profile.mode != FadingMode::LogDistance)
        throw std::invalid_argument("pathloss_channel: profile mode must be LogDistance");
    ChannelRealization ch;
    ch.betas.resize(cfg.n_users);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < cfg.n_users; ++i) {
        // P(d <= r) = (r/R)^2 on a disc
        double d = profile.cell_radius * std::sqrt(unif(rng));
        d = std::max(d, profile.reference_distance);
        ch.betas(i) = std::pow(profile.reference_distance / d, profile.path_loss_exponent);
    }
    ch.h = draw_iid_gaussian(cfg.n_antennas, cfg.n_users, rng) *
           ch.betas.array().sqrt().matrix().asDiagonal();
    ch.h_real = complex_to_real_channel(ch.h);
    return ch;
}

/// First N_t columns of the tau-point DFT matrix, scaled so every entry has
/// |phi|^2 = sigma_x^2 and Phi^H Phi = tau sigma_x^2 I.
inline PilotMatrix orthogonal_pilots(const SystemConfig& cfg) {
    cfg.validate();
    const int tau = cfg.pilot_len, nt = cfg.n_users, nr = cfg.n_antennas;
    const double amp = std::sqrt(cfg.sigma_x2);
    PilotMatrix p;
    p.phi.resize(tau, nt);
    for (int t = 0; t < tau; ++t)
        for (int u = 0; u < nt; ++u)
            p.phi(t, u) = std::polar(amp, -2.0 * std::numbers::pi * t * u / tau);
    // Phi (x) I_{N_r}, rows follow the pilot-phase layout (slot-outer, antenna-inner)
    MatrixXcd phi_tilde = MatrixXcd::Zero(static_cast<Eigen::Index>(tau) * nr,
                                          static_cast<Eigen::Index>(nt) * nr);
    for (int t = 0; t < tau; ++t)
        for (int u = 0; u < nt; ++u)
            phi_tilde.block(static_cast<Eigen::Index>(t) * nr, static_cast<Eigen::Index>(u) * nr,
                            nr, nr) = p.phi(t, u) * MatrixXcd::Identity(nr, nr);
    p.phi_tilde_real = complex_to_real_channel(phi_tilde);
    return p;
}

/// Noise power for a target average receive SNR per user per antenna.
inline double sigma_n2_for_snr(const SystemConfig& cfg, double snr_db,
                               double channel_ensemble_mean_trace) {
    return cfg.sigma_x2 * channel_ensemble_mean_trace /
           (cfg.n_users * cfg.n_antennas * std::pow(10.0, snr_db / 10.0));
}

/// Rayleigh case: E{trace(HH^H)} = N_r N_t.
inline double sigma_n2_for_snr(const SystemConfig& cfg, double snr_db) {
    return sigma_n2_for_snr(cfg, snr_db, static_cast<double>(cfg.n_users) * cfg.n_antennas);
}

struct QpskDraw {
    VectorXcd symbols;           // N_t
    std::vector<int> bits;       // 2 per user: (bit0 -> real sign, bit1 -> imag sign)
};

/// Gray-labeled QPSK: bit 0 maps to +, bit 1 to -.
inline QpskDraw qpsk_source(const SystemConfig& cfg, std::mt19937_64& rng) {
    const double a = std::sqrt(cfg.sigma_x2 / 2.0);
    std::uniform_int_distribution<int> bit(0, 1);
    QpskDraw d;
    d.symbols.resize(cfg.n_users);
    d.bits.resize(2 * cfg.n_users);
    for (int u = 0; u < cfg.n_users; ++u) {
        const int b0 = bit(rng), b1 = bit(rng);
        d.bits[2 * u] = b0;
        d.bits[2 * u + 1] = b1;
        d.symbols(u) = {b0 ? -a : a, b1 ? -a : a};
    }
    return d;
}

/// y_Rp = Phi_tilde_R h_R + n_Rp, real noise entries of variance sigma_n2/2.
inline VectorXd transmit_pilots(const MatrixXcd& h, const PilotMatrix& pilots, double sigma_n2,
                                std::mt19937_64& rng) {
    const VectorXd h_r = channel_vector_real(h);
    VectorXd y = pilots.phi_tilde_real * h_r;
    std::normal_distribution<double> noise(0.0, std::sqrt(sigma_n2 / 2.0));
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += noise(rng);
    return y;
}

}  // namespace cnet
