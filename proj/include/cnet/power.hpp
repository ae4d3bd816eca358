// SPDX-License-Identifier: Apache-2.0
//
// Receiver power-consumption model: 1-bit, multi-bit and comparator-network
// front ends. Inputs SI, outputs milliwatts.

#pragma once

#include <cmath>
#include <stdexcept>

namespace cnet {

struct PowerParams {
    double p_lo = 22.5e-3;    // W, local oscillator
    double p_lna = 5.4e-3;    // W, low-noise amplifier
    double p_h = 3.0e-3;      // W, 90-degree hybrid
    double p_m = 0.3e-3;      // W, mixer
    double p_agc = 2.0e-3;    // W, automatic gain control
    double fom = 15e-15;      // J per conversion step
    double f_nyquist = 2.5e9; // Hz

    void validate() const {
        if (!(p_lo > 0 && p_lna > 0 && p_h > 0 && p_m > 0 && p_agc > 0 && fom > 0 &&
              f_nyquist > 0))
            throw std::invalid_argument("PowerParams: all parameters must be > 0");
    }
};

namespace detail {
inline double rf_chain_watts(int n_antennas, const PowerParams& p) {
    return p.p_lo + n_antennas * (p.p_lna + p.p_h + 2.0 * p.p_m);
}
}  // namespace detail

/// P_LO + N_r(P_LNA + P_H + 2P_M) + 2N_r FOM 2f_Nyq, in mW.
inline double p_one_bit(int n_antennas, const PowerParams& p = {}) {
    p.validate();
    if (n_antennas < 0) throw std::invalid_argument("p_one_bit: n_antennas >= 0");
    return 1e3 * (detail::rf_chain_watts(n_antennas, p) +
                  2.0 * n_antennas * p.fom * 2.0 * p.f_nyquist);
}

/// P_LO + N_r(P_LNA + P_H + 2P_M) + 2N_r(P_AGC + FOM 2^q f_Nyq), in mW.
inline double p_traditional(int n_antennas, int q_bits, const PowerParams& p = {}) {
    p.validate();
    if (n_antennas < 0 || q_bits < 1)
        throw std::invalid_argument("p_traditional: need n_antennas >= 0, q_bits >= 1");
    return 1e3 * (detail::rf_chain_watts(n_antennas, p) +
                  2.0 * n_antennas * (p.p_agc + p.fom * std::pow(2.0, q_bits) * p.f_nyquist));
}

/// P_LO + N_r(P_LNA + P_H + 2P_M) + (2N_r + alpha) FOM 2f_Nyq, in mW.
inline double p_comparator_network(int n_antennas, int alpha, const PowerParams& p = {}) {
    p.validate();
    if (n_antennas < 0 || alpha < 0)
        throw std::invalid_argument("p_comparator_network: need n_antennas, alpha >= 0");
    return 1e3 * (detail::rf_chain_watts(n_antennas, p) +
                  (2.0 * n_antennas + alpha) * p.fom * 2.0 * p.f_nyquist);
}

}  // namespace cnet
