// SPDX-License-Identifier: Apache-2.0
//
// Seeded Monte Carlo sweeps over an SNR grid (BER / MSE / sum rate / power)
// with trial-level parallelism and order-independent reduction, plus CSV
// emission. Each trial owns an RNG stream derived from (seed, snr, trial),
// so reports are byte-identical for any worker count.

#pragma once

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cnet/bussgang.hpp"
#include "cnet/channel.hpp"
#include "cnet/detector.hpp"
#include "cnet/estimator.hpp"
#include "cnet/model.hpp"
#include "cnet/netdesign.hpp"
#include "cnet/power.hpp"
#include "cnet/rates.hpp"
#include "cnet/rng.hpp"
#include "cnet/scenario.hpp"

namespace cnet {

struct SweepFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SweepRow {
    double snr_db = 0.0;
    std::string metric;
    double value = 0.0;
    double std_err = 0.0;
    long n_trials = 0;
    std::uint64_t seed = 0;
    std::uint64_t hash = 0;
};

struct SweepReport {
    std::vector<SweepRow> rows;
    long skipped_trials = 0;
    long total_trials = 0;
};

namespace detail {

/// E[beta] for users uniform on a disc with d clamped to d0.
inline double mean_pathloss(const LargeScaleProfile& p) {
    const double ratio = p.reference_distance / p.cell_radius;
    const double p0 = ratio * ratio;
    const double n = p.path_loss_exponent;
    const double integral =
        n == 2.0 ? -std::log(p0) : (1.0 - std::pow(p0, 1.0 - n / 2.0)) / (1.0 - n / 2.0);
    return p0 + std::pow(ratio, n) * integral;
}

struct KahanSum {
    double sum = 0.0;
    double c = 0.0;
    void add(double v) {
        const double y = v - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

struct TrialResult {
    double value = 0.0;  // per-channel metric (BER / squared error / rate)
    long errors = 0;
    long bits = 0;
    bool skipped = false;
};

/// Per-SNR-point state shared by all trials (channel-independent pieces).
struct PointContext {
    SystemConfig cfg;  // sigma_n2 set for this point
    const Scenario* sc = nullptr;
    // fixed-network caches, empty when the network is drawn per trial
    bool fixed_network = false;
    ComparatorNetwork net;
    MatrixXd b;
    MatrixXd b_eff;
    EstimatorSolution est;
    MatrixXd gamma_err;     // robust estimation kernel image
    MatrixXd gamma_lambda;  // robust outdated kernel image (network-free)
};

inline ComparatorNetwork trial_network(const PointContext& ctx, const MatrixXd& h_real,
                                       std::mt19937_64& net_rng) {
    const Scenario& sc = *ctx.sc;
    switch (sc.network_mode) {
        case NetworkMode::None: return ComparatorNetwork{sc.cfg.n_antennas, {}};
        case NetworkMode::Full: return fully_connected_network(sc.cfg.n_antennas);
        case NetworkMode::Random:
            return random_network(sc.cfg.n_antennas, sc.alpha_p, net_rng);
        case NetworkMode::Greedy: return greedy_mse_search(h_real, sc.alpha_p, ctx.cfg);
        default: return sequential_sinr_search(h_real, sc.alpha_p, ctx.cfg);
    }
}

inline ChannelRealization trial_channel(const PointContext& ctx, std::mt19937_64& rng) {
    if (ctx.sc->channel_mode == FadingMode::Rayleigh) return rayleigh_channel(ctx.cfg, rng);
    return pathloss_channel(ctx.cfg, ctx.sc->profile, rng);
}

inline TrialResult run_ber_trial(const PointContext& ctx, int snr_index, long trial) {
    const Scenario& sc = *ctx.sc;
    const SystemConfig& cfg = ctx.cfg;
    TrialResult res;
    auto ch_rng = make_stream(sc.master_seed, snr_index, trial, 0);
    auto noise_rng = make_stream(sc.master_seed, snr_index, trial, 1);
    auto net_rng = make_stream(sc.master_seed, snr_index, trial, 2);

    const ChannelRealization ch = trial_channel(ctx, ch_rng);
    const ComparatorNetwork net =
        ctx.fixed_network ? ctx.net : trial_network(ctx, ch.h_real, net_rng);
    const MatrixXd b = ctx.fixed_network ? ctx.b : build_b(net);

    // channel handed to the detector, per CSI mode
    MatrixXd h_csi = ch.h_real;
    MatrixXd h_data = ch.h_real;
    MatrixXd gamma_err;
    if (sc.csi_mode == CsiMode::Estimated) {
        const PilotMatrix pilots = orthogonal_pilots(cfg);
        const MatrixXd b_eff = ctx.fixed_network ? ctx.b_eff : build_b_eff(net, cfg.pilot_len);
        EstimatorSolution est;
        if (ctx.fixed_network)
            est = ctx.est;
        else
            est = lra_lmmse_filter(pilots, b_eff,
                                   0.5 * MatrixXd::Identity(ch.h_real.size() / 2,
                                                            ch.h_real.size() / 2),
                                   cfg.sigma_n2);
        const VectorXd z_qp = quantize(b_eff * transmit_pilots(ch.h, pilots, cfg.sigma_n2,
                                                               noise_rng));
        h_csi = complex_to_real_channel(estimate_channel(est, z_qp, cfg));
        if (sc.detector_mode == DetectorMode::Robust)
            gamma_err = ctx.fixed_network ? ctx.gamma_err
                                          : gamma_matrix(est.err_corr, cfg);
    } else if (sc.csi_mode == CsiMode::OutdatedLambda) {
        // outdated CSI: detector knows h1 while data passes through the mixture
        const ChannelRealization innov = trial_channel(ctx, ch_rng);
        h_data = std::sqrt(sc.lambda) * ch.h_real +
                 std::sqrt(1.0 - sc.lambda) * innov.h_real;
    }

    DetectorFilter f;
    if (sc.detector_mode == DetectorMode::Robust && sc.csi_mode == CsiMode::OutdatedLambda)
        f = robust_lambda_detector(h_csi, b, ctx.gamma_lambda, sc.lambda, cfg);
    else if (sc.detector_mode == DetectorMode::Robust && sc.csi_mode == CsiMode::Estimated)
        f = robust_estimation_detector(h_csi, b, gamma_err, cfg);
    else
        f = lmmse_detector(h_csi, b, cfg);

    for (int n = 0; n < sc.n_noise; ++n) {
        const QpskDraw tx = qpsk_source(cfg, noise_rng);
        const VectorXd z_q = transmit_data(h_data, b, tx.symbols, cfg.sigma_n2, noise_rng);
        res.errors += detect_and_slice(f, z_q, tx, cfg);
        res.bits += 2 * cfg.n_users;
    }
    res.value = static_cast<double>(res.errors) / static_cast<double>(res.bits);
    return res;
}

inline TrialResult run_mse_trial(const PointContext& ctx, int snr_index, long trial) {
    const Scenario& sc = *ctx.sc;
    const SystemConfig& cfg = ctx.cfg;
    TrialResult res;
    auto ch_rng = make_stream(sc.master_seed, snr_index, trial, 0);
    auto noise_rng = make_stream(sc.master_seed, snr_index, trial, 1);
    auto net_rng = make_stream(sc.master_seed, snr_index, trial, 2);

    const ChannelRealization ch = trial_channel(ctx, ch_rng);
    const ComparatorNetwork net =
        ctx.fixed_network ? ctx.net : trial_network(ctx, ch.h_real, net_rng);
    const PilotMatrix pilots = orthogonal_pilots(cfg);
    const MatrixXd b_eff = ctx.fixed_network ? ctx.b_eff : build_b_eff(net, cfg.pilot_len);
    EstimatorSolution est;
    if (ctx.fixed_network)
        est = ctx.est;
    else
        est = lra_lmmse_filter(
            pilots, b_eff,
            0.5 * MatrixXd::Identity(ch.h_real.size() / 2, ch.h_real.size() / 2),
            cfg.sigma_n2);

    const VectorXd h_true = channel_vector_real(ch.h);
    KahanSum err;
    for (int n = 0; n < sc.n_noise; ++n) {
        const VectorXd z_qp =
            quantize(b_eff * transmit_pilots(ch.h, pilots, cfg.sigma_n2, noise_rng));
        err.add((estimate_channel_real(est, z_qp) - h_true).squaredNorm());
    }
    res.value = err.sum / sc.n_noise;
    return res;
}

inline TrialResult run_rate_trial(const PointContext& ctx, int snr_index, long trial) {
    const Scenario& sc = *ctx.sc;
    const SystemConfig& cfg = ctx.cfg;
    TrialResult res;
    auto ch_rng = make_stream(sc.master_seed, snr_index, trial, 0);
    auto noise_rng = make_stream(sc.master_seed, snr_index, trial, 1);
    auto net_rng = make_stream(sc.master_seed, snr_index, trial, 2);

    const ChannelRealization ch = trial_channel(ctx, ch_rng);
    const ComparatorNetwork net =
        ctx.fixed_network ? ctx.net : trial_network(ctx, ch.h_real, net_rng);
    const MatrixXd b = ctx.fixed_network ? ctx.b : build_b(net);

    const CovarianceSet cov = make_covariance_set(data_covariance(ch.h_real, b, cfg));
    const MatrixXd c_nq = quantization_noise_covariance(cov.c_zq, cov.a_r, cov.c_zr);

    if (sc.csi_mode == CsiMode::Perfect) {
        const MatrixXd c_zqx = cov.a_r.asDiagonal() * (0.5 * cfg.sigma_x2 * b * ch.h_real);
        const MatrixXd g = sym_solve(cov.c_zq, c_zqx);
        res.value = sum_rate_for_channel(ch.h_real, MatrixXd(), g, b, cov.a_r, c_nq, cfg);
        return res;
    }

    const PilotMatrix pilots = orthogonal_pilots(cfg);
    const MatrixXd b_eff = ctx.fixed_network ? ctx.b_eff : build_b_eff(net, cfg.pilot_len);
    EstimatorSolution est;
    if (ctx.fixed_network)
        est = ctx.est;
    else
        est = lra_lmmse_filter(
            pilots, b_eff,
            0.5 * MatrixXd::Identity(ch.h_real.size() / 2, ch.h_real.size() / 2),
            cfg.sigma_n2);

    KahanSum rate;
    for (int n = 0; n < sc.n_noise; ++n) {
        const VectorXd z_qp =
            quantize(b_eff * transmit_pilots(ch.h, pilots, cfg.sigma_n2, noise_rng));
        const MatrixXd h_hat =
            complex_to_real_channel(estimate_channel(est, z_qp, cfg));
        const DetectorFilter f = lmmse_detector(h_hat, b, cfg);
        const MatrixXd eps = ch.h_real - h_hat;
        rate.add(sum_rate_for_channel(h_hat, eps, f.g, b, cov.a_r, c_nq, cfg));
    }
    res.value = rate.sum / sc.n_noise;
    return res;
}

}  // namespace detail

/// Power metric: deterministic table of the three receiver models.
inline SweepReport power_report(const Scenario& sc) {
    const std::uint64_t hash = scenario_hash(sc);
    SweepReport rep;
    const int nr = sc.cfg.n_antennas;
    const auto push = [&](const std::string& name, double mw) {
        rep.rows.push_back({0.0, name, mw, 0.0, 1, sc.master_seed, hash});
    };
    push("power_1bit", p_one_bit(nr));
    push("power_cn", p_comparator_network(nr, sc.network_alpha()));
    for (int q = 2; q <= 10; ++q) push("power_q" + std::to_string(q), p_traditional(nr, q));
    return rep;
}

/// Runs the configured Monte Carlo sweep. Deterministic for a fixed seed
/// regardless of n_threads; trials that hit a singular covariance are
/// skipped, and more than 1% skipped trials fails the sweep.
inline SweepReport run_sweep(const Scenario& sc, int n_threads = 1) {
    sc.validate();
    if (sc.metric == Metric::Power) return power_report(sc);
    if (n_threads < 1) n_threads = 1;

    const std::uint64_t hash = scenario_hash(sc);
    const char* metric_name = detail::to_string(sc.metric);
    SweepReport rep;

    for (int si = 0; si < static_cast<int>(sc.snr_grid_db.size()); ++si) {
        detail::PointContext ctx;
        ctx.sc = &sc;
        ctx.cfg = sc.cfg;
        const double mean_trace =
            sc.channel_mode == FadingMode::Rayleigh
                ? static_cast<double>(sc.cfg.n_users) * sc.cfg.n_antennas
                : sc.cfg.n_users * sc.cfg.n_antennas * detail::mean_pathloss(sc.profile);
        ctx.cfg.sigma_n2 = sigma_n2_for_snr(sc.cfg, sc.snr_grid_db[si], mean_trace);

        ctx.fixed_network =
            sc.network_mode == NetworkMode::None || sc.network_mode == NetworkMode::Full;
        if (ctx.fixed_network) {
            ctx.net = sc.network_mode == NetworkMode::None
                          ? ComparatorNetwork{sc.cfg.n_antennas, {}}
                          : fully_connected_network(sc.cfg.n_antennas);
            ctx.b = build_b(ctx.net);
            if (sc.csi_mode == CsiMode::Estimated) {
                ctx.b_eff = build_b_eff(ctx.net, ctx.cfg.pilot_len);
                const Eigen::Index dim = 2 * ctx.cfg.n_antennas * ctx.cfg.n_users;
                ctx.est = lra_lmmse_filter(orthogonal_pilots(ctx.cfg), ctx.b_eff,
                                           0.5 * MatrixXd::Identity(dim, dim),
                                           ctx.cfg.sigma_n2);
                if (sc.detector_mode == DetectorMode::Robust)
                    ctx.gamma_err = gamma_matrix(ctx.est.err_corr, ctx.cfg);
            }
        }
        if (sc.detector_mode == DetectorMode::Robust &&
            sc.csi_mode == CsiMode::OutdatedLambda) {
            const Eigen::Index dim = 2 * ctx.cfg.n_antennas * ctx.cfg.n_users;
            ctx.gamma_lambda =
                gamma_matrix(0.5 * MatrixXd::Identity(dim, dim), ctx.cfg);
        }

        const long n_trials = sc.n_channels;
        std::vector<detail::TrialResult> results(n_trials);
        std::atomic<long> next{0};
        const auto worker = [&]() {
            for (;;) {
                const long t = next.fetch_add(1);
                if (t >= n_trials) return;
                try {
                    switch (sc.metric) {
                        case Metric::Ber: results[t] = detail::run_ber_trial(ctx, si, t); break;
                        case Metric::Mse: results[t] = detail::run_mse_trial(ctx, si, t); break;
                        default: results[t] = detail::run_rate_trial(ctx, si, t); break;
                    }
                } catch (const SingularCovariance&) {
                    results[t].skipped = true;
                }
            }
        };
        if (n_threads == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < n_threads; ++w) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }

        // sequential reduction in trial order, independent of worker schedule
        detail::KahanSum sum, sumsq;
        long kept = 0, errors = 0, bits = 0;
        for (const auto& r : results) {
            rep.total_trials += 1;
            if (r.skipped) {
                rep.skipped_trials += 1;
                continue;
            }
            kept += 1;
            errors += r.errors;
            bits += r.bits;
            sum.add(r.value);
            sumsq.add(r.value * r.value);
        }
        if (kept == 0) throw SweepFailure("sweep: all trials skipped at one SNR point");

        SweepRow row;
        row.snr_db = sc.snr_grid_db[si];
        row.metric = metric_name;
        row.n_trials = kept;
        row.seed = sc.master_seed;
        row.hash = hash;
        const double mean = sum.sum / kept;
        const double var = kept > 1 ? std::max(0.0, (sumsq.sum - kept * mean * mean) /
                                                        (kept - 1)) : 0.0;
        row.std_err = std::sqrt(var / kept);
        row.value = sc.metric == Metric::Ber
                        ? static_cast<double>(errors) / static_cast<double>(bits)
                        : mean;
        rep.rows.push_back(row);
    }

    if (rep.skipped_trials * 100 > rep.total_trials)
        throw SweepFailure("sweep: more than 1% of trials skipped");
    return rep;
}

namespace detail {
inline std::string csv_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}
inline std::string hex64(std::uint64_t v) {
    char buf[17];
    for (int i = 15; i >= 0; --i) {
        buf[i] = "0123456789abcdef"[v & 0xf];
        v >>= 4;
    }
    buf[16] = '\0';
    return buf;
}
}  // namespace detail

inline std::string report_to_csv(const SweepReport& rep) {
    std::ostringstream out;
    out << "snr_db,metric,value,stderr,n_trials,seed,scenario_hash\n";
    for (const auto& r : rep.rows)
        out << detail::csv_double(r.snr_db) << ',' << r.metric << ','
            << detail::csv_double(r.value) << ',' << detail::csv_double(r.std_err) << ','
            << r.n_trials << ',' << r.seed << ',' << detail::hex64(r.hash) << '\n';
    return out.str();
}

inline void emit_csv(const SweepReport& rep, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SweepFailure("emit_csv: cannot open " + path);
    out << report_to_csv(rep);
}

}  // namespace cnet
