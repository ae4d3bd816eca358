// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "cnet/detector.hpp"
#include "cnet/estimator.hpp"
#include "cnet/rng.hpp"

using namespace cnet;

namespace {

double linear_model_symbol_mse(const DetectorFilter& f, const SystemConfig& cfg) {
    const MatrixXd q = f.g.transpose() * f.c_zq * f.g - 2.0 * f.g.transpose() * f.c_zqx;
    return q.trace() + cfg.n_users * cfg.sigma_x2;
}

}  // namespace

TEST_CASE("scalar closed form for the 1x1 real channel", "[detector]") {
    SystemConfig cfg{1, 1, 1.0, 1.0, 1};
    MatrixXcd h(1, 1);
    h(0, 0) = 1.0;
    const ComparatorNetwork net{1, {}};
    const DetectorFilter f = lmmse_detector(complex_to_real_channel(h), build_b(net), cfg);
    // C_zR = I, so C_zQ = I and G = C_zQx = sqrt(2/pi)/2 I
    const double expect = std::sqrt(2.0 / std::numbers::pi) / 2.0;
    REQUIRE((f.g - expect * MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("filter vanishes as noise dominates", "[detector]") {
    SystemConfig cfg{2, 3, 1.0, 1e10, 2};
    auto rng = make_stream(41, 0);
    const ChannelRealization ch = rayleigh_channel(cfg, rng);
    const ComparatorNetwork net = random_network(cfg.n_antennas, 2, rng);
    const DetectorFilter f = lmmse_detector(ch.h_real, build_b(net), cfg);
    REQUIRE(f.g.cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("full network never hurts the linear-model symbol MSE", "[detector]") {
    SystemConfig cfg{2, 4, 1.0, 0.1, 2};
    double acc_none = 0.0, acc_full = 0.0;
    for (int c = 0; c < 100; ++c) {
        auto rng = make_stream(42, c);
        const ChannelRealization ch = rayleigh_channel(cfg, rng);
        const ComparatorNetwork none{cfg.n_antennas, {}};
        acc_none += linear_model_symbol_mse(lmmse_detector(ch.h_real, build_b(none), cfg), cfg);
        acc_full += linear_model_symbol_mse(
            lmmse_detector(ch.h_real, build_b(fully_connected_network(cfg.n_antennas)), cfg),
            cfg);
    }
    REQUIRE(acc_full < acc_none);
}

TEST_CASE("lmmse filter is first-order optimal", "[detector]") {
    for (int rep = 0; rep < 20; ++rep) {
        SystemConfig cfg{2, 2, 1.0, 0.2 + 0.1 * rep, 2};
        auto rng = make_stream(43, rep);
        const ChannelRealization ch = rayleigh_channel(cfg, rng);
        const ComparatorNetwork net = random_network(cfg.n_antennas, 3, rng);
        const DetectorFilter f = lmmse_detector(ch.h_real, build_b(net), cfg);
        const double base = linear_model_symbol_mse(f, cfg);
        std::uniform_int_distribution<int> pr(0, static_cast<int>(f.g.rows()) - 1);
        std::uniform_int_distribution<int> pc(0, static_cast<int>(f.g.cols()) - 1);
        for (int t = 0; t < 10; ++t) {
            DetectorFilter pert = f;
            pert.g(pr(rng), pc(rng)) += (t % 2 ? 1e-4 : -1e-4);
            REQUIRE(linear_model_symbol_mse(pert, cfg) >= base - 1e-12);
        }
    }
}

TEST_CASE("gamma matrix exact forms", "[detector]") {
    SECTION("scaled identity kernel at N_t = 2") {
        SystemConfig cfg{2, 2, 1.0, 1.0, 2};
        const int dim = 2 * cfg.n_antennas * cfg.n_users;
        const MatrixXd gamma = gamma_matrix(0.7 * MatrixXd::Identity(dim, dim), cfg);
        const MatrixXd expect =
            0.7 * cfg.n_users * cfg.sigma_x2 * MatrixXd::Identity(4, 4);
        REQUIRE((gamma - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("hand enumeration at N_t = 1") {
        SystemConfig cfg{1, 1, 2.0, 1.0, 1};
        MatrixXd m(2, 2);
        m << 1.0, 0.3, 0.3, 2.0;
        const MatrixXd gamma = gamma_matrix(m, cfg);
        const double a = std::sqrt(cfg.sigma_x2 / 2.0);
        MatrixXd expect = MatrixXd::Zero(2, 2);
        for (double re : {a, -a})
            for (double im : {a, -a}) {
                MatrixXd x(2, 2);
                x << re, -im, im, re;
                expect += 0.25 * x * m * x.transpose();
            }
        REQUIRE((gamma - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("sampled mode converges to exact") {
        SystemConfig cfg{3, 2, 1.0, 1.0, 3};
        const int dim = 2 * cfg.n_antennas * cfg.n_users;
        auto krng = make_stream(44, 0);
        std::normal_distribution<double> g(0.0, 1.0);
        MatrixXd a(dim, dim);
        for (int c = 0; c < dim; ++c)
            for (int r = 0; r < dim; ++r) a(r, c) = g(krng);
        const MatrixXd kernel = a * a.transpose() / dim;
        const MatrixXd exact = gamma_matrix(kernel, cfg);
        auto srng = make_stream(44, 1);
        const MatrixXd sampled =
            gamma_matrix(kernel, cfg, GammaMode::Sampled, &srng, 100000);
        REQUIRE((sampled - exact).norm() / exact.norm() < 0.01);
    }
    SECTION("exact mode refuses oversized constellations") {
        SystemConfig cfg{9, 1, 1.0, 1.0, 9};
        const int dim = 2 * cfg.n_antennas * cfg.n_users;
        REQUIRE_THROWS_AS(gamma_matrix(MatrixXd::Identity(dim, dim), cfg),
                          std::invalid_argument);
    }
}

TEST_CASE("robust lambda detector limits", "[detector]") {
    SystemConfig cfg{2, 4, 1.0, 0.1, 2};
    auto rng = make_stream(45, 0);
    const ChannelRealization ch = rayleigh_channel(cfg, rng);
    const ComparatorNetwork net = random_network(cfg.n_antennas, 4, rng);
    const MatrixXd b = build_b(net);
    const int dim = 2 * cfg.n_antennas * cfg.n_users;
    const MatrixXd gamma = gamma_matrix(0.5 * MatrixXd::Identity(dim, dim), cfg);

    const DetectorFilter plain = lmmse_detector(ch.h_real, b, cfg);
    const DetectorFilter near1 = robust_lambda_detector(ch.h_real, b, gamma, 1.0, cfg);
    REQUIRE((near1.g - plain.g).norm() < 1e-10);

    const DetectorFilter eps1 = robust_lambda_detector(ch.h_real, b, gamma, 0.999, cfg);
    const DetectorFilter eps2 = robust_lambda_detector(ch.h_real, b, gamma, 0.9999, cfg);
    REQUIRE((eps2.g - plain.g).norm() < (eps1.g - plain.g).norm());

    const DetectorFilter zero = robust_lambda_detector(ch.h_real, b, gamma, 0.0, cfg);
    REQUIRE(zero.g.cwiseAbs().maxCoeff() < 1e-12);

    REQUIRE_THROWS_AS(robust_lambda_detector(ch.h_real, b, gamma, 1.5, cfg),
                      std::invalid_argument);
}

TEST_CASE("robust estimation detector reduces to lmmse for zero error", "[detector]") {
    SystemConfig cfg{2, 3, 1.0, 0.2, 2};
    auto rng = make_stream(46, 0);
    const ChannelRealization ch = rayleigh_channel(cfg, rng);
    const ComparatorNetwork net = random_network(cfg.n_antennas, 3, rng);
    const MatrixXd b = build_b(net);
    const MatrixXd zero_gamma = MatrixXd::Zero(2 * cfg.n_antennas, 2 * cfg.n_antennas);
    const DetectorFilter robust = robust_estimation_detector(ch.h_real, b, zero_gamma, cfg);
    const DetectorFilter plain = lmmse_detector(ch.h_real, b, cfg);
    REQUIRE((robust.g - plain.g).cwiseAbs().maxCoeff() < 1e-12);

    // useless estimate: large gamma shrinks the filter
    const int dim = 2 * cfg.n_antennas * cfg.n_users;
    const MatrixXd big_gamma = gamma_matrix(50.0 * MatrixXd::Identity(dim, dim), cfg);
    const DetectorFilter shrunk =
        robust_estimation_detector(ch.h_real, b, big_gamma, cfg);
    REQUIRE(shrunk.g.norm() < 0.2 * plain.g.norm());
}

TEST_CASE("slicing conventions", "[detector]") {
    SystemConfig cfg{2, 2, 1.0, 0.1, 2};
    auto rng = make_stream(47, 0);
    const ChannelRealization ch = rayleigh_channel(cfg, rng);
    const ComparatorNetwork net{cfg.n_antennas, {}};
    const MatrixXd b = build_b(net);
    const DetectorFilter f = lmmse_detector(ch.h_real, b, cfg);

    SECTION("global sign flip flips every bit") {
        const QpskDraw tx = qpsk_source(cfg, rng);
        const VectorXd z = transmit_data(ch.h_real, b, tx.symbols, cfg.sigma_n2, rng);
        const int e1 = detect_and_slice(f, z, tx, cfg);
        const int e2 = detect_and_slice(f, VectorXd(-z), tx, cfg);
        REQUIRE(e1 + e2 == 2 * cfg.n_users);
    }
    SECTION("null filter guesses at BER one half") {
        DetectorFilter null = f;
        null.g.setZero();
        long errors = 0, bits = 0;
        for (int t = 0; t < 10000; ++t) {
            const QpskDraw tx = qpsk_source(cfg, rng);
            const VectorXd z = transmit_data(ch.h_real, b, tx.symbols, cfg.sigma_n2, rng);
            errors += detect_and_slice(null, z, tx, cfg);
            bits += 2 * cfg.n_users;
        }
        // x_hat = 0 slices every stream to bits (0,0)
        const double ber = static_cast<double>(errors) / bits;
        REQUIRE(ber == Catch::Approx(0.5).margin(0.02));
    }
}

TEST_CASE("robust estimation pipeline beats the mismatched one", "[detector]") {
    // pilots at 0 dB, data at 10 dB: the estimation error is large enough for
    // the error-aware covariance to matter, and the symbol MSE is the
    // criterion the robust filter optimizes
    SystemConfig cfg{2, 4, 1.0, 1.0, 2};
    cfg.sigma_n2 = sigma_n2_for_snr(cfg, 10.0);
    SystemConfig cfg_pilot = cfg;
    cfg_pilot.sigma_n2 = sigma_n2_for_snr(cfg, 0.0);
    const PilotMatrix pilots = orthogonal_pilots(cfg_pilot);
    const ComparatorNetwork net{cfg.n_antennas, {}};
    const MatrixXd b = build_b(net);
    const MatrixXd b_eff = build_b_eff(net, cfg.pilot_len);
    const int dim = 2 * cfg.n_antennas * cfg.n_users;
    const EstimatorSolution est = lra_lmmse_filter(
        pilots, b_eff, 0.5 * MatrixXd::Identity(dim, dim), cfg_pilot.sigma_n2);
    const MatrixXd gamma_err = gamma_matrix(est.err_corr, cfg);

    double se_robust = 0.0, se_plain = 0.0;
    for (int c = 0; c < 500; ++c) {
        auto rng = make_stream(48, c);
        const ChannelRealization ch = rayleigh_channel(cfg, rng);
        const VectorXd z_qp =
            quantize(b_eff * transmit_pilots(ch.h, pilots, cfg_pilot.sigma_n2, rng));
        const MatrixXd h_hat = complex_to_real_channel(estimate_channel(est, z_qp, cfg));
        const DetectorFilter robust = robust_estimation_detector(h_hat, b, gamma_err, cfg);
        const DetectorFilter plain = lmmse_detector(h_hat, b, cfg);
        for (int n = 0; n < 200; ++n) {
            const QpskDraw tx = qpsk_source(cfg, rng);
            const VectorXd x_real = complex_to_real_vector(tx.symbols);
            const VectorXd z = transmit_data(ch.h_real, b, tx.symbols, cfg.sigma_n2, rng);
            se_robust += (robust.g.transpose() * z - x_real).squaredNorm();
            se_plain += (plain.g.transpose() * z - x_real).squaredNorm();
        }
    }
    REQUIRE(se_robust < se_plain);
}
