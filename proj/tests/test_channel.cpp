// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "cnet/channel.hpp"
#include "cnet/rng.hpp"

using namespace cnet;

TEST_CASE("rayleigh channel moments", "[channel]") {
    SystemConfig cfg{2, 4, 1.0, 1.0, 2};
    auto rng = make_stream(1, 0);
    double sum_abs2 = 0.0;
    const int draws = 20000;
    for (int d = 0; d < draws; ++d) {
        const ChannelRealization ch = rayleigh_channel(cfg, rng);
        sum_abs2 += ch.h.squaredNorm();
        REQUIRE(ch.betas.isOnes());
    }
    const double mean_entry = sum_abs2 / (draws * 8.0);
    REQUIRE(mean_entry == Catch::Approx(1.0).margin(0.01));
}

TEST_CASE("rayleigh channel is seed deterministic", "[channel]") {
    SystemConfig cfg{2, 3, 1.0, 1.0, 2};
    auto r1 = make_stream(5, 0);
    auto r2 = make_stream(5, 0);
    REQUIRE(rayleigh_channel(cfg, r1).h == rayleigh_channel(cfg, r2).h);
}

TEST_CASE("pathloss channel clamps to the reference distance", "[channel]") {
    SystemConfig cfg{3, 2, 1.0, 1.0, 3};
    LargeScaleProfile p;
    p.mode = FadingMode::LogDistance;
    p.cell_radius = p.reference_distance;  // every user clamps to d0
    auto rng = make_stream(2, 0);
    const ChannelRealization ch = pathloss_channel(cfg, p, rng);
    REQUIRE(ch.betas.isOnes());
}

TEST_CASE("pathloss distance distribution is uniform on the disc", "[channel]") {
    SystemConfig cfg{1, 1, 1.0, 1.0, 1};
    LargeScaleProfile p;
    p.mode = FadingMode::LogDistance;
    auto rng = make_stream(3, 0);
    // recover d from beta = (d0/d)^n and check P(d <= r) = (r/R)^2
    std::vector<double> d;
    for (int i = 0; i < 10000; ++i) {
        const ChannelRealization ch = pathloss_channel(cfg, p, rng);
        d.push_back(p.reference_distance *
                    std::pow(ch.betas(0), -1.0 / p.path_loss_exponent));
    }
    std::sort(d.begin(), d.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double cdf_model = std::pow(d[i] / p.cell_radius, 2.0);
        const double cdf_emp = static_cast<double>(i + 1) / d.size();
        worst = std::max(worst, std::abs(cdf_model - cdf_emp));
    }
    REQUIRE(worst < 0.02);  // KS bound at 1e4 draws

    LargeScaleProfile wrong;
    REQUIRE_THROWS_AS(pathloss_channel(cfg, wrong, rng), std::invalid_argument);
}

TEST_CASE("orthogonal pilots", "[channel]") {
    SECTION("single user") {
        SystemConfig cfg{1, 2, 2.0, 1.0, 1};
        const PilotMatrix p = orthogonal_pilots(cfg);
        REQUIRE(std::abs(p.phi(0, 0) - std::sqrt(2.0)) < 1e-12);
        const MatrixXd gram = p.phi_tilde_real.transpose() * p.phi_tilde_real;
        REQUIRE((gram - 2.0 * MatrixXd::Identity(gram.rows(), gram.cols())).norm() < 1e-10);
    }
    SECTION("orthogonality and per-symbol power across sizes") {
        for (int nt : {2, 4, 8, 16}) {
            for (int tau : {nt, nt + 3}) {
                SystemConfig cfg{nt, 3, 1.0, 1.0, tau};
                const PilotMatrix p = orthogonal_pilots(cfg);
                for (int t = 0; t < tau; ++t)
                    for (int u = 0; u < nt; ++u)
                        REQUIRE(std::norm(p.phi(t, u)) == Catch::Approx(1.0).margin(1e-12));
                const MatrixXd gram = p.phi_tilde_real.transpose() * p.phi_tilde_real;
                REQUIRE((gram - tau * MatrixXd::Identity(gram.rows(), gram.cols()))
                            .cwiseAbs()
                            .maxCoeff() < 1e-10);
            }
        }
    }
}

TEST_CASE("snr calibration", "[channel]") {
    SystemConfig cfg{4, 16, 1.0, 1.0, 4};
    REQUIRE(sigma_n2_for_snr(cfg, 0.0) == Catch::Approx(1.0));
    REQUIRE(sigma_n2_for_snr(cfg, 10.0) == Catch::Approx(0.1));
    REQUIRE(sigma_n2_for_snr(cfg, 30.0) == Catch::Approx(0.001));
    // general definition with an explicit ensemble mean trace
    REQUIRE(sigma_n2_for_snr(cfg, 0.0, 32.0) == Catch::Approx(0.5));
}

TEST_CASE("qpsk source mapping and moments", "[channel]") {
    SystemConfig cfg{2, 1, 2.0, 1.0, 2};
    auto rng = make_stream(4, 0);
    const double a = 1.0;  // sqrt(sigma_x2/2)
    MatrixXd acc = MatrixXd::Zero(4, 4);
    const int draws = 100000;
    for (int d = 0; d < draws; ++d) {
        const QpskDraw q = qpsk_source(cfg, rng);
        for (int u = 0; u < 2; ++u) {
            REQUIRE(std::norm(q.symbols(u)) == Catch::Approx(2.0));
            REQUIRE(q.symbols(u).real() == (q.bits[2 * u] ? -a : a));
            REQUIRE(q.symbols(u).imag() == (q.bits[2 * u + 1] ? -a : a));
        }
        const VectorXd xr = complex_to_real_vector(q.symbols);
        acc += xr * xr.transpose();
    }
    acc /= draws;
    REQUIRE((acc - MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 0.01);
}

TEST_CASE("pilot transmission", "[channel]") {
    SystemConfig cfg{2, 3, 1.0, 1.0, 2};
    const PilotMatrix p = orthogonal_pilots(cfg);
    auto rng = make_stream(6, 0);
    const ChannelRealization ch = rayleigh_channel(cfg, rng);

    SECTION("noiseless case is the exact linear map") {
        auto nrng = make_stream(6, 1);
        const VectorXd y = transmit_pilots(ch.h, p, 0.0, nrng);
        REQUIRE((y - p.phi_tilde_real * channel_vector_real(ch.h)).norm() < 1e-14);
    }
    SECTION("matches the matrix form Y = H Phi^T + N") {
        auto nrng = make_stream(6, 2);
        const VectorXd y = transmit_pilots(ch.h, p, 0.0, nrng);
        const MatrixXcd yp = ch.h * p.phi.transpose();  // N_r x tau
        for (int t = 0; t < cfg.pilot_len; ++t)
            for (int r = 0; r < cfg.n_antennas; ++r) {
                REQUIRE(y(t * cfg.n_antennas + r) ==
                        Catch::Approx(yp(r, t).real()).margin(1e-12));
                REQUIRE(y(cfg.pilot_len * cfg.n_antennas + t * cfg.n_antennas + r) ==
                        Catch::Approx(yp(r, t).imag()).margin(1e-12));
            }
    }
    SECTION("zero channel leaves noise of variance sigma_n2/2") {
        auto nrng = make_stream(6, 3);
        const MatrixXcd h0 = MatrixXcd::Zero(3, 2);
        double acc = 0.0;
        long n = 0;
        for (int rep = 0; rep < 10000; ++rep) {
            const VectorXd y = transmit_pilots(h0, p, 0.8, nrng);
            acc += y.squaredNorm();
            n += y.size();
        }
        REQUIRE(acc / n == Catch::Approx(0.4).epsilon(0.02));
    }
}
