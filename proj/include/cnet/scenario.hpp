// SPDX-License-Identifier: Apache-2.0
//
// Scenario configuration: flat key-value text format, canonical
// serialization and a stable content hash.

#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cnet/channel.hpp"
#include "cnet/model.hpp"

namespace cnet {

enum class NetworkMode { None, Random, Greedy, SeqSinr, Full };
enum class CsiMode { Perfect, Estimated, OutdatedLambda };
enum class DetectorMode { Lmmse, Robust };
enum class Metric { Ber, Mse, SumRate, Power };

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Scenario {
    SystemConfig cfg;                  // sigma_n2 is derived per SNR point
    FadingMode channel_mode = FadingMode::Rayleigh;
    LargeScaleProfile profile;
    NetworkMode network_mode = NetworkMode::None;
    int alpha_p = 0;                   // Random/Greedy/SeqSinr sizes
    CsiMode csi_mode = CsiMode::Perfect;
    double lambda = 1.0;               // OutdatedLambda mixing factor
    DetectorMode detector_mode = DetectorMode::Lmmse;
    Metric metric = Metric::Ber;
    std::vector<double> snr_grid_db;
    int n_channels = 300;
    int n_noise = 50;
    std::uint64_t master_seed = 1;

    int network_alpha() const {
        switch (network_mode) {
            case NetworkMode::None: return 0;
            case NetworkMode::Full: return fully_connected_size(cfg.n_antennas);
            default: return alpha_p;
        }
    }

    void validate() const {
        cfg.validate();
        if (snr_grid_db.empty()) throw ScenarioError("scenario: snr_db grid is empty");
        if (n_channels < 1 || n_noise < 1)
            throw ScenarioError("scenario: trial counts must be >= 1");
        if (network_alpha() > fully_connected_size(cfg.n_antennas))
            throw ScenarioError("scenario: alpha_p exceeds the fully connected size");
        if ((network_mode == NetworkMode::Random || network_mode == NetworkMode::Greedy ||
             network_mode == NetworkMode::SeqSinr) && alpha_p < 1)
            throw ScenarioError("scenario: selected network mode needs alpha_p >= 1");
        if (csi_mode == CsiMode::Estimated &&
            (network_mode == NetworkMode::Greedy || network_mode == NetworkMode::SeqSinr))
            throw ScenarioError(
                "scenario: channel-dependent network design requires perfect CSI");
        if (csi_mode == CsiMode::OutdatedLambda && (lambda < 0.0 || lambda > 1.0))
            throw ScenarioError("scenario: lambda must be in [0, 1]");
        if (channel_mode == FadingMode::LogDistance) profile.validate();
    }
};

namespace detail {

inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline const char* to_string(FadingMode m) {
    return m == FadingMode::Rayleigh ? "rayleigh" : "logdistance";
}
inline const char* to_string(NetworkMode m) {
    switch (m) {
        case NetworkMode::None: return "none";
        case NetworkMode::Random: return "random";
        case NetworkMode::Greedy: return "greedy";
        case NetworkMode::SeqSinr: return "seqsinr";
        default: return "full";
    }
}
inline const char* to_string(CsiMode m) {
    switch (m) {
        case CsiMode::Perfect: return "perfect";
        case CsiMode::Estimated: return "estimated";
        default: return "outdated";
    }
}
inline const char* to_string(DetectorMode m) {
    return m == DetectorMode::Lmmse ? "lmmse" : "robust";
}
inline const char* to_string(Metric m) {
    switch (m) {
        case Metric::Ber: return "ber";
        case Metric::Mse: return "mse";
        case Metric::SumRate: return "sumrate";
        default: return "power";
    }
}

}  // namespace detail

/// Canonical text form: fixed key order, one key per line.
inline std::string serialize_scenario(const Scenario& s) {
    std::ostringstream out;
    out << "n_users = " << s.cfg.n_users << '\n'
        << "n_antennas = " << s.cfg.n_antennas << '\n'
        << "sigma_x2 = " << detail::format_double(s.cfg.sigma_x2) << '\n'
        << "pilot_len = " << s.cfg.pilot_len << '\n'
        << "channel = " << detail::to_string(s.channel_mode) << '\n';
    if (s.channel_mode == FadingMode::LogDistance)
        out << "path_loss_exponent = " << detail::format_double(s.profile.path_loss_exponent)
            << '\n'
            << "reference_distance = " << detail::format_double(s.profile.reference_distance)
            << '\n'
            << "cell_radius = " << detail::format_double(s.profile.cell_radius) << '\n';
    out << "network = " << detail::to_string(s.network_mode) << '\n';
    if (s.network_mode == NetworkMode::Random || s.network_mode == NetworkMode::Greedy ||
        s.network_mode == NetworkMode::SeqSinr)
        out << "alpha_p = " << s.alpha_p << '\n';
    out << "csi = " << detail::to_string(s.csi_mode) << '\n';
    if (s.csi_mode == CsiMode::OutdatedLambda)
        out << "lambda = " << detail::format_double(s.lambda) << '\n';
    out << "detector = " << detail::to_string(s.detector_mode) << '\n'
        << "metric = " << detail::to_string(s.metric) << '\n';
    out << "snr_db = ";
    for (std::size_t i = 0; i < s.snr_grid_db.size(); ++i) {
        if (i) out << ',';
        out << detail::format_double(s.snr_grid_db[i]);
    }
    out << '\n'
        << "n_channels = " << s.n_channels << '\n'
        << "n_noise = " << s.n_noise << '\n'
        << "seed = " << s.master_seed << '\n';
    return out.str();
}

/// 64-bit FNV-1a of the canonical serialization.
inline std::uint64_t scenario_hash(const Scenario& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : serialize_scenario(s)) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct KvFile {
    std::map<std::string, std::pair<std::string, int>> entries;  // key -> (value, line)
    std::vector<std::string> used;

    const std::string* find(const std::string& key) {
        auto it = entries.find(key);
        if (it == entries.end()) return nullptr;
        used.push_back(key);
        return &it->second.first;
    }
};

inline KvFile parse_kv(const std::string& text) {
    KvFile kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ScenarioError("scenario parse error at line " + std::to_string(lineno) +
                                ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ScenarioError("scenario parse error at line " + std::to_string(lineno) +
                                ": empty key or value");
        if (!kv.entries.emplace(key, std::make_pair(value, lineno)).second)
            throw ScenarioError("scenario parse error at line " + std::to_string(lineno) +
                                ": duplicate key '" + key + "'");
    }
    return kv;
}

inline double parse_number(const std::string& v, const std::string& key) {
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw ScenarioError("scenario: invalid number for key '" + key + "': " + v);
    return out;
}

inline long parse_integer(const std::string& v, const std::string& key) {
    long out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw ScenarioError("scenario: invalid integer for key '" + key + "': " + v);
    return out;
}

inline std::string require(KvFile& kv, const std::string& key) {
    const std::string* v = kv.find(key);
    if (v == nullptr) throw ScenarioError("scenario: missing required key '" + key + "'");
    return *v;
}

}  // namespace detail

inline Scenario parse_scenario(const std::string& text) {
    using namespace detail;
    KvFile kv = parse_kv(text);
    Scenario s;
    s.cfg.n_users = static_cast<int>(parse_integer(require(kv, "n_users"), "n_users"));
    s.cfg.n_antennas = static_cast<int>(parse_integer(require(kv, "n_antennas"), "n_antennas"));
    if (const auto* v = kv.find("sigma_x2")) s.cfg.sigma_x2 = parse_number(*v, "sigma_x2");
    s.cfg.pilot_len = s.cfg.n_users;
    if (const auto* v = kv.find("pilot_len"))
        s.cfg.pilot_len = static_cast<int>(parse_integer(*v, "pilot_len"));
    s.cfg.sigma_n2 = 1.0;  // replaced per SNR point by the sweep

    if (const auto* v = kv.find("channel")) {
        if (*v == "rayleigh")
            s.channel_mode = FadingMode::Rayleigh;
        else if (*v == "logdistance")
            s.channel_mode = FadingMode::LogDistance;
        else
            throw ScenarioError("scenario: unknown channel mode '" + *v + "'");
    }
    s.profile.mode = s.channel_mode;
    if (const auto* v = kv.find("path_loss_exponent"))
        s.profile.path_loss_exponent = parse_number(*v, "path_loss_exponent");
    if (const auto* v = kv.find("reference_distance"))
        s.profile.reference_distance = parse_number(*v, "reference_distance");
    if (const auto* v = kv.find("cell_radius"))
        s.profile.cell_radius = parse_number(*v, "cell_radius");

    const std::string net = require(kv, "network");
    if (net == "none")
        s.network_mode = NetworkMode::None;
    else if (net == "random")
        s.network_mode = NetworkMode::Random;
    else if (net == "greedy")
        s.network_mode = NetworkMode::Greedy;
    else if (net == "seqsinr")
        s.network_mode = NetworkMode::SeqSinr;
    else if (net == "full")
        s.network_mode = NetworkMode::Full;
    else
        throw ScenarioError("scenario: unknown network mode '" + net + "'");
    if (const auto* v = kv.find("alpha_p"))
        s.alpha_p = static_cast<int>(parse_integer(*v, "alpha_p"));

    const std::string csi = require(kv, "csi");
    if (csi == "perfect")
        s.csi_mode = CsiMode::Perfect;
    else if (csi == "estimated")
        s.csi_mode = CsiMode::Estimated;
    else if (csi == "outdated")
        s.csi_mode = CsiMode::OutdatedLambda;
    else
        throw ScenarioError("scenario: unknown csi mode '" + csi + "'");
    if (const auto* v = kv.find("lambda")) s.lambda = parse_number(*v, "lambda");

    const std::string det = require(kv, "detector");
    if (det == "lmmse")
        s.detector_mode = DetectorMode::Lmmse;
    else if (det == "robust")
        s.detector_mode = DetectorMode::Robust;
    else
        throw ScenarioError("scenario: unknown detector mode '" + det + "'");

    const std::string metric = require(kv, "metric");
    if (metric == "ber")
        s.metric = Metric::Ber;
    else if (metric == "mse")
        s.metric = Metric::Mse;
    else if (metric == "sumrate")
        s.metric = Metric::SumRate;
    else if (metric == "power")
        s.metric = Metric::Power;
    else
        throw ScenarioError("scenario: unknown metric '" + metric + "'");

    const std::string grid = require(kv, "snr_db");
    std::istringstream gin(grid);
    std::string tok;
    while (std::getline(gin, tok, ','))
        s.snr_grid_db.push_back(parse_number(trim(tok), "snr_db"));

    s.n_channels = static_cast<int>(parse_integer(require(kv, "n_channels"), "n_channels"));
    s.n_noise = static_cast<int>(parse_integer(require(kv, "n_noise"), "n_noise"));
    s.master_seed = static_cast<std::uint64_t>(parse_integer(require(kv, "seed"), "seed"));

    s.validate();
    return s;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("scenario: cannot open file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

}  // namespace cnet
