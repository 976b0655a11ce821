#pragma once

// Experiment configuration: flat `key = value` text, one field per line, `#` comments.

#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "temq/error.hpp"
#include "temq/histogram.hpp"
#include "temq/signal_model.hpp"
#include "temq/tem_encoder.hpp"

namespace temq {

enum class TimeQuantizer { uniform, compander };
enum class AmplitudeQuantizer { uniform, lloyd_max };
enum class CodebookSource { theoretical_density, empirical_pool };

struct ExperimentConfig {
    double omega0 = 2.0 * std::numbers::pi * 50.0;
    Interval support{-0.45, 0.45};
    double c = 1.0;
    double b = 1.2;
    double kappa = 1.0;
    double delta = 0.0015;
    double gamma = 0.1;
    std::vector<int> bits{3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    int n_realizations = 100;
    std::uint64_t seed = 1;
    double grid_step = 1e-6;
    int n_bins = 64;
    double edge_trim = 0.1;
    TimeQuantizer tem_nuq_times = TimeQuantizer::compander;
    TimeQuantizer nus_nuq_times = TimeQuantizer::compander;
    AmplitudeQuantizer nus_nuq_amplitudes = AmplitudeQuantizer::lloyd_max;
    CodebookSource codebook_source = CodebookSource::empirical_pool;
    AmplitudeLaw amplitude_law = AmplitudeLaw::gaussian_coefficients;
    double output_grid_step = 1e-4;
    double regularization = 1e-8;
    bool interval_feedback = true;

    TemParams tem_params() const { return {b, kappa, delta}; }
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& msg) { throw Error(Errc::config, msg); }

inline std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline double parse_double(const std::string& key, const std::string& v)
{
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        config_fail("key '" + key + "': '" + v + "' is not a number");
    }
    if (trim(v.substr(used)).size() != 0) config_fail("key '" + key + "': '" + v + "' is not a number");
    return out;
}

inline long long parse_int(const std::string& key, const std::string& v)
{
    const double d = parse_double(key, v);
    if (d != static_cast<double>(static_cast<long long>(d))) config_fail("key '" + key + "': '" + v + "' is not an integer");
    return static_cast<long long>(d);
}

inline std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

} // namespace detail

/// Parses "3,4,5" or "3..12".
inline std::vector<int> parse_bits_list(const std::string& text)
{
    std::vector<int> bits;
    const auto range = text.find("..");
    if (range != std::string::npos) {
        const auto lo = detail::parse_int("bits", text.substr(0, range));
        const auto hi = detail::parse_int("bits", text.substr(range + 2));
        if (hi < lo) detail::config_fail("bits range is empty");
        for (auto b = lo; b <= hi; ++b) bits.push_back(static_cast<int>(b));
    } else {
        for (const auto& item : detail::split(text, ',')) bits.push_back(static_cast<int>(detail::parse_int("bits", item)));
    }
    if (bits.empty()) detail::config_fail("bits list is empty");
    return bits;
}

inline void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value)
{
    using namespace detail;
    const auto choice = [&](std::initializer_list<const char*> allowed) {
        for (const char* a : allowed)
            if (value == a) return;
        std::string msg = "key '" + key + "': '" + value + "' is not one of";
        for (const char* a : allowed) msg += std::string(" ") + a;
        config_fail(msg);
    };
    if (key == "omega0") cfg.omega0 = parse_double(key, value);
    else if (key == "support") {
        const auto parts = split(value, ',');
        if (parts.size() != 2) config_fail("key 'support' needs two comma-separated values");
        cfg.support = {parse_double(key, parts[0]), parse_double(key, parts[1])};
    }
    else if (key == "c") cfg.c = parse_double(key, value);
    else if (key == "b") cfg.b = parse_double(key, value);
    else if (key == "kappa") cfg.kappa = parse_double(key, value);
    else if (key == "delta") cfg.delta = parse_double(key, value);
    else if (key == "gamma") cfg.gamma = parse_double(key, value);
    else if (key == "bits") cfg.bits = parse_bits_list(value);
    else if (key == "n_realizations") cfg.n_realizations = static_cast<int>(parse_int(key, value));
    else if (key == "seed") {
        const auto s = parse_int(key, value);
        if (s < 0) config_fail("seed must be non-negative");
        cfg.seed = static_cast<std::uint64_t>(s);
    }
    else if (key == "grid_step") cfg.grid_step = parse_double(key, value);
    else if (key == "n_bins") cfg.n_bins = static_cast<int>(parse_int(key, value));
    else if (key == "edge_trim") cfg.edge_trim = parse_double(key, value);
    else if (key == "tem_nuq_times" || key == "nus_nuq_times") {
        choice({"uniform", "compander"});
        auto& field = key == "tem_nuq_times" ? cfg.tem_nuq_times : cfg.nus_nuq_times;
        field = value == "uniform" ? TimeQuantizer::uniform : TimeQuantizer::compander;
    }
    else if (key == "nus_nuq_amplitudes") {
        choice({"uniform", "lloyd-max"});
        cfg.nus_nuq_amplitudes = value == "uniform" ? AmplitudeQuantizer::uniform : AmplitudeQuantizer::lloyd_max;
    }
    else if (key == "codebook_source") {
        choice({"theoretical-density", "empirical-pool"});
        cfg.codebook_source =
            value == "empirical-pool" ? CodebookSource::empirical_pool : CodebookSource::theoretical_density;
    }
    else if (key == "amplitude_law") {
        choice({"gaussian-coefficients", "uniform-coefficients"});
        cfg.amplitude_law = value == "gaussian-coefficients" ? AmplitudeLaw::gaussian_coefficients
                                                             : AmplitudeLaw::uniform_coefficients;
    }
    else if (key == "output_grid_step") cfg.output_grid_step = parse_double(key, value);
    else if (key == "regularization") cfg.regularization = parse_double(key, value);
    else if (key == "interval_feedback") {
        choice({"true", "false"});
        cfg.interval_feedback = value == "true";
    }
    else config_fail("unknown key '" + key + "'");
}

/// Rejects parameter sets that break the encoder or the recovery condition.
inline void validate(const ExperimentConfig& cfg)
{
    using detail::config_fail;
    if (!(cfg.omega0 > 0.0)) config_fail("omega0 must be positive");
    if (!(cfg.support.hi > cfg.support.lo)) config_fail("support must be a non-degenerate interval");
    if (!(cfg.c > 0.0)) config_fail("c must be positive");
    if (!(cfg.b > cfg.c)) config_fail("b must exceed c");
    if (!(cfg.kappa > 0.0) || !(cfg.delta > 0.0)) config_fail("kappa and delta must be positive");
    const double t_max = cfg.kappa * cfg.delta / (cfg.b - cfg.c);
    if (!(t_max < std::numbers::pi / cfg.omega0))
        config_fail("kappa*delta/(b-c) must be below the Nyquist period pi/omega0");
    if (!(cfg.gamma > 0.0 && cfg.gamma <= 1.0)) config_fail("gamma must lie in (0, 1]");
    if (cfg.bits.empty()) config_fail("bits list is empty");
    for (int b : cfg.bits)
        if (b < 1 || b > 30) config_fail("bits must lie in [1, 30]");
    if (cfg.n_realizations < 1) config_fail("n_realizations must be at least 1");
    if (!(cfg.grid_step > 0.0 && cfg.grid_step <= 1e-5)) config_fail("grid_step must lie in (0, 1e-5]");
    if (cfg.n_bins < 2) config_fail("n_bins must be at least 2");
    if (!(cfg.edge_trim >= 0.0 && cfg.edge_trim < 0.5)) config_fail("edge_trim must lie in [0, 0.5)");
    if (!(cfg.output_grid_step > 0.0)) config_fail("output_grid_step must be positive");
    if (!(cfg.regularization >= 0.0)) config_fail("regularization must be non-negative");
}

inline ExperimentConfig parse_config(std::istream& in)
{
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) detail::config_fail("line " + std::to_string(lineno) + ": expected key = value");
        set_config_value(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
    validate(cfg);
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(Errc::io, "cannot open config file '" + path + "'");
    return parse_config(in);
}

} // namespace temq
