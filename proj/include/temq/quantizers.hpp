#pragma once

// Scalar quantizer design: uniform, power-law (escort) compander and Lloyd-Max.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "temq/density.hpp"
#include "temq/error.hpp"
#include "temq/histogram.hpp"

namespace temq {

/// Largest resolution for which codebook tables are materialized.
inline constexpr int kMaxTableBits = 24;

enum class Designer { uniform, compander, lloyd_max };

inline const char* to_string(Designer d)
{
    switch (d) {
    case Designer::uniform: return "uniform";
    case Designer::compander: return "compander";
    case Designer::lloyd_max: return "lloyd-max";
    }
    return "unknown";
}

inline Designer designer_from_string(const std::string& s)
{
    if (s == "uniform") return Designer::uniform;
    if (s == "compander") return Designer::compander;
    if (s == "lloyd-max") return Designer::lloyd_max;
    throw Error(Errc::invalid_argument, "unknown quantizer designer '" + s + "'");
}

struct QuantizedValue {
    std::size_t index = 0;
    double level = 0.0;
};

/// B = 2^bits cells: boundaries b_0 < ... < b_B, levels y_i with b_i < y_i < b_{i+1}.
/// Cells are half-open [b_i, b_{i+1}) except the last, which is closed; inputs outside
/// [b_0, b_B] are clamped to the end cells.
struct Codebook {
    std::vector<double> boundaries;
    std::vector<double> levels;
    int bits = 0;
    Designer designer = Designer::uniform;
    std::optional<double> gamma;

    std::size_t size() const { return levels.size(); }
    Interval support() const { return {boundaries.front(), boundaries.back()}; }

    QuantizedValue quantize(double x) const
    {
        const auto first = boundaries.begin() + 1;
        const auto last = boundaries.end() - 1;
        const auto idx = static_cast<std::size_t>(std::upper_bound(first, last, x) - first);
        return {idx, levels[idx]};
    }
};

inline void validate(const Codebook& cb)
{
    require(cb.bits >= 1, Errc::invalid_argument, "codebook needs at least one bit");
    const std::size_t cells = std::size_t{1} << cb.bits;
    require(cb.levels.size() == cells && cb.boundaries.size() == cells + 1, Errc::invalid_argument,
            "codebook size does not match its bit count");
    for (std::size_t i = 0; i < cells; ++i)
        require(cb.boundaries[i] < cb.levels[i] && cb.levels[i] < cb.boundaries[i + 1], Errc::invalid_argument,
                "codebook boundaries and levels do not interleave");
}

inline QuantizedValue quantize(const Codebook& cb, double x) { return cb.quantize(x); }

struct QuantizedSequence {
    std::vector<std::size_t> indices;
    std::vector<double> levels;
};

template <class Quantizer>
QuantizedSequence quantize_sequence(const Quantizer& q, std::span<const double> values)
{
    QuantizedSequence out;
    out.indices.reserve(values.size());
    out.levels.reserve(values.size());
    for (double v : values) {
        const QuantizedValue r = q.quantize(v);
        out.indices.push_back(r.index);
        out.levels.push_back(r.level);
    }
    return out;
}

inline void check_bits(int bits, int max_bits)
{
    require(bits >= 1, Errc::invalid_argument, "bits must be at least 1");
    require(bits <= max_bits, Errc::invalid_argument, "bits exceeds " + std::to_string(max_bits));
}

/// Closed-form uniform quantizer; usable at any resolution.
class UniformQuantizer {
public:
    UniformQuantizer(Interval support, int bits) : support_(support), bits_(bits)
    {
        require(support.length() > 0.0, Errc::invalid_argument, "quantizer support is degenerate");
        check_bits(bits, 52);
        cells_ = std::ldexp(1.0, bits);
        width_ = support.length() / cells_;
    }

    QuantizedValue quantize(double x) const
    {
        const double pos = std::floor((x - support_.lo) / width_);
        const double idx = std::clamp(pos, 0.0, cells_ - 1.0);
        return {static_cast<std::size_t>(idx), support_.lo + (idx + 0.5) * width_};
    }

    double cell_width() const { return width_; }

private:
    Interval support_;
    int bits_;
    double cells_ = 0.0;
    double width_ = 0.0;
};

inline Codebook design_uniform(Interval support, int bits)
{
    require(support.length() > 0.0, Errc::invalid_argument, "quantizer support is degenerate");
    check_bits(bits, kMaxTableBits);
    const std::size_t cells = std::size_t{1} << bits;
    const double width = support.length() / static_cast<double>(cells);
    Codebook cb;
    cb.bits = bits;
    cb.designer = Designer::uniform;
    cb.boundaries.resize(cells + 1);
    cb.levels.resize(cells);
    for (std::size_t i = 0; i <= cells; ++i) cb.boundaries[i] = support.lo + width * static_cast<double>(i);
    cb.boundaries.back() = support.hi;
    for (std::size_t i = 0; i < cells; ++i) cb.levels[i] = support.lo + width * (static_cast<double>(i) + 0.5);
    return cb;
}

inline constexpr double kDefaultGamma = 0.1;
inline constexpr double kEscortFloor = 1e-12;

struct CompanderSpec {
    double gamma = kDefaultGamma;
    Density base_density;
};

/// Monotone map G(x) = int_lo^x p^gamma / int p^gamma (the escort CDF) and its inverse.
/// Zero-density stretches are floored at kEscortFloor * max p before powering.
class Compander {
public:
    explicit Compander(const CompanderSpec& spec) : gamma_(spec.gamma)
    {
        require(spec.gamma > 0.0 && spec.gamma <= 1.0, Errc::invalid_argument, "gamma must lie in (0, 1]");
        const auto& x = spec.base_density.nodes();
        const auto& p = spec.base_density.values();
        require(!x.empty(), Errc::degenerate_density, "base density is empty");
        const double peak = spec.base_density.max_value();
        require(std::isfinite(peak) && peak > 0.0, Errc::degenerate_density, "base density is identically zero");
        const double floor = kEscortFloor * peak;
        x_ = x;
        w_.resize(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) w_[i] = std::pow(std::max(p[i], floor), gamma_);
        cum_.assign(x_.size(), 0.0);
        for (std::size_t i = 0; i + 1 < x_.size(); ++i)
            cum_[i + 1] = cum_[i] + 0.5 * (x_[i + 1] - x_[i]) * (w_[i] + w_[i + 1]);
        total_ = cum_.back();
        require(std::isfinite(total_) && total_ > 0.0, Errc::degenerate_density, "escort density has no mass");
    }

    double gamma() const { return gamma_; }
    Interval support() const { return {x_.front(), x_.back()}; }

    /// G(x) in [0, 1], clamped outside the support.
    double compress(double x) const
    {
        if (x <= x_.front()) return 0.0;
        if (x >= x_.back()) return 1.0;
        const auto j = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin()) - 1;
        const double h = x_[j + 1] - x_[j];
        const double s = x - x_[j];
        const double slope = (w_[j + 1] - w_[j]) / h;
        return (cum_[j] + s * w_[j] + 0.5 * slope * s * s) / total_;
    }

    /// G^{-1}(u), solving the quadratic inside the bracketing table segment.
    double expand(double u) const
    {
        if (u <= 0.0) return x_.front();
        if (u >= 1.0) return x_.back();
        const double target = u * total_;
        auto j = static_cast<std::size_t>(std::upper_bound(cum_.begin(), cum_.end(), target) - cum_.begin());
        j = std::min(j, cum_.size() - 1) - 1;
        while (j + 1 < x_.size() && x_[j + 1] == x_[j]) ++j;
        const double h = x_[j + 1] - x_[j];
        const double r = target - cum_[j];
        const double slope = (w_[j + 1] - w_[j]) / h;
        const double disc = std::max(0.0, w_[j] * w_[j] + 2.0 * slope * r);
        const double denom = w_[j] + std::sqrt(disc);
        const double s = denom > 0.0 ? 2.0 * r / denom : 0.0;
        return std::clamp(x_[j] + s, x_[j], x_[j + 1]);
    }

    /// Uniform quantization of G(x) with 2^bits cells, mapped back through G^{-1}.
    QuantizedValue quantize(double x, int bits) const
    {
        const double cells = std::ldexp(1.0, bits);
        const double idx = std::clamp(std::floor(compress(x) * cells), 0.0, cells - 1.0);
        return {static_cast<std::size_t>(idx), expand((idx + 0.5) / cells)};
    }

    Codebook codebook(int bits) const
    {
        check_bits(bits, kMaxTableBits);
        const std::size_t cells = std::size_t{1} << bits;
        const double n = static_cast<double>(cells);
        Codebook cb;
        cb.bits = bits;
        cb.designer = Designer::compander;
        cb.gamma = gamma_;
        cb.boundaries.resize(cells + 1);
        cb.levels.resize(cells);
        for (std::size_t i = 0; i <= cells; ++i) cb.boundaries[i] = expand(static_cast<double>(i) / n);
        cb.boundaries.front() = x_.front();
        cb.boundaries.back() = x_.back();
        for (std::size_t i = 0; i < cells; ++i) cb.levels[i] = expand((static_cast<double>(i) + 0.5) / n);
        return cb;
    }

private:
    double gamma_;
    std::vector<double> x_;
    std::vector<double> w_;
    std::vector<double> cum_;
    double total_ = 0.0;
};

/// Compander bound to one resolution.
class CompandingQuantizer {
public:
    CompandingQuantizer(Compander compander, int bits) : compander_(std::move(compander)), bits_(bits)
    {
        check_bits(bits, 52);
    }
    QuantizedValue quantize(double x) const { return compander_.quantize(x, bits_); }
    const Compander& compander() const { return compander_; }

private:
    Compander compander_;
    int bits_;
};

inline Codebook design_compander(const CompanderSpec& spec, int bits) { return Compander(spec).codebook(bits); }

struct LloydMaxOptions {
    double tolerance = 1e-10;
    int max_iterations = 500;
    /// Starting levels (2^bits, strictly increasing, inside the support); empty selects the
    /// designer's default start.
    std::vector<double> initial_levels;
};

struct LloydMaxResult {
    Codebook codebook;
    double distortion = 0.0;
    /// Mean-squared distortion after each iteration.
    std::vector<double> history;
    int iterations = 0;
};

namespace detail {

inline void midpoints(const std::vector<double>& levels, Interval support, std::vector<double>& boundaries)
{
    boundaries.resize(levels.size() + 1);
    boundaries.front() = support.lo;
    boundaries.back() = support.hi;
    for (std::size_t i = 1; i < levels.size(); ++i) boundaries[i] = 0.5 * (levels[i - 1] + levels[i]);
}

inline std::vector<double> checked_start(const std::vector<double>& levels, Interval support, std::size_t cells)
{
    require(levels.size() == cells, Errc::invalid_argument, "initial levels do not match the bit count");
    for (std::size_t i = 0; i < cells; ++i) {
        require(levels[i] > support.lo && levels[i] < support.hi, Errc::invalid_argument,
                "initial levels must lie inside the support");
        if (i > 0) require(levels[i] > levels[i - 1], Errc::invalid_argument, "initial levels must increase");
    }
    return levels;
}

/// Shared Lloyd iteration from `initial` levels; `cell` returns (mass, first, second)
/// moments of [a, b).
template <class CellMoments>
LloydMaxResult lloyd_iterate(Interval support, int bits, std::vector<double> initial, const LloydMaxOptions& opts,
                             CellMoments cell)
{
    Codebook cb;
    cb.bits = bits;
    cb.designer = Designer::lloyd_max;
    cb.levels = std::move(initial);
    midpoints(cb.levels, support, cb.boundaries);
    const std::size_t cells = cb.size();
    LloydMaxResult result;

    const auto distortion = [&](const std::vector<double>& bounds, const std::vector<double>& levels) {
        double total_mass = 0.0, d = 0.0;
        for (std::size_t i = 0; i < cells; ++i) {
            const Moments m = cell(bounds[i], bounds[i + 1], i + 1 == cells);
            total_mass += m.mass;
            d += m.second - 2.0 * levels[i] * m.first + levels[i] * levels[i] * m.mass;
        }
        return std::max(0.0, d / total_mass);
    };

    double previous = distortion(cb.boundaries, cb.levels);
    for (int it = 0; it < opts.max_iterations; ++it) {
        midpoints(cb.levels, support, cb.boundaries);
        for (std::size_t i = 0; i < cells; ++i) {
            const Moments m = cell(cb.boundaries[i], cb.boundaries[i + 1], i + 1 == cells);
            if (m.mass > 0.0) cb.levels[i] = m.first / m.mass;
        }
        const double current = distortion(cb.boundaries, cb.levels);
        result.history.push_back(current);
        result.iterations = it + 1;
        const bool done = previous <= 0.0 || std::abs(previous - current) <= opts.tolerance * previous;
        previous = current;
        if (done) break;
    }
    midpoints(cb.levels, support, cb.boundaries);
    result.distortion = distortion(cb.boundaries, cb.levels);
    result.codebook = std::move(cb);
    validate(result.codebook);
    return result;
}

} // namespace detail

/// Lloyd-Max on an empirical sample set over `support`. Starts from the means of equal-count
/// groups of the distinct sample values.
inline LloydMaxResult design_lloyd_max(std::span<const double> samples, Interval support, int bits,
                                       const LloydMaxOptions& opts = {})
{
    check_bits(bits, 20);
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const auto distinct = static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
    const std::size_t cells = std::size_t{1} << bits;
    require(distinct >= cells, Errc::invalid_argument, "fewer distinct samples than levels");
    std::vector<double> initial(cells);
    for (std::size_t i = 0; i < cells && opts.initial_levels.empty(); ++i) {
        const std::size_t lo = i * distinct / cells, hi = (i + 1) * distinct / cells;
        double acc = 0.0;
        for (std::size_t k = lo; k < hi; ++k) acc += std::clamp(sorted[k], support.lo, support.hi);
        initial[i] = acc / static_cast<double>(hi - lo);
    }
    sorted.assign(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    for (double& s : sorted) s = std::clamp(s, support.lo, support.hi);

    std::vector<double> s1(sorted.size() + 1, 0.0), s2(sorted.size() + 1, 0.0);
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        s1[i + 1] = s1[i] + sorted[i];
        s2[i + 1] = s2[i] + sorted[i] * sorted[i];
    }
    const auto cell = [&](double a, double b, bool last) {
        const auto lo = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), a) - sorted.begin());
        const auto hi = static_cast<std::size_t>(
            (last ? std::upper_bound(sorted.begin(), sorted.end(), b) : std::lower_bound(sorted.begin(), sorted.end(), b)) -
            sorted.begin());
        if (a <= support.lo) return Moments{static_cast<double>(hi), s1[hi], s2[hi]};
        return Moments{static_cast<double>(hi - lo), s1[hi] - s1[lo], s2[hi] - s2[lo]};
    };
    if (!opts.initial_levels.empty()) initial = detail::checked_start(opts.initial_levels, support, cells);
    return detail::lloyd_iterate(support, bits, std::move(initial), opts, cell);
}

/// Lloyd-Max against a tabulated density over its support, starting from the levels at
/// the density's (i + 1/2)/B quantiles.
inline LloydMaxResult design_lloyd_max(const Density& density, int bits, const LloydMaxOptions& opts = {})
{
    check_bits(bits, 20);
    require(density.max_value() > 0.0, Errc::invalid_argument, "density is identically zero");
    const std::size_t cells = std::size_t{1} << bits;
    const std::vector<double> start = opts.initial_levels.empty()
                                          ? Compander({1.0, density}).codebook(bits).levels
                                          : detail::checked_start(opts.initial_levels, density.support(), cells);
    const auto cell = [&](double a, double b, bool) { return density.moments(a, b); };
    return detail::lloyd_iterate(density.support(), bits, start, opts, cell);
}

inline nlohmann::json to_json(const Codebook& cb)
{
    nlohmann::json j;
    j["designer"] = to_string(cb.designer);
    j["bits"] = cb.bits;
    if (cb.gamma) j["gamma"] = *cb.gamma;
    j["boundaries"] = cb.boundaries;
    j["levels"] = cb.levels;
    return j;
}

inline Codebook codebook_from_json(const nlohmann::json& j)
{
    Codebook cb;
    try {
        cb.designer = designer_from_string(j.at("designer").get<std::string>());
        cb.bits = j.at("bits").get<int>();
        if (j.contains("gamma")) cb.gamma = j.at("gamma").get<double>();
        cb.boundaries = j.at("boundaries").get<std::vector<double>>();
        cb.levels = j.at("levels").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::invalid_argument, std::string("malformed codebook record: ") + e.what());
    }
    validate(cb);
    return cb;
}

} // namespace temq
