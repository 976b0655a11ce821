#pragma once

// Bounded bandlimited realizations built as finite sinc expansions.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "temq/error.hpp"
#include "temq/histogram.hpp"

namespace temq {

inline double sinc(double x)
{
    if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

/// Uniformly spaced samples: value i sits at start + i * step.
struct Waveform {
    double start = 0.0;
    double step = 0.0;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double time(std::size_t i) const { return start + step * static_cast<double>(i); }
};

/// Number of grid points of spacing `step` covering [lo, hi] from the left edge.
inline std::size_t grid_point_count(Interval support, double step)
{
    require(step > 0.0, Errc::invalid_argument, "grid step must be positive");
    require(support.length() > 0.0, Errc::invalid_argument, "support has zero length");
    require(step <= support.length(), Errc::invalid_argument, "grid step exceeds support length");
    return static_cast<std::size_t>(std::floor(support.length() / step + 1e-9)) + 1;
}

/// f(t) = sum_k a_k sinc(omega0 (t - s_k)).
class SincExpansion {
public:
    SincExpansion() = default;

    SincExpansion(double omega0, std::vector<double> centers, std::vector<double> coefficients)
        : omega0_(omega0), centers_(std::move(centers)), coefficients_(std::move(coefficients))
    {
        require(omega0_ > 0.0, Errc::invalid_argument, "band edge must be positive");
        require(centers_.size() == coefficients_.size(), Errc::invalid_argument,
                "centers and coefficients differ in length");
        phase_cos_.resize(centers_.size());
        phase_sin_.resize(centers_.size());
        for (std::size_t k = 0; k < centers_.size(); ++k) {
            phase_cos_[k] = std::cos(omega0_ * centers_[k]);
            phase_sin_[k] = std::sin(omega0_ * centers_[k]);
        }
    }

    double omega0() const { return omega0_; }
    const std::vector<double>& centers() const { return centers_; }
    const std::vector<double>& coefficients() const { return coefficients_; }
    std::size_t size() const { return centers_.size(); }

    double operator()(double t) const
    {
        double acc = 0.0;
        for (std::size_t k = 0; k < centers_.size(); ++k) acc += coefficients_[k] * sinc(omega0_ * (t - centers_[k]));
        return acc;
    }

    /// Grid evaluation with sin(w(t - s)) expanded by the angle-difference identity; terms
    /// close to their center use the direct formula.
    Waveform sample(double start, double step, std::size_t count) const
    {
        Waveform w{start, step, std::vector<double>(count, 0.0)};
        for (std::size_t i = 0; i < count; ++i) {
            const double t = w.time(i);
            const double st = std::sin(omega0_ * t);
            const double ct = std::cos(omega0_ * t);
            double acc = 0.0;
            for (std::size_t k = 0; k < centers_.size(); ++k) {
                const double x = omega0_ * (t - centers_[k]);
                if (std::abs(x) < 1.0)
                    acc += coefficients_[k] * sinc(x);
                else
                    acc += coefficients_[k] * (st * phase_cos_[k] - ct * phase_sin_[k]) / x;
            }
            w.values[i] = acc;
        }
        return w;
    }

    Waveform sample(Interval support, double step) const
    {
        return sample(support.lo, step, grid_point_count(support, step));
    }

    SincExpansion scaled(double factor) const
    {
        auto coeffs = coefficients_;
        for (double& a : coeffs) a *= factor;
        return SincExpansion(omega0_, centers_, std::move(coeffs));
    }

private:
    double omega0_ = 1.0;
    std::vector<double> centers_;
    std::vector<double> coefficients_;
    std::vector<double> phase_cos_;
    std::vector<double> phase_sin_;
};

enum class AmplitudeLaw { gaussian_coefficients, uniform_coefficients };

/// A realization of the input process: sinc expansion on Nyquist-spaced centers,
/// bounded by `bound` on `support`.
class BandlimitedProcess {
public:
    BandlimitedProcess(SincExpansion expansion, double bound, Interval support)
        : expansion_(std::move(expansion)), bound_(bound), support_(support)
    {
        require(expansion_.size() > 0, Errc::invalid_argument, "process needs at least one sinc term");
        require(bound_ > 0.0, Errc::invalid_argument, "amplitude bound must be positive");
        require(support_.length() > 0.0, Errc::invalid_argument, "support has zero length");
    }

    const SincExpansion& expansion() const { return expansion_; }
    double omega0() const { return expansion_.omega0(); }
    double nyquist_period() const { return std::numbers::pi / expansion_.omega0(); }
    double bound() const { return bound_; }
    Interval support() const { return support_; }
    const std::vector<double>& coefficients() const { return expansion_.coefficients(); }
    const std::vector<double>& centers() const { return expansion_.centers(); }

    /// Same process delayed by `tau`: f(t - tau) on the shifted support.
    BandlimitedProcess shifted(double tau) const
    {
        auto centers = expansion_.centers();
        for (double& s : centers) s += tau;
        return {SincExpansion(omega0(), std::move(centers), expansion_.coefficients()), bound_,
                {support_.lo + tau, support_.hi + tau}};
    }

private:
    SincExpansion expansion_;
    double bound_;
    Interval support_;
};

inline constexpr double kDefaultGridStep = 1e-6;

inline double evaluate(const BandlimitedProcess& process, double t) { return process.expansion()(t); }

inline Waveform evaluate_grid(const BandlimitedProcess& process, double grid_step)
{
    return process.expansion().sample(process.support(), grid_step);
}

/// Rescales the expansion so its peak |f| on the grid equals `target_bound`.
inline BandlimitedProcess normalize_to_bound(const SincExpansion& raw, Interval support, double target_bound,
                                             double grid_step = kDefaultGridStep)
{
    require(target_bound > 0.0, Errc::invalid_argument, "target bound must be positive");
    const Waveform w = raw.sample(support, grid_step);
    double peak = 0.0;
    for (double v : w.values) peak = std::max(peak, std::abs(v));
    require(peak > 0.0 && std::isfinite(peak), Errc::invalid_argument, "cannot normalize the zero signal");
    return {raw.scaled(target_bound / peak), target_bound, support};
}

/// Centers k * pi/omega0 for every integer k within one Nyquist period of the support.
inline std::vector<double> nyquist_centers(double omega0, Interval support)
{
    require(omega0 > 0.0, Errc::invalid_argument, "band edge must be positive");
    require(support.length() > 0.0, Errc::invalid_argument, "support has zero length");
    const double h = std::numbers::pi / omega0;
    const auto inside_lo = static_cast<long long>(std::ceil(support.lo / h - 1e-9));
    const auto inside_hi = static_cast<long long>(std::floor(support.hi / h + 1e-9));
    require(inside_hi >= inside_lo, Errc::invalid_argument, "no sinc center fits inside the support");
    std::vector<double> centers;
    for (long long k = inside_lo - 1; k <= inside_hi + 1; ++k) centers.push_back(static_cast<double>(k) * h);
    return centers;
}

inline BandlimitedProcess generate_realization(std::uint64_t seed, double omega0, Interval support,
                                               AmplitudeLaw law, double target_bound,
                                               double grid_step = kDefaultGridStep)
{
    auto centers = nyquist_centers(omega0, support);
    std::mt19937_64 rng(seed);
    std::vector<double> coeffs(centers.size());
    if (law == AmplitudeLaw::gaussian_coefficients) {
        std::normal_distribution<double> dist(0.0, 1.0);
        for (double& a : coeffs) a = dist(rng);
    } else {
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (double& a : coeffs) a = dist(rng);
    }
    return normalize_to_bound(SincExpansion(omega0, std::move(centers), std::move(coeffs)), support,
                              target_bound, grid_step);
}

/// Adds every grid amplitude of `process` to `hist`.
inline void accumulate_amplitudes(Histogram& hist, const Waveform& w)
{
    for (double v : w.values) hist.add(v);
}

/// Pooled amplitude histogram over [-c, c], c being the largest bound among the realizations.
inline Histogram estimate_amplitude_pdf(std::span<const BandlimitedProcess> realizations, double grid_step,
                                        std::size_t n_bins)
{
    require(!realizations.empty(), Errc::invalid_argument, "no realizations to pool");
    require(n_bins >= 2, Errc::invalid_argument, "need at least two bins");
    double c = 0.0;
    for (const auto& p : realizations) c = std::max(c, p.bound());
    Histogram hist({-c, c}, n_bins);
    for (const auto& p : realizations) accumulate_amplitudes(hist, evaluate_grid(p, grid_step));
    return hist;
}

} // namespace temq
