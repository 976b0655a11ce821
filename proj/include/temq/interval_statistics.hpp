#pragma once

// Distribution of firing intervals induced by an amplitude law, and its empirical check.

#include <cmath>
#include <span>
#include <vector>

#include "temq/density.hpp"
#include "temq/error.hpp"
#include "temq/histogram.hpp"
#include "temq/tem_encoder.hpp"

namespace temq {

inline constexpr std::size_t kDensityGridIntervals = 4096;
inline constexpr std::size_t kDefaultIntervalBins = 64;

/// Support of the interval law for amplitude bound c.
inline Interval interval_support(const TemParams& params, double amplitude_bound)
{
    const auto [lo, hi] = interval_bounds(params, amplitude_bound);
    return {lo, hi};
}

/// Density of T = kappa*delta / (f + b) when f ~ amplitude_pdf:
///   P_T(T) = P_F(kappa*delta/T - b) * kappa*delta / T^2
/// on [kappa*delta/(b+c), kappa*delta/(b-c)], zero elsewhere. Jumps of P_F become grid
/// breakpoints.
inline Density induced_interval_pdf(const Density& amplitude_pdf, const TemParams& params, double amplitude_bound,
                                    std::size_t intervals = kDensityGridIntervals)
{
    const Interval support = interval_support(params, amplitude_bound);
    const Interval amp = amplitude_pdf.support();
    const double slack = 1e-12 * amplitude_bound;
    const bool leaks_low = amp.lo < -amplitude_bound - slack && amplitude_pdf.mass(amp.lo, -amplitude_bound) > 0.0;
    const bool leaks_high = amp.hi > amplitude_bound + slack && amplitude_pdf.mass(amplitude_bound, amp.hi) > 0.0;
    require(!leaks_low && !leaks_high, Errc::invalid_argument, "amplitude density has mass outside [-c, c]");

    const double q = params.charge();
    const double b = params.bias;
    std::vector<double> breakpoints;
    for (double f : amplitude_pdf.discontinuities()) breakpoints.push_back(q / (f + b));

    const auto fn = [&](double t) {
        const double f = q / t - b;
        return amplitude_pdf(f) * q / (t * t);
    };
    return Density::from_function(support.lo, support.hi, fn, intervals, std::move(breakpoints));
}

/// Pooled interval histogram over `support`.
inline Histogram empirical_interval_histogram(std::span<const FiringSequence> sequences, Interval support,
                                              std::size_t n_bins = kDefaultIntervalBins)
{
    Histogram hist(support, n_bins);
    for (const auto& s : sequences) hist.add(s.intervals);
    require(hist.n_samples() > 0, Errc::invalid_argument, "no intervals to pool");
    return hist;
}

/// Total-variation distance between the histogram's bin masses and the density's mass on
/// the same bins. Density mass falling outside the histogram range counts in full.
inline double distribution_divergence(const Histogram& hist, const Density& density)
{
    const Interval hr = hist.range();
    const Interval dr = density.support();
    require(std::min(hr.hi, dr.hi) > std::max(hr.lo, dr.lo), Errc::invalid_argument,
            "histogram and density supports are disjoint");
    const auto masses = hist.masses();
    const auto& edges = hist.edges();
    double tv = 0.0;
    double inside = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
        const double m = density.mass(edges[i], edges[i + 1]);
        inside += m;
        tv += std::abs(masses[i] - m);
    }
    tv += std::max(0.0, density.mass(dr.lo, dr.hi) - inside);
    return std::min(1.0, 0.5 * tv);
}

} // namespace temq
