#pragma once

// Integrate-and-fire time encoding.

#include <algorithm>
#include <numbers>
#include <utility>
#include <vector>

#include "temq/error.hpp"
#include "temq/signal_model.hpp"

namespace temq {

struct TemParams {
    double bias = 1.2;
    double kappa = 1.0;
    double threshold = 0.0015;

    /// Integrator target per firing, kappa * delta.
    double charge() const { return kappa * threshold; }
};

inline void validate(const TemParams& params, double amplitude_bound)
{
    require(params.kappa > 0.0, Errc::invalid_params, "kappa must be positive");
    require(params.threshold > 0.0, Errc::invalid_params, "threshold must be positive");
    require(params.bias > amplitude_bound, Errc::invalid_params, "bias must exceed the amplitude bound");
}

struct FiringSequence {
    double first_instant = 0.0;
    std::vector<double> intervals;

    /// t_1, t_1 + T_1, ... (intervals.size() + 1 entries).
    std::vector<double> instants() const
    {
        std::vector<double> t(intervals.size() + 1);
        t[0] = first_instant;
        for (std::size_t n = 0; n < intervals.size(); ++n) t[n + 1] = t[n] + intervals[n];
        return t;
    }

    double max_interval() const
    {
        return intervals.empty() ? 0.0 : *std::max_element(intervals.begin(), intervals.end());
    }
};

/// Interval range (kappa*delta/(b+c), kappa*delta/(b-c)).
inline std::pair<double, double> interval_bounds(const TemParams& params, double amplitude_bound)
{
    validate(params, amplitude_bound);
    return {params.charge() / (params.bias + amplitude_bound), params.charge() / (params.bias - amplitude_bound)};
}

/// True iff every interval is strictly shorter than pi/omega0.
inline bool validate_nyquist(const FiringSequence& sequence, double omega0)
{
    return sequence.max_interval() < std::numbers::pi / omega0;
}

/// Runs the integrator over pre-sampled signal values. The trapezoidal cumulative integral
/// of (f + b)/kappa starts from zero at the first sample; each threshold crossing is placed
/// by linear interpolation inside its grid cell and the overshoot carries into the next
/// period. Charge left after the last firing is dropped.
inline FiringSequence encode(const Waveform& signal, const TemParams& params)
{
    require(signal.size() >= 2, Errc::invalid_argument, "signal needs at least two samples");
    const double target = params.threshold;
    const double scale = 0.5 * signal.step / params.kappa;

    std::vector<double> instants;
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < signal.size(); ++i) {
        const double area = scale * (signal.values[i] + signal.values[i + 1] + 2.0 * params.bias);
        double consumed = 0.0; // fraction of the cell already accounted for
        while (integral + area * (1.0 - consumed) >= target) {
            const double fraction = consumed + (target - integral) / area;
            instants.push_back(signal.time(i) + fraction * signal.step);
            integral = 0.0;
            consumed = fraction;
        }
        integral += area * (1.0 - consumed);
    }

    require(!instants.empty(), Errc::empty_sequence, "support too short for a single firing");
    FiringSequence seq;
    seq.first_instant = instants.front();
    seq.intervals.resize(instants.size() - 1);
    for (std::size_t n = 0; n + 1 < instants.size(); ++n) seq.intervals[n] = instants[n + 1] - instants[n];
    return seq;
}

inline FiringSequence encode(const BandlimitedProcess& process, const TemParams& params,
                             double grid_step = kDefaultGridStep)
{
    validate(params, process.bound());
    require(grid_step > 0.0 && grid_step <= 1e-5, Errc::invalid_argument,
            "grid step must be in (0, 1e-5] s for event localization");
    return encode(evaluate_grid(process, grid_step), params);
}

} // namespace temq
