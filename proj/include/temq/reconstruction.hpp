#pragma once

// Recovery of bandlimited signals from TEM integrals or non-uniform samples.

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "temq/error.hpp"
#include "temq/signal_model.hpp"
#include "temq/tem_encoder.hpp"

namespace temq {

/// Firing instants t_1..t_{N+1} and the signal integrals q_n = kappa*delta - b*T_n over
/// each [t_n, t_{n+1}].
struct TemMeasurements {
    std::vector<double> instants;
    std::vector<double> integrals;
};

struct ReconstructionConfig {
    double omega0 = 2.0 * std::numbers::pi * 50.0;
    /// Ridge weight relative to the largest diagonal entry of A^T A.
    double regularization = 1e-8;
    double output_grid_step = 1e-4;
    double edge_trim_fraction = 0.1;
};

inline void validate(const ReconstructionConfig& cfg)
{
    require(cfg.omega0 > 0.0, Errc::invalid_argument, "omega0 must be positive");
    require(cfg.regularization >= 0.0, Errc::invalid_argument, "regularization must be non-negative");
    require(cfg.output_grid_step > 0.0, Errc::invalid_argument, "output grid step must be positive");
    require(cfg.edge_trim_fraction >= 0.0 && cfg.edge_trim_fraction < 0.5, Errc::invalid_argument,
            "edge trim fraction must lie in [0, 0.5)");
}

inline TemMeasurements measurements_from_sequence(const FiringSequence& sequence, const TemParams& params)
{
    for (double t : sequence.intervals) require(t > 0.0, Errc::invalid_argument, "intervals must be positive");
    TemMeasurements m;
    m.instants = sequence.instants();
    m.integrals.resize(sequence.intervals.size());
    for (std::size_t n = 0; n < sequence.intervals.size(); ++n)
        m.integrals[n] = params.charge() - params.bias * sequence.intervals[n];
    return m;
}

/// Solves min |A c - y|^2 + lambda |c|^2 with lambda = rel * max diag(A^T A).
inline Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, double rel)
{
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(a.cols(), a.cols());
    gram.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
    const double lambda = rel * gram.diagonal().maxCoeff();
    gram.diagonal().array() += lambda;
    const Eigen::VectorXd rhs = a.transpose() * y;
    Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(gram);
    require(llt.info() == Eigen::Success, Errc::numerical_failure, "normal equations are singular");
    Eigen::VectorXd c = llt.solve(rhs);
    require(c.allFinite(), Errc::numerical_failure, "least-squares solution is not finite");
    return c;
}

namespace detail {

// 8-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<double, 8> kGaussNodes{-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                                   -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                                   0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGaussWeights{0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                                     0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                                     0.2223810344533745, 0.1012285362903763};

inline void check_gaps(std::span<const double> times, double omega0, const char* what)
{
    const double nyquist = std::numbers::pi / omega0;
    for (std::size_t n = 0; n + 1 < times.size(); ++n) {
        const double gap = times[n + 1] - times[n];
        require(gap > 0.0, Errc::invalid_argument, std::string(what) + " must be strictly increasing");
        if (gap >= nyquist) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s gap %.6g s at index %zu is not below the Nyquist period %.6g s", what,
                          gap, n, nyquist);
            throw Error(Errc::nyquist_violation, buf);
        }
    }
}

} // namespace detail

/// Coefficients of sum_k c_k sinc(omega0 (t - s_k)), s_k the interval midpoints, matching
/// the measured integrals in the regularized least-squares sense.
inline SincExpansion fit_tem(const TemMeasurements& meas, const ReconstructionConfig& cfg)
{
    validate(cfg);
    require(meas.instants.size() == meas.integrals.size() + 1, Errc::invalid_argument,
            "need one more instant than integrals");
    require(meas.integrals.size() >= 2, Errc::invalid_argument, "need at least two intervals");
    detail::check_gaps(meas.instants, cfg.omega0, "firing instants");

    const std::size_t n = meas.integrals.size();
    const double w = cfg.omega0;
    std::vector<double> anchors(n), anchor_cos(n), anchor_sin(n);
    for (std::size_t k = 0; k < n; ++k) {
        anchors[k] = 0.5 * (meas.instants[k] + meas.instants[k + 1]);
        anchor_cos[k] = std::cos(w * anchors[k]);
        anchor_sin[k] = std::sin(w * anchors[k]);
    }

    // M[r, k] = integral of sinc(w (t - s_k)) over [t_r, t_{r+1}], Gauss-Legendre per interval.
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        const double half = 0.5 * (meas.instants[r + 1] - meas.instants[r]);
        const double mid = 0.5 * (meas.instants[r + 1] + meas.instants[r]);
        for (std::size_t g = 0; g < detail::kGaussNodes.size(); ++g) {
            const double t = mid + half * detail::kGaussNodes[g];
            const double weight = half * detail::kGaussWeights[g];
            const double st = std::sin(w * t), ct = std::cos(w * t);
            for (std::size_t k = 0; k < n; ++k) {
                const double x = w * (t - anchors[k]);
                const double v = std::abs(x) < 1.0 ? sinc(x) : (st * anchor_cos[k] - ct * anchor_sin[k]) / x;
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) += weight * v;
            }
        }
    }
    const Eigen::Map<const Eigen::VectorXd> q(meas.integrals.data(), static_cast<Eigen::Index>(n));
    const Eigen::VectorXd c = ridge_solve(m, q, cfg.regularization);
    return SincExpansion(w, std::move(anchors), std::vector<double>(c.data(), c.data() + c.size()));
}

inline Waveform reconstruct_tem(const TemMeasurements& meas, const ReconstructionConfig& cfg, Interval support)
{
    return fit_tem(meas, cfg).sample(support, cfg.output_grid_step);
}

/// Sinc interpolation anchored at the sample times: Phi c = a, Phi[n, k] = sinc(omega0 (t_n - t_k)).
inline SincExpansion fit_nus(std::span<const double> times, std::span<const double> amplitudes,
                             const ReconstructionConfig& cfg)
{
    validate(cfg);
    require(!times.empty() && times.size() == amplitudes.size(), Errc::invalid_argument,
            "need matching, non-empty times and amplitudes");
    detail::check_gaps(times, cfg.omega0, "sample times");
    const auto n = static_cast<Eigen::Index>(times.size());
    Eigen::MatrixXd phi(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index k = 0; k <= r; ++k)
            phi(r, k) = phi(k, r) = sinc(cfg.omega0 * (times[static_cast<std::size_t>(r)] - times[static_cast<std::size_t>(k)]));
    const Eigen::Map<const Eigen::VectorXd> a(amplitudes.data(), n);
    const Eigen::VectorXd c = ridge_solve(phi, a, cfg.regularization);
    return SincExpansion(cfg.omega0, std::vector<double>(times.begin(), times.end()),
                         std::vector<double>(c.data(), c.data() + c.size()));
}

inline Waveform reconstruct_nus(std::span<const double> times, std::span<const double> amplitudes,
                                const ReconstructionConfig& cfg, Interval support)
{
    return fit_nus(times, amplitudes, cfg).sample(support, cfg.output_grid_step);
}

inline constexpr double kNmseFloorDb = -300.0;

/// 10 log10(sum (f - g)^2 / sum f^2) over the grid with `edge_trim_fraction` of the samples
/// dropped at each end.
inline double nmse_db(const Waveform& reference, const Waveform& estimate, double edge_trim_fraction)
{
    require(reference.size() == estimate.size(), Errc::invalid_argument, "waveforms are on different grids");
    require(edge_trim_fraction >= 0.0 && edge_trim_fraction < 0.5, Errc::invalid_argument,
            "edge trim fraction must lie in [0, 0.5)");
    const std::size_t n = reference.size();
    const auto trim = static_cast<std::size_t>(std::floor(edge_trim_fraction * static_cast<double>(n)));
    double err = 0.0, energy = 0.0;
    for (std::size_t i = trim; i + trim < n; ++i) {
        const double d = reference.values[i] - estimate.values[i];
        err += d * d;
        energy += reference.values[i] * reference.values[i];
    }
    require(energy > 0.0, Errc::undefined_nmse, "reference is zero on the evaluation region");
    if (err == 0.0) return kNmseFloorDb;
    return std::max(kNmseFloorDb, 10.0 * std::log10(err / energy));
}

inline void write_waveform_csv(std::ostream& os, const Waveform& w)
{
    os << "time_s,amplitude\n";
    char buf[64];
    for (std::size_t i = 0; i < w.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.6g,%.6g\n", w.time(i), w.values[i]);
        os << buf;
    }
}

} // namespace temq
