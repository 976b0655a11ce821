#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "temq/error.hpp"

namespace temq {

/// Closed time (or amplitude) interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Fixed-edge histogram. Bins are half-open [e_i, e_{i+1}); the last bin is closed
/// and values outside the edges are clamped into the end bins.
class Histogram {
public:
    Histogram() = default;

    Histogram(Interval range, std::size_t n_bins)
    {
        require(n_bins >= 1, Errc::invalid_argument, "histogram needs at least one bin");
        require(range.hi > range.lo, Errc::invalid_argument, "histogram range is degenerate");
        edges_.resize(n_bins + 1);
        const double width = range.length() / static_cast<double>(n_bins);
        for (std::size_t i = 0; i <= n_bins; ++i) edges_[i] = range.lo + width * static_cast<double>(i);
        edges_.back() = range.hi;
        counts_.assign(n_bins, 0.0);
    }

    std::size_t bin_count() const { return counts_.size(); }
    const std::vector<double>& edges() const { return edges_; }
    const std::vector<double>& counts() const { return counts_; }
    std::size_t n_samples() const { return n_samples_; }
    Interval range() const { return {edges_.front(), edges_.back()}; }

    std::size_t bin_of(double x) const
    {
        const double lo = edges_.front();
        const double width = (edges_.back() - lo) / static_cast<double>(counts_.size());
        const double pos = std::floor((x - lo) / width);
        if (!(pos > 0.0)) return 0;
        const auto idx = static_cast<std::size_t>(pos);
        return std::min(idx, counts_.size() - 1);
    }

    void add(double x)
    {
        counts_[bin_of(x)] += 1.0;
        ++n_samples_;
    }

    void add(const std::vector<double>& xs)
    {
        for (double x : xs) add(x);
    }

    /// Adds `x` with a non-negative weight in place of a unit count.
    void add_weighted(double x, double weight)
    {
        require(weight >= 0.0 && std::isfinite(weight), Errc::invalid_argument, "histogram weight must be non-negative");
        counts_[bin_of(x)] += weight;
        ++n_samples_;
    }

    /// Pool another histogram with identical edges.
    void merge(const Histogram& other)
    {
        require(other.edges_ == edges_, Errc::invalid_argument, "cannot merge histograms with different edges");
        for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
        n_samples_ += other.n_samples_;
    }

    /// Per-bin probability mass (sums to one).
    std::vector<double> masses() const
    {
        require(n_samples_ > 0, Errc::invalid_argument, "histogram is empty");
        std::vector<double> m(counts_.size());
        const double total = std::accumulate(counts_.begin(), counts_.end(), 0.0);
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = counts_[i] / total;
        return m;
    }

    /// Mass divided by bin width.
    std::vector<double> densities() const
    {
        auto m = masses();
        for (std::size_t i = 0; i < m.size(); ++i) m[i] /= edges_[i + 1] - edges_[i];
        return m;
    }

private:
    std::vector<double> edges_;
    std::vector<double> counts_;
    std::size_t n_samples_ = 0;
};

} // namespace temq
