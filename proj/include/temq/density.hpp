#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "temq/error.hpp"
#include "temq/histogram.hpp"

namespace temq {

/// Zeroth, first and second moments of a density over some interval.
struct Moments {
    double mass = 0.0;
    double first = 0.0;
    double second = 0.0;
};

/// Probability density on a closed interval, stored as a piecewise-linear table.
///
/// Nodes are non-decreasing; two nodes sharing an abscissa encode a jump, and the density
/// is right-continuous there. Outside [nodes.front(), nodes.back()] the density is zero.
/// `certificate()` is the quadrature estimate of the total mass recorded at construction.
class Density {
public:
    Density() = default;

    /// Tabulated density; the certificate is the trapezoidal integral of the table.
    Density(std::vector<double> nodes, std::vector<double> values)
        : x_(std::move(nodes)), p_(std::move(values))
    {
        check_table();
        certificate_ = mass(x_.front(), x_.back());
    }

    /// Samples `fn` on a grid of about `intervals` cells over [lo, hi]. The grid is split at
    /// `breakpoints` (interior jump locations of fn); one-sided limits are stored on each side.
    /// The certificate is composite Simpson on every panel.
    static Density from_function(double lo, double hi, const std::function<double(double)>& fn,
                                 std::size_t intervals = 4096, std::vector<double> breakpoints = {})
    {
        require(hi > lo, Errc::invalid_argument, "density support is degenerate");
        std::vector<double> cuts{lo};
        std::sort(breakpoints.begin(), breakpoints.end());
        for (double b : breakpoints)
            if (b > lo && b < hi && b > cuts.back()) cuts.push_back(b);
        cuts.push_back(hi);

        Density d;
        double certificate = 0.0;
        const double total = hi - lo;
        for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
            const double a = cuts[p], b = cuts[p + 1];
            const double len = b - a;
            auto n = static_cast<std::size_t>(std::round(static_cast<double>(intervals) * len / total / 2.0)) * 2;
            n = std::max<std::size_t>(n, 2);
            const double h = len / static_cast<double>(n);
            const double nudge = 1e-9 * len;
            double simpson = 0.0;
            for (std::size_t i = 0; i <= n; ++i) {
                const double x = (i == n) ? b : a + h * static_cast<double>(i);
                double probe = x;
                if (i == 0) probe = a + nudge;
                if (i == n) probe = b - nudge;
                const double v = fn(probe);
                require(std::isfinite(v) && v >= 0.0, Errc::invalid_argument, "density must be finite and non-negative");
                d.x_.push_back(x);
                d.p_.push_back(v);
                simpson += v * ((i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0));
            }
            certificate += simpson * h / 3.0;
        }
        d.check_table();
        d.certificate_ = certificate;
        return d;
    }

    /// Piecewise-constant density equal to the histogram's per-bin density.
    static Density from_histogram(const Histogram& hist)
    {
        const auto dens = hist.densities();
        const auto& edges = hist.edges();
        std::vector<double> x, p;
        for (std::size_t i = 0; i < dens.size(); ++i) {
            x.push_back(edges[i]);
            p.push_back(dens[i]);
            x.push_back(edges[i + 1]);
            p.push_back(dens[i]);
        }
        return Density(std::move(x), std::move(p));
    }

    Interval support() const { return {x_.front(), x_.back()}; }
    const std::vector<double>& nodes() const { return x_; }
    const std::vector<double>& values() const { return p_; }
    double certificate() const { return certificate_; }

    double max_value() const { return *std::max_element(p_.begin(), p_.end()); }

    /// Abscissae where the table jumps.
    std::vector<double> discontinuities() const
    {
        std::vector<double> out;
        for (std::size_t i = 0; i + 1 < x_.size(); ++i)
            if (x_[i] == x_[i + 1] && p_[i] != p_[i + 1]) out.push_back(x_[i]);
        if (p_.front() != 0.0) out.insert(out.begin(), x_.front());
        if (p_.back() != 0.0) out.push_back(x_.back());
        return out;
    }

    double operator()(double x) const
    {
        if (x < x_.front() || x > x_.back()) return 0.0;
        const auto it = std::upper_bound(x_.begin(), x_.end(), x);
        if (it == x_.end()) return p_.back();
        const auto j = static_cast<std::size_t>(it - x_.begin()) - 1;
        const double h = x_[j + 1] - x_[j];
        const double s = (x - x_[j]) / h;
        return p_[j] + s * (p_[j + 1] - p_[j]);
    }

    /// Exact moments of the piecewise-linear table over [a, b] (Simpson is exact for the
    /// cubic integrands involved).
    Moments moments(double a, double b) const
    {
        Moments m;
        a = std::max(a, x_.front());
        b = std::min(b, x_.back());
        if (!(b > a)) return m;
        auto j = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), a) - x_.begin());
        j = (j == 0) ? 0 : j - 1;
        for (; j + 1 < x_.size() && x_[j] < b; ++j) {
            const double h = x_[j + 1] - x_[j];
            if (h <= 0.0) continue;
            const double lo = std::max(a, x_[j]);
            const double hi = std::min(b, x_[j + 1]);
            if (!(hi > lo)) continue;
            const auto at = [&](double x) { return p_[j] + (x - x_[j]) / h * (p_[j + 1] - p_[j]); };
            const double mid = 0.5 * (lo + hi);
            const double pl = at(lo), pm = at(mid), ph = at(hi);
            const double w = (hi - lo) / 6.0;
            m.mass += w * (pl + 4.0 * pm + ph);
            m.first += w * (lo * pl + 4.0 * mid * pm + hi * ph);
            m.second += w * (lo * lo * pl + 4.0 * mid * mid * pm + hi * hi * ph);
        }
        return m;
    }

    double mass(double a, double b) const { return moments(a, b).mass; }

private:
    void check_table() const
    {
        require(x_.size() >= 2 && x_.size() == p_.size(), Errc::invalid_argument, "density table needs at least two nodes");
        require(x_.back() > x_.front(), Errc::invalid_argument, "density support is degenerate");
        for (std::size_t i = 0; i < x_.size(); ++i) {
            require(std::isfinite(p_[i]) && p_[i] >= 0.0, Errc::invalid_argument, "density must be finite and non-negative");
            if (i > 0) require(x_[i] >= x_[i - 1], Errc::invalid_argument, "density nodes must be non-decreasing");
        }
    }

    std::vector<double> x_;
    std::vector<double> p_;
    double certificate_ = 0.0;
};

} // namespace temq
