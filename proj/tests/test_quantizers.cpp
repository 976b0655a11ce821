#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "temq/interval_statistics.hpp"
#include "temq/quantizers.hpp"
#include "test_support.hpp"

using namespace temq;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

template <class Fn>
Errc error_code(Fn&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected temq::Error");
    return Errc::io;
}

Density flat(double lo, double hi) { return Density({lo, hi}, {1.0 / (hi - lo), 1.0 / (hi - lo)}); }

} // namespace

TEST_CASE("uniform codebook reference values")
{
    const Codebook cb = design_uniform({0.0, 1.0}, 1);
    CHECK(cb.boundaries == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(cb.levels == std::vector<double>{0.25, 0.75});

    const Codebook t = design_uniform({0.0015 / 2.2, 0.0075}, 2);
    REQUIRE(t.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK_THAT(t.boundaries[i + 1] - t.boundaries[i], WithinRel(1.7045e-3, 1e-4));

    CHECK(error_code([] { design_uniform({0.0, 1.0}, 0); }) == Errc::invalid_argument);
    CHECK(error_code([] { design_uniform({0.0, 1.0}, -2); }) == Errc::invalid_argument);
}

TEST_CASE("quantize follows the cell and clamping rules")
{
    const Codebook cb = design_uniform({0.0, 1.0}, 1);
    CHECK(quantize(cb, 0.3).index == 0);
    CHECK(quantize(cb, 0.3).level == 0.25);
    CHECK(quantize(cb, -4.0).index == 0);
    CHECK(quantize(cb, 9.0).index == 1);
    CHECK(quantize(cb, 9.0).level == 0.75);
    CHECK(quantize(cb, 0.5).index == 1);
    CHECK(quantize(cb, 1.0).index == 1);

    const auto empty = quantize_sequence(cb, std::span<const double>{});
    CHECK(empty.indices.empty());
    CHECK(empty.levels.empty());
    const std::vector<double> xs{0.1, 0.6, 0.5};
    const auto out = quantize_sequence(cb, xs);
    CHECK(out.indices == std::vector<std::size_t>{0, 1, 1});
}

TEST_CASE("closed-form uniform quantizer matches the table")
{
    const Interval s{0.0015 / 2.2, 0.0075};
    for (int bits : {1, 3, 8}) {
        const Codebook cb = design_uniform(s, bits);
        const UniformQuantizer uq(s, bits);
        std::mt19937_64 rng(bits);
        std::uniform_real_distribution<double> u(s.lo - 1e-3, s.hi + 1e-3);
        for (int i = 0; i < 2000; ++i) {
            const double x = u(rng);
            const auto a = cb.quantize(x), b = uq.quantize(x);
            CHECK(a.index == b.index);
            CHECK_THAT(a.level, WithinAbs(b.level, 1e-15));
        }
    }
}

TEST_CASE("compander on a flat density reproduces the uniform codebook")
{
    for (double gamma : {0.1, 0.5, 1.0}) {
        const Codebook a = design_compander({gamma, flat(1.0, 3.0)}, 4);
        const Codebook b = design_uniform({1.0, 3.0}, 4);
        for (std::size_t i = 0; i < b.boundaries.size(); ++i) CHECK_THAT(a.boundaries[i], WithinAbs(b.boundaries[i], 1e-12));
        for (std::size_t i = 0; i < b.levels.size(); ++i) CHECK_THAT(a.levels[i], WithinAbs(b.levels[i], 1e-12));
        CHECK(a.gamma == gamma);
        CHECK(a.designer == Designer::compander);
    }
}

TEST_CASE("vanishing gamma flattens the compander")
{
    const Density p = Density::from_function(1.0, 2.0, [](double t) { return 2.0 / (t * t); });
    const Codebook a = design_compander({1e-3, p}, 3);
    const Codebook u = design_uniform({1.0, 2.0}, 3);
    const double width = 1.0 / 8.0;
    for (std::size_t i = 0; i < u.boundaries.size(); ++i) CHECK(std::abs(a.boundaries[i] - u.boundaries[i]) <= 0.01 * width);
}

TEST_CASE("gamma = 1 compander inverts the closed-form CDF")
{
    const Density p = Density::from_function(1.0, 2.0, [](double t) { return 2.0 / (t * t); });
    const Codebook cb = design_compander({1.0, p}, 1);
    CHECK_THAT(cb.boundaries[1], WithinAbs(4.0 / 3.0, 1e-6));
    // G(T) = 2 (1 - 1/T) => G^{-1}(u) = 1 / (1 - u/2)
    const Compander comp({1.0, p});
    for (double t : {1.1, 1.5, 1.9}) CHECK_THAT(comp.compress(t), WithinAbs(2.0 * (1.0 - 1.0 / t), 1e-6));
    for (double u : {0.1, 0.5, 0.9}) CHECK_THAT(comp.expand(u), WithinAbs(1.0 / (1.0 - u / 2.0), 1e-6));
}

TEST_CASE("compander quantize agrees with its codebook")
{
    const Density p = testing::gaussian_interval_density({1.2, 1.0, 0.0015}, 1.0, 0.3);
    const Compander comp({0.1, p});
    for (int bits : {2, 4, 7}) {
        const Codebook cb = comp.codebook(bits);
        const CompandingQuantizer cq(comp, bits);
        std::mt19937_64 rng(bits);
        std::uniform_real_distribution<double> u(p.support().lo, p.support().hi);
        for (int i = 0; i < 2000; ++i) {
            const double x = u(rng);
            const auto a = cb.quantize(x), b = cq.quantize(x);
            // the two may only disagree for x within rounding of a boundary
            if (a.index != b.index) {
                CHECK(std::abs(x - cb.boundaries[std::max(a.index, b.index)]) < 1e-12);
            } else {
                CHECK(a.level == b.level);
            }
        }
        // round trip through the companding map
        for (double x : cb.levels) CHECK_THAT(comp.expand(comp.compress(x)), WithinAbs(x, 1e-12));
    }
}

TEST_CASE("compander rejects degenerate densities")
{
    const Density zero({0.0, 1.0}, {0.0, 0.0});
    CHECK(error_code([&] { design_compander({0.1, zero}, 3); }) == Errc::degenerate_density);
    CHECK(error_code([&] { design_compander({0.0, flat(0.0, 1.0)}, 3); }) == Errc::invalid_argument);
    CHECK(error_code([&] { design_compander({1.5, flat(0.0, 1.0)}, 3); }) == Errc::invalid_argument);
}

TEST_CASE("Lloyd-Max on a uniform density is the uniform quantizer")
{
    const auto r1 = design_lloyd_max(flat(0.0, 1.0), 1);
    CHECK_THAT(r1.codebook.boundaries[1], WithinAbs(0.5, 1e-12));
    CHECK_THAT(r1.codebook.levels[0], WithinAbs(0.25, 1e-12));
    CHECK_THAT(r1.codebook.levels[1], WithinAbs(0.75, 1e-12));

    const auto r2 = design_lloyd_max(flat(0.0, 1.0), 2);
    const std::vector<double> want{0.125, 0.375, 0.625, 0.875};
    for (std::size_t i = 0; i < 4; ++i) CHECK_THAT(r2.codebook.levels[i], WithinAbs(want[i], 1e-12));
    CHECK_THAT(r2.distortion, WithinRel(1.0 / (12.0 * 16.0), 1e-9));

    // brute force: no 4-level codebook on a fine grid beats the uniform one
    const auto d = [](const std::vector<double>& lv) {
        const Density u = flat(0.0, 1.0);
        double acc = 0.0;
        for (std::size_t i = 0; i < lv.size(); ++i) {
            const double lo = i == 0 ? 0.0 : 0.5 * (lv[i - 1] + lv[i]);
            const double hi = i + 1 == lv.size() ? 1.0 : 0.5 * (lv[i] + lv[i + 1]);
            const Moments m = u.moments(lo, hi);
            acc += m.second - 2.0 * lv[i] * m.first + lv[i] * lv[i] * m.mass;
        }
        return acc;
    };
    double best = 1e9;
    for (int a = 1; a < 40; ++a)
        for (int b = a + 1; b < 40; ++b)
            for (int c = b + 1; c < 40; ++c)
                for (int e = c + 1; e < 40; ++e) best = std::min(best, d({a / 40.0, b / 40.0, c / 40.0, e / 40.0}));
    CHECK(r2.distortion <= best + 1e-15);
}

TEST_CASE("Lloyd-Max sample mode")
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 0.3);
    std::vector<double> xs(20000);
    for (double& x : xs) x = std::clamp(g(rng), -1.0, 1.0);
    const auto r = design_lloyd_max(xs, {-1.0, 1.0}, 3);
    for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i] <= r.history[i - 1] * (1.0 + 1e-12));
    CHECK(r.distortion < design_lloyd_max(xs, {-1.0, 1.0}, 2).distortion);
    // symmetric input gives a nearly symmetric codebook
    CHECK_THAT(r.codebook.levels.front(), WithinAbs(-r.codebook.levels.back(), 0.02));

    const std::vector<double> few{0.1, 0.2, 0.2, 0.3};
    CHECK(error_code([&] { design_lloyd_max(few, {0.0, 1.0}, 2); }) == Errc::invalid_argument);
    CHECK_NOTHROW(design_lloyd_max(few, {0.0, 1.0}, 1));
}

TEST_CASE("codebook JSON round trip")
{
    const Density p = testing::gaussian_interval_density({1.2, 1.0, 0.0015}, 1.0, 0.3);
    const Codebook cb = design_compander({0.1, p}, 5);
    const Codebook back = codebook_from_json(nlohmann::json::parse(to_json(cb).dump()));
    CHECK(back.boundaries == cb.boundaries);
    CHECK(back.levels == cb.levels);
    CHECK(back.bits == 5);
    CHECK(back.gamma == cb.gamma);
    CHECK(back.designer == Designer::compander);

    nlohmann::json bad = to_json(cb);
    bad["levels"].erase(0);
    CHECK(error_code([&] { codebook_from_json(bad); }) == Errc::invalid_argument);
    CHECK(error_code([&] { codebook_from_json(nlohmann::json::object()); }) == Errc::invalid_argument);
}

TEST_CASE("quantizer property suite")
{
    const auto report = testing::quantizer_property_suite();
    for (const auto& f : report.failures) UNSCOPED_INFO(f);
    CHECK(report.checks > 100);
    CHECK(report.ok());
}

TEST_CASE("Lloyd-Max honours caller-supplied starting levels")
{
    const std::vector<double> xs{0.0, 0.1, 0.2, 0.8, 0.9, 1.0};
    LloydMaxOptions opts;
    opts.initial_levels = {0.1, 0.9};
    const auto r = design_lloyd_max(xs, {0.0, 1.0}, 1, opts);
    CHECK_THAT(r.codebook.levels[0], WithinAbs(0.1, 1e-15));
    CHECK_THAT(r.codebook.levels[1], WithinAbs(0.9, 1e-15));

    opts.initial_levels = {0.9, 0.1};
    CHECK(error_code([&] { design_lloyd_max(xs, {0.0, 1.0}, 1, opts); }) == Errc::invalid_argument);
    opts.initial_levels = {0.5};
    CHECK(error_code([&] { design_lloyd_max(flat(0.0, 1.0), 1, opts); }) == Errc::invalid_argument);
}
