#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "temq/signal_model.hpp"

using namespace temq;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const double kOmega0 = 2.0 * std::numbers::pi * 50.0;
const Interval kSupport{-0.45, 0.45};

BandlimitedProcess single_term(double coeff = 1.0, double center = 0.0)
{
    return {SincExpansion(kOmega0, {center}, {coeff}), 1.0, kSupport};
}

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

} // namespace

TEST_CASE("sinc series evaluates at reference instants")
{
    const auto p = single_term();
    CHECK(evaluate(p, 0.0) == 1.0);
    CHECK_THAT(evaluate(p, std::numbers::pi / kOmega0), WithinAbs(0.0, 1e-15));
    CHECK_THAT(evaluate(p, std::numbers::pi / (2.0 * kOmega0)), WithinAbs(2.0 / std::numbers::pi, 1e-15));
}

TEST_CASE("generate_realization uses Nyquist-spaced centers")
{
    const auto p = generate_realization(7, kOmega0, kSupport, AmplitudeLaw::gaussian_coefficients, 1.0);
    CHECK_THAT(p.nyquist_period(), WithinRel(0.01, 1e-14));
    const auto& centers = p.centers();
    for (std::size_t k = 1; k < centers.size(); ++k) CHECK_THAT(centers[k] - centers[k - 1], WithinAbs(0.01, 1e-15));

    std::size_t inside = 0;
    for (double s : centers) inside += kSupport.contains(s) ? 1 : 0;
    CHECK(inside <= 91);
    CHECK(inside == 91);
    // one extra Nyquist period on each side
    CHECK_THAT(centers.front(), WithinAbs(-0.46, 1e-12));
    CHECK_THAT(centers.back(), WithinAbs(0.46, 1e-12));
}

TEST_CASE("generate_realization is deterministic per seed")
{
    const auto a = generate_realization(11, kOmega0, kSupport, AmplitudeLaw::gaussian_coefficients, 1.0);
    const auto b = generate_realization(11, kOmega0, kSupport, AmplitudeLaw::gaussian_coefficients, 1.0);
    const auto c = generate_realization(12, kOmega0, kSupport, AmplitudeLaw::gaussian_coefficients, 1.0);
    CHECK(a.coefficients() == b.coefficients());
    CHECK(a.coefficients() != c.coefficients());
}

TEST_CASE("generated realizations attain the amplitude bound")
{
    for (auto law : {AmplitudeLaw::gaussian_coefficients, AmplitudeLaw::uniform_coefficients}) {
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            const auto p = generate_realization(seed, kOmega0, kSupport, law, 0.8);
            const Waveform w = evaluate_grid(p, kDefaultGridStep);
            double peak = 0.0;
            for (double v : w.values) peak = std::max(peak, std::abs(v));
            CHECK_THAT(peak, WithinRel(0.8, 1e-12));
            // coarser and shifted grids stay inside the bound as well
            const Waveform coarse = p.expansion().sample(kSupport.lo + 3.3e-7, 7e-6, 128000);
            for (double v : coarse.values) CHECK(std::abs(v) <= 0.8 + 1e-9);
        }
    }
}

TEST_CASE("generation rejects degenerate inputs")
{
    CHECK(error_code([] { generate_realization(1, kOmega0, {0.1, 0.1}, AmplitudeLaw::gaussian_coefficients, 1.0); }) ==
          Errc::invalid_argument);
    // no multiple of 0.01 s inside [0.001, 0.009]
    CHECK(error_code([] { generate_realization(1, kOmega0, {0.001, 0.009}, AmplitudeLaw::gaussian_coefficients, 1.0); }) ==
          Errc::invalid_argument);
    const SincExpansion zero(kOmega0, nyquist_centers(kOmega0, kSupport), std::vector<double>(93, 0.0));
    CHECK(error_code([&] { normalize_to_bound(zero, kSupport, 1.0); }) == Errc::invalid_argument);
}

TEST_CASE("evaluate_grid covers the support and matches pointwise evaluation")
{
    const auto p = generate_realization(3, kOmega0, kSupport, AmplitudeLaw::gaussian_coefficients, 1.0);
    const Waveform fine = evaluate_grid(p, 1e-6);
    REQUIRE(fine.size() == 900001);
    CHECK(fine.time(0) == kSupport.lo);
    CHECK_THAT(fine.time(fine.size() - 1), WithinAbs(kSupport.hi, 1e-12));
    for (std::size_t i = 0; i < fine.size(); i += 9973) CHECK_THAT(fine.values[i], WithinAbs(evaluate(p, fine.time(i)), 1e-12));

    const Waveform coarse = evaluate_grid(p, 1e-3);
    REQUIRE(coarse.size() == 901);
    for (std::size_t i = 0; i < coarse.size(); ++i) CHECK_THAT(coarse.values[i], WithinAbs(fine.values[i * 1000], 1e-12));

    CHECK(error_code([&] { evaluate_grid(p, 1.0); }) == Errc::invalid_argument);
    CHECK(error_code([&] { evaluate_grid(p, 0.0); }) == Errc::invalid_argument);
}

TEST_CASE("amplitude histogram pools realizations")
{
    std::vector<BandlimitedProcess> ps;
    for (std::uint64_t s = 0; s < 4; ++s)
        ps.push_back(generate_realization(s, kOmega0, kSupport, AmplitudeLaw::gaussian_coefficients, 1.0));
    const Histogram h = estimate_amplitude_pdf(ps, 1e-5, 32);
    CHECK(h.n_samples() == 4 * 90001);
    CHECK(h.range() == Interval{-1.0, 1.0});
    const auto m = h.masses();
    double total = 0.0;
    for (double x : m) total += x;
    CHECK_THAT(total, WithinAbs(1.0, 1e-12));
    // bell shape: central bins dominate the edge bins
    CHECK(m[15] + m[16] > 10.0 * (m[0] + m[31]));

    CHECK(error_code([] { estimate_amplitude_pdf(std::span<const BandlimitedProcess>{}, 1e-5, 32); }) ==
          Errc::invalid_argument);
    CHECK(error_code([&] { estimate_amplitude_pdf(ps, 1e-5, 1); }) == Errc::invalid_argument);
}

TEST_CASE("zero process puts all amplitude mass in the bin holding 0")
{
    const BandlimitedProcess zero(SincExpansion(kOmega0, {0.0}, {0.0}), 1.0, kSupport);
    const std::vector<BandlimitedProcess> ps{zero};
    const Histogram h = estimate_amplitude_pdf(ps, 1e-4, 9);
    const auto m = h.masses();
    CHECK(m[h.bin_of(0.0)] == 1.0);
    CHECK(h.bin_of(0.0) == 4);
}
