#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "temq/reconstruction.hpp"

using namespace temq;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const double kOmega0 = 2.0 * std::numbers::pi * 50.0;
const Interval kSupport{-0.45, 0.45};
const TemParams kParams{1.2, 1.0, 0.0015};

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

Waveform scaled(const Waveform& w, double s)
{
    Waveform out = w;
    for (double& v : out.values) v *= s;
    return out;
}

double tem_round_trip(std::uint64_t seed, double grid_step)
{
    const auto p = generate_realization(seed, kOmega0, kSupport, AmplitudeLaw::gaussian_coefficients, 1.0);
    const ReconstructionConfig cfg;
    const auto meas = measurements_from_sequence(encode(p, kParams, grid_step), kParams);
    return nmse_db(evaluate_grid(p, cfg.output_grid_step), reconstruct_tem(meas, cfg, kSupport), cfg.edge_trim_fraction);
}

} // namespace

TEST_CASE("measurement integrals")
{
    const FiringSequence flat{0.0, std::vector<double>(5, 0.0015 / 1.2)};
    for (double q : measurements_from_sequence(flat, kParams).integrals) CHECK_THAT(q, WithinAbs(0.0, 1e-18));

    const double tmin = 0.0015 / 2.2;
    const auto m = measurements_from_sequence({0.0, {tmin}}, kParams);
    CHECK_THAT(m.integrals[0], WithinRel(1.0 * tmin, 1e-12));
    CHECK(m.instants == std::vector<double>{0.0, tmin});

    CHECK(error_code([] { measurements_from_sequence({0.0, {1e-3, 0.0}}, kParams); }) == Errc::invalid_argument);
}

TEST_CASE("integrals are affine in the interval lengths")
{
    const FiringSequence a{0.0, {1e-3, 2e-3, 3e-3}};
    const FiringSequence b{0.0, {2e-3, 4e-3, 6e-3}};
    const auto ma = measurements_from_sequence(a, kParams);
    const auto mb = measurements_from_sequence(b, kParams);
    for (std::size_t n = 0; n < 3; ++n)
        CHECK_THAT(mb.integrals[n] - kParams.charge(), WithinRel(2.0 * (ma.integrals[n] - kParams.charge()), 1e-12));
}

TEST_CASE("NMSE reference values")
{
    const auto p = generate_realization(2, kOmega0, kSupport, AmplitudeLaw::gaussian_coefficients, 1.0);
    const Waveform f = evaluate_grid(p, 1e-4);
    CHECK(nmse_db(f, f, 0.1) == kNmseFloorDb);
    CHECK_THAT(nmse_db(f, scaled(f, 0.0), 0.1), WithinAbs(0.0, 1e-12));
    CHECK_THAT(nmse_db(f, scaled(f, 0.9), 0.1), WithinAbs(-20.0, 1e-9));

    const Waveform zero = scaled(f, 0.0);
    CHECK(error_code([&] { nmse_db(zero, f, 0.1); }) == Errc::undefined_nmse);
    Waveform shorter = f;
    shorter.values.pop_back();
    CHECK(error_code([&] { nmse_db(f, shorter, 0.1); }) == Errc::invalid_argument);
}

TEST_CASE("unquantized TEM round trip recovers the signal")
{
    for (std::uint64_t seed : {1u, 5u, 17u}) CHECK(tem_round_trip(seed, kDefaultGridStep) <= -40.0);
}

TEST_CASE("TEM recovery is stable under encoder grid refinement")
{
    const double coarse = tem_round_trip(8, 2e-6);
    const double fine = tem_round_trip(8, 1e-6);
    CHECK(std::abs(coarse - fine) < 0.1 * std::abs(fine) + 0.1);
    CHECK(fine <= -40.0);
}

TEST_CASE("zero integrals reconstruct to zero")
{
    const BandlimitedProcess zero(SincExpansion(kOmega0, {0.0}, {0.0}), 1.0, kSupport);
    auto meas = measurements_from_sequence(encode(zero, kParams), kParams);
    for (double q : meas.integrals) CHECK(std::abs(q) < 1e-15);
    std::fill(meas.integrals.begin(), meas.integrals.end(), 0.0);
    const ReconstructionConfig cfg;
    const SincExpansion fit = fit_tem(meas, cfg);
    for (double c : fit.coefficients()) CHECK(c == 0.0);
    for (double v : reconstruct_tem(meas, cfg, kSupport).values) CHECK(v == 0.0);
}

TEST_CASE("reconstruction refuses sub-Nyquist measurements")
{
    const ReconstructionConfig cfg;
    TemMeasurements meas{{0.0, 0.005, 0.02, 0.025}, {0.0, 0.0, 0.0}};
    CHECK(error_code([&] { reconstruct_tem(meas, cfg, kSupport); }) == Errc::nyquist_violation);
    const std::vector<double> times{0.0, 0.005, 0.02};
    const std::vector<double> amps{1.0, 0.0, 0.0};
    CHECK(error_code([&] { reconstruct_nus(times, amps, cfg, kSupport); }) == Errc::nyquist_violation);
    try {
        reconstruct_nus(times, amps, cfg, kSupport);
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("index 1") != std::string::npos);
    }
}

TEST_CASE("single NUS sample at a sinc center reproduces the sinc")
{
    const ReconstructionConfig cfg;
    const std::vector<double> t{0.013};
    const std::vector<double> a{0.7};
    const Waveform w = reconstruct_nus(t, a, cfg, kSupport);
    for (std::size_t i = 0; i < w.size(); i += 37)
        CHECK_THAT(w.values[i], WithinAbs(0.7 * sinc(kOmega0 * (w.time(i) - 0.013)), 1e-6));
}

TEST_CASE("unquantized NUS at firing instants recovers the signal")
{
    for (std::uint64_t seed : {3u, 4u}) {
        const auto p = generate_realization(seed, kOmega0, kSupport, AmplitudeLaw::gaussian_coefficients, 1.0);
        const auto t = encode(p, kParams).instants();
        std::vector<double> a;
        for (double x : t) a.push_back(evaluate(p, x));
        const ReconstructionConfig cfg;
        const Waveform est = reconstruct_nus(t, a, cfg, kSupport);
        CHECK(nmse_db(evaluate_grid(p, cfg.output_grid_step), est, 0.1) <= -40.0);
    }
}

TEST_CASE("ridge solve")
{
    Eigen::MatrixXd a(3, 2);
    a << 1, 0, 0, 2, 1, 1;
    const Eigen::VectorXd x_true = Eigen::Vector2d(0.5, -1.0);
    const Eigen::VectorXd y = a * x_true;
    const Eigen::VectorXd x = ridge_solve(a, y, 0.0);
    CHECK_THAT(x(0), WithinAbs(0.5, 1e-12));
    CHECK_THAT(x(1), WithinAbs(-1.0, 1e-12));

    const Eigen::MatrixXd singular = Eigen::MatrixXd::Zero(2, 2);
    CHECK(error_code([&] { ridge_solve(singular, Eigen::Vector2d(1.0, 1.0), 0.0); }) == Errc::numerical_failure);
}

TEST_CASE("waveform CSV")
{
    std::ostringstream os;
    write_waveform_csv(os, Waveform{0.0, 0.5, {1.0, 1.0 / 3.0}});
    CHECK(os.str() == "time_s,amplitude\n0,1\n0.5,0.333333\n");
}
