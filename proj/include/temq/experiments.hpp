#pragma once

// End-to-end pipelines: synthesis, encoding, codebook design on a training pool,
// quantization, reconstruction and NMSE; rate-distortion sweeps and the interval
// distribution check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "temq/density.hpp"
#include "temq/error.hpp"
#include "temq/experiment_config.hpp"
#include "temq/interval_statistics.hpp"
#include "temq/quantizers.hpp"
#include "temq/reconstruction.hpp"
#include "temq/signal_model.hpp"
#include "temq/tem_encoder.hpp"

namespace temq {

inline constexpr std::uint64_t kTrainingSeedOffset = 1000000;

enum class Branch { tem_uq, tem_nuq, nus_uq, nus_nuq };
inline constexpr std::array<Branch, 4> kAllBranches{Branch::tem_uq, Branch::tem_nuq, Branch::nus_uq, Branch::nus_nuq};

inline const char* to_string(Branch b)
{
    switch (b) {
    case Branch::tem_uq: return "tem-uq";
    case Branch::tem_nuq: return "tem-nuq";
    case Branch::nus_uq: return "nus-uq";
    case Branch::nus_nuq: return "nus-nuq";
    }
    return "unknown";
}

inline Branch branch_from_string(const std::string& s)
{
    for (Branch b : kAllBranches)
        if (s == to_string(b)) return b;
    throw Error(Errc::config, "unknown branch '" + s + "'");
}

inline bool is_tem(Branch b) { return b == Branch::tem_uq || b == Branch::tem_nuq; }

/// Bits on the wire per event: B for TEM, B for the time plus B for the amplitude in NUS.
inline int total_bits(Branch b, int bits) { return is_tem(b) ? bits : 2 * bits; }

inline ReconstructionConfig reconstruction_config(const ExperimentConfig& cfg)
{
    return {cfg.omega0, cfg.regularization, cfg.output_grid_step, cfg.edge_trim};
}

inline Interval interval_support(const ExperimentConfig& cfg) { return interval_support(cfg.tem_params(), cfg.c); }

/// One synthesized and encoded realization together with its ground truth on the output grid.
struct Realization {
    std::uint64_t seed = 0;
    BandlimitedProcess process;
    FiringSequence sequence;
    /// f(t_n) at every firing instant.
    std::vector<double> firing_amplitudes;
    Waveform reference;
};

/// Generates, samples and encodes one realization. If `amplitudes` is given the fine-grid
/// samples are pooled into it.
inline Realization realize(const ExperimentConfig& cfg, std::uint64_t seed, Histogram* amplitudes = nullptr)
{
    BandlimitedProcess process =
        generate_realization(seed, cfg.omega0, cfg.support, cfg.amplitude_law, cfg.c, cfg.grid_step);
    const Waveform fine = evaluate_grid(process, cfg.grid_step);
    if (amplitudes) accumulate_amplitudes(*amplitudes, fine);
    validate(cfg.tem_params(), process.bound());
    FiringSequence seq = encode(fine, cfg.tem_params());
    std::vector<double> amps;
    for (double t : seq.instants()) amps.push_back(evaluate(process, t));
    Waveform reference = evaluate_grid(process, cfg.output_grid_step);
    return {seed, std::move(process), std::move(seq), std::move(amps), std::move(reference)};
}

/// Pooled statistics of the training realizations, the only input to codebook design.
struct TrainingPool {
    Histogram amplitude_histogram;
    Histogram interval_histogram;
    std::vector<double> firing_amplitudes;
    std::size_t n_realizations = 0;
};

inline TrainingPool build_training_pool(const ExperimentConfig& cfg)
{
    validate(cfg);
    TrainingPool pool{Histogram({-cfg.c, cfg.c}, static_cast<std::size_t>(cfg.n_bins)),
                      Histogram(interval_support(cfg), static_cast<std::size_t>(cfg.n_bins)), {}, 0};
    for (int i = 0; i < cfg.n_realizations; ++i) {
        const Realization r = realize(cfg, cfg.seed + kTrainingSeedOffset + static_cast<std::uint64_t>(i),
                                      &pool.amplitude_histogram);
        pool.interval_histogram.add(r.sequence.intervals);
        pool.firing_amplitudes.insert(pool.firing_amplitudes.end(), r.firing_amplitudes.begin(),
                                      r.firing_amplitudes.end());
        ++pool.n_realizations;
    }
    return pool;
}

/// Interval density the non-uniform time quantizer is designed for.
inline Density interval_design_density(const TrainingPool& pool, const ExperimentConfig& cfg)
{
    if (cfg.codebook_source == CodebookSource::empirical_pool) return Density::from_histogram(pool.interval_histogram);
    return induced_interval_pdf(Density::from_histogram(pool.amplitude_histogram), cfg.tem_params(), cfg.c);
}

/// Type-erased scalar quantizer.
class AnyQuantizer {
public:
    AnyQuantizer() = default;
    template <class Q>
    explicit AnyQuantizer(Q q) : impl_(std::make_shared<const Q>(std::move(q)))
    {
        const auto* raw = static_cast<const Q*>(impl_.get());
        fn_ = [raw](double x) { return raw->quantize(x); };
    }
    QuantizedValue quantize(double x) const { return fn_(x); }

private:
    std::shared_ptr<const void> impl_;
    std::function<QuantizedValue(double)> fn_;
};

struct BranchQuantizers {
    AnyQuantizer times;
    std::optional<AnyQuantizer> amplitudes;
};

inline BranchQuantizers design_branch_quantizers(const TrainingPool& pool, const ExperimentConfig& cfg, Branch branch,
                                                 int bits)
{
    const Interval t_support = interval_support(cfg);
    const auto time_quantizer = [&](TimeQuantizer kind) {
        if (kind == TimeQuantizer::uniform) return AnyQuantizer(UniformQuantizer(t_support, bits));
        return AnyQuantizer(CompandingQuantizer(Compander({cfg.gamma, interval_design_density(pool, cfg)}), bits));
    };
    BranchQuantizers q;
    switch (branch) {
    case Branch::tem_uq: q.times = time_quantizer(TimeQuantizer::uniform); break;
    case Branch::tem_nuq: q.times = time_quantizer(cfg.tem_nuq_times); break;
    case Branch::nus_uq:
        q.times = time_quantizer(TimeQuantizer::uniform);
        q.amplitudes = AnyQuantizer(UniformQuantizer({-cfg.c, cfg.c}, bits));
        break;
    case Branch::nus_nuq:
        q.times = time_quantizer(cfg.nus_nuq_times);
        if (cfg.nus_nuq_amplitudes == AmplitudeQuantizer::uniform)
            q.amplitudes = AnyQuantizer(UniformQuantizer({-cfg.c, cfg.c}, bits));
        else
            q.amplitudes = AnyQuantizer(design_lloyd_max(pool.firing_amplitudes, {-cfg.c, cfg.c}, bits).codebook);
        break;
    }
    return q;
}

/// Quantized interval stream. The decoder rebuilds t̂_{n+1} = t̂_n + T̂_n from the exact t_1.
/// With `feedback` the encoder quantizes t_{n+1} - t̂_n; without it each T_n is quantized
/// on its own.
template <class Quantizer>
FiringSequence quantize_intervals(const FiringSequence& seq, const Quantizer& q, bool feedback)
{
    FiringSequence out;
    out.first_instant = seq.first_instant;
    out.intervals.resize(seq.intervals.size());
    double exact = seq.first_instant;
    double decoded = seq.first_instant;
    for (std::size_t n = 0; n < seq.intervals.size(); ++n) {
        exact += seq.intervals[n];
        const double target = feedback ? exact - decoded : seq.intervals[n];
        out.intervals[n] = q.quantize(target).level;
        decoded += out.intervals[n];
    }
    return out;
}

inline double evaluate_branch(const Realization& r, const ExperimentConfig& cfg, Branch branch,
                              const BranchQuantizers& q)
{
    const ReconstructionConfig rc = reconstruction_config(cfg);
    const FiringSequence sent = quantize_intervals(r.sequence, q.times, cfg.interval_feedback);
    Waveform estimate;
    if (is_tem(branch)) {
        estimate = reconstruct_tem(measurements_from_sequence(sent, cfg.tem_params()), rc, cfg.support);
    } else {
        const auto levels = quantize_sequence(*q.amplitudes, r.firing_amplitudes).levels;
        estimate = reconstruct_nus(sent.instants(), levels, rc, cfg.support);
    }
    return nmse_db(r.reference, estimate, cfg.edge_trim);
}

/// NMSE of the unquantized TEM round trip for one realization.
inline double unquantized_tem_nmse(const Realization& r, const ExperimentConfig& cfg)
{
    const Waveform estimate =
        reconstruct_tem(measurements_from_sequence(r.sequence, cfg.tem_params()), reconstruction_config(cfg), cfg.support);
    return nmse_db(r.reference, estimate, cfg.edge_trim);
}

namespace detail {

inline std::string run_context(Branch branch, int bits, std::uint64_t seed)
{
    return std::string("branch ") + to_string(branch) + ", bits " + std::to_string(bits) + ", seed " +
           std::to_string(seed);
}

} // namespace detail

/// Single end-to-end run on the realization with `seed`, codebooks designed on the
/// configured training pool.
inline double run_pipeline(const ExperimentConfig& cfg, Branch branch, int bits, std::uint64_t seed)
{
    try {
        const TrainingPool pool = build_training_pool(cfg);
        const BranchQuantizers q = design_branch_quantizers(pool, cfg, branch, bits);
        return evaluate_branch(realize(cfg, seed), cfg, branch, q);
    } catch (const Error& e) {
        throw e.with_context(detail::run_context(branch, bits, seed));
    }
}

struct RateDistortionRecord {
    Branch branch = Branch::tem_uq;
    int bits = 0;
    int total_bits = 0;
    double nmse_db = 0.0;
    double nmse_stderr = 0.0;
    int n = 0;
    std::uint64_t seed = 0;

    friend bool operator==(const RateDistortionRecord&, const RateDistortionRecord&) = default;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Every branch at every configured resolution, averaged over n_realizations evaluation
/// realizations (seeds master + i). Records are ordered by (branch, bits).
inline std::vector<RateDistortionRecord> run_sweep(const ExperimentConfig& cfg,
                                                   const std::vector<Branch>& branches = {kAllBranches.begin(),
                                                                                          kAllBranches.end()},
                                                   const ProgressFn& progress = {})
{
    validate(cfg);
    const TrainingPool pool = build_training_pool(cfg);
    std::vector<int> bits = cfg.bits;
    std::sort(bits.begin(), bits.end());
    bits.erase(std::unique(bits.begin(), bits.end()), bits.end());
    std::vector<Branch> order = branches;
    std::sort(order.begin(), order.end());

    struct Cell {
        Branch branch;
        int bits;
        BranchQuantizers q;
        std::vector<double> nmse;
    };
    std::vector<Cell> cells;
    for (Branch br : order)
        for (int b : bits) {
            try {
                cells.push_back({br, b, design_branch_quantizers(pool, cfg, br, b), {}});
            } catch (const Error& e) {
                throw e.with_context(detail::run_context(br, b, cfg.seed));
            }
        }

    const auto n = static_cast<std::size_t>(cfg.n_realizations);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t seed = cfg.seed + i;
        const Realization r = realize(cfg, seed);
        for (Cell& cell : cells) {
            try {
                cell.nmse.push_back(evaluate_branch(r, cfg, cell.branch, cell.q));
            } catch (const Error& e) {
                throw e.with_context(detail::run_context(cell.branch, cell.bits, seed));
            }
        }
        if (progress) progress(i + 1, n);
    }

    std::vector<RateDistortionRecord> records;
    for (const Cell& cell : cells) {
        double mean = 0.0;
        for (double v : cell.nmse) mean += v;
        mean /= static_cast<double>(cell.nmse.size());
        double var = 0.0;
        for (double v : cell.nmse) var += (v - mean) * (v - mean);
        const double k = static_cast<double>(cell.nmse.size());
        const double stderr_ = cell.nmse.size() > 1 ? std::sqrt(var / (k - 1.0) / k) : 0.0;
        records.push_back({cell.branch, cell.bits, total_bits(cell.branch, cell.bits), mean, stderr_,
                           static_cast<int>(cell.nmse.size()), cfg.seed});
    }
    return records;
}

struct GammaSweepResult {
    double best_gamma = kDefaultGamma;
    std::vector<std::pair<double, double>> mean_nmse_by_gamma;
};

/// Mean TEM-NUQ NMSE (over the configured bits and realizations) for each candidate gamma.
inline GammaSweepResult gamma_sweep(ExperimentConfig cfg, const std::vector<double>& gammas = {0.05, 0.1, 0.2, 0.5})
{
    GammaSweepResult out;
    double best = std::numeric_limits<double>::infinity();
    for (double g : gammas) {
        cfg.gamma = g;
        double mean = 0.0;
        const auto records = run_sweep(cfg, {Branch::tem_nuq});
        for (const auto& r : records) mean += r.nmse_db;
        mean /= static_cast<double>(records.size());
        out.mean_nmse_by_gamma.emplace_back(g, mean);
        if (mean < best) {
            best = mean;
            out.best_gamma = g;
        }
    }
    return out;
}

struct DistributionReport {
    double tv_distance = 0.0;
    /// TV against the histogram with each interval weighted by its own length, i.e. the
    /// fraction of time spent in intervals of each length rather than the fraction of events.
    double duration_weighted_tv = 0.0;
    Histogram amplitude_histogram;
    Histogram interval_histogram;
    Histogram duration_histogram;
    Density induced_density;
    std::size_t n_realizations = 0;
};

/// Compares the pooled interval histogram of n_realizations encodes with the density induced
/// by the pooled amplitude histogram of the same realizations.
inline DistributionReport run_distribution_check(const ExperimentConfig& cfg)
{
    validate(cfg);
    DistributionReport rep;
    rep.amplitude_histogram = Histogram({-cfg.c, cfg.c}, static_cast<std::size_t>(cfg.n_bins));
    rep.interval_histogram = Histogram(interval_support(cfg), static_cast<std::size_t>(cfg.n_bins));
    rep.duration_histogram = rep.interval_histogram;
    for (int i = 0; i < cfg.n_realizations; ++i) {
        BandlimitedProcess p = generate_realization(cfg.seed + static_cast<std::uint64_t>(i), cfg.omega0, cfg.support,
                                                    cfg.amplitude_law, cfg.c, cfg.grid_step);
        const Waveform fine = evaluate_grid(p, cfg.grid_step);
        accumulate_amplitudes(rep.amplitude_histogram, fine);
        const FiringSequence seq = encode(fine, cfg.tem_params());
        rep.interval_histogram.add(seq.intervals);
        for (double t : seq.intervals) rep.duration_histogram.add_weighted(t, t);
    }
    rep.n_realizations = static_cast<std::size_t>(cfg.n_realizations);
    rep.induced_density =
        induced_interval_pdf(Density::from_histogram(rep.amplitude_histogram), cfg.tem_params(), cfg.c);
    rep.tv_distance = distribution_divergence(rep.interval_histogram, rep.induced_density);
    rep.duration_weighted_tv = distribution_divergence(rep.duration_histogram, rep.induced_density);
    return rep;
}

// ---------------------------------------------------------------------------------------
// Emission

enum class OutputFormat { csv, json };

inline OutputFormat format_from_string(const std::string& s)
{
    if (s == "csv") return OutputFormat::csv;
    if (s == "json") return OutputFormat::json;
    throw Error(Errc::config, "unknown output format '" + s + "'");
}

inline std::string format_g6(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline constexpr const char* kRecordsHeader = "branch,bits,total_bits,nmse_db,nmse_stderr,n,seed";

inline void write_records_csv(std::ostream& os, const std::vector<RateDistortionRecord>& records)
{
    os << kRecordsHeader << '\n';
    for (const auto& r : records)
        os << to_string(r.branch) << ',' << r.bits << ',' << r.total_bits << ',' << format_g6(r.nmse_db) << ','
           << format_g6(r.nmse_stderr) << ',' << r.n << ',' << r.seed << '\n';
}

inline nlohmann::json records_to_json(const std::vector<RateDistortionRecord>& records)
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : records)
        arr.push_back({{"branch", to_string(r.branch)},
                       {"bits", r.bits},
                       {"total_bits", r.total_bits},
                       {"nmse_db", std::stod(format_g6(r.nmse_db))},
                       {"nmse_stderr", std::stod(format_g6(r.nmse_stderr))},
                       {"n", r.n},
                       {"seed", r.seed}});
    return arr;
}

inline void write_records(std::ostream& os, const std::vector<RateDistortionRecord>& records, OutputFormat fmt)
{
    if (fmt == OutputFormat::csv)
        write_records_csv(os, records);
    else
        os << records_to_json(records).dump(2) << '\n';
}

inline std::vector<RateDistortionRecord> parse_records_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != kRecordsHeader)
        throw Error(Errc::invalid_argument, "missing rate-distortion CSV header");
    std::vector<RateDistortionRecord> out;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split(line, ',');
        if (f.size() != 7) throw Error(Errc::invalid_argument, "malformed rate-distortion row: " + line);
        try {
            out.push_back({branch_from_string(f[0]), std::stoi(f[1]), std::stoi(f[2]), std::stod(f[3]), std::stod(f[4]),
                           std::stoi(f[5]), std::stoull(f[6])});
        } catch (const std::logic_error&) {
            throw Error(Errc::invalid_argument, "malformed rate-distortion row: " + line);
        }
    }
    return out;
}

/// bin_lo, bin_hi, density, mass per bin.
inline void write_histogram_csv(std::ostream& os, const Histogram& h)
{
    os << "bin_lo,bin_hi,density,mass\n";
    const auto m = h.masses();
    const auto d = h.densities();
    for (std::size_t i = 0; i < m.size(); ++i)
        os << format_g6(h.edges()[i]) << ',' << format_g6(h.edges()[i + 1]) << ',' << format_g6(d[i]) << ','
           << format_g6(m[i]) << '\n';
}

/// Density table (x, p(x)); jumps appear as repeated abscissae.
inline void write_density_csv(std::ostream& os, const Density& d, const char* x_name = "t_s")
{
    os << x_name << ",density\n";
    for (std::size_t i = 0; i < d.nodes().size(); ++i)
        os << format_g6(d.nodes()[i]) << ',' << format_g6(d.values()[i]) << '\n';
}

inline nlohmann::json report_to_json(const DistributionReport& rep)
{
    const auto hist_json = [](const Histogram& h) {
        return nlohmann::json{{"edges", h.edges()}, {"masses", h.masses()}, {"n_samples", h.n_samples()}};
    };
    return {{"tv_distance", rep.tv_distance},
            {"duration_weighted_tv", rep.duration_weighted_tv},
            {"n_realizations", rep.n_realizations},
            {"normalization_certificate", rep.induced_density.certificate()},
            {"amplitude_histogram", hist_json(rep.amplitude_histogram)},
            {"interval_histogram", hist_json(rep.interval_histogram)},
            {"induced_density", {{"t_s", rep.induced_density.nodes()}, {"density", rep.induced_density.values()}}}};
}

} // namespace temq
