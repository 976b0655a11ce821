// temq: command-line front end for the time-encoding quantization experiments.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "temq/temq.hpp"

namespace {

using namespace temq;

struct CommonOptions {
    std::string config_path;
    std::optional<std::string> bits;
    std::optional<double> gamma;
    std::optional<std::uint64_t> seed;
    std::optional<int> realizations;
    std::string out;
    std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonOptions& o)
{
    cmd->add_option("--config", o.config_path, "Experiment config file (key = value lines)");
    cmd->add_option("--bits", o.bits, "Bits per quantized value (sweep: list such as 3,4,5 or 3..12)");
    cmd->add_option("--gamma", o.gamma, "Compander exponent in (0, 1]");
    cmd->add_option("--seed", o.seed, "Master / realization seed");
    cmd->add_option("--realizations", o.realizations, "Override n_realizations");
    cmd->add_option("--out", o.out, "Output path (default: stdout)");
    cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

ExperimentConfig resolve_config(const CommonOptions& o)
{
    ExperimentConfig cfg = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
    if (o.bits) cfg.bits = parse_bits_list(*o.bits);
    if (o.gamma) cfg.gamma = *o.gamma;
    if (o.seed) cfg.seed = *o.seed;
    if (o.realizations) cfg.n_realizations = *o.realizations;
    validate(cfg);
    return cfg;
}

int single_bits(const ExperimentConfig& cfg, const CommonOptions& o)
{
    if (!o.bits) return 4;
    if (cfg.bits.size() != 1) throw Error(Errc::config, "expected a single --bits value");
    return cfg.bits.front();
}

/// Writes through `fn` to --out or stdout.
template <class Fn>
void with_output(const std::string& path, Fn&& fn)
{
    if (path.empty()) {
        fn(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(Errc::io, "cannot open '" + path + "' for writing");
    fn(os);
    os.flush();
    if (!os) throw Error(Errc::io, "failed writing '" + path + "'");
}

void write_file(const std::string& path, const std::string& content)
{
    with_output(path, [&](std::ostream& os) { os << content; });
}

int exit_code(Errc code)
{
    switch (code) {
    case Errc::config:
    case Errc::invalid_argument:
    case Errc::invalid_params: return 2;
    case Errc::io: return 4;
    default: return 3;
    }
}

void cmd_generate(const CommonOptions& o)
{
    const ExperimentConfig cfg = resolve_config(o);
    const BandlimitedProcess p =
        generate_realization(cfg.seed, cfg.omega0, cfg.support, cfg.amplitude_law, cfg.c, cfg.grid_step);
    with_output(o.out, [&](std::ostream& os) {
        if (format_from_string(o.format) == OutputFormat::csv) {
            write_waveform_csv(os, evaluate_grid(p, cfg.output_grid_step));
        } else {
            nlohmann::json j{{"seed", cfg.seed},
                             {"omega0", p.omega0()},
                             {"amplitude_bound", p.bound()},
                             {"support", {p.support().lo, p.support().hi}},
                             {"centers", p.centers()},
                             {"coefficients", p.coefficients()}};
            os << j.dump(2) << '\n';
        }
    });
}

void cmd_encode(const CommonOptions& o)
{
    const ExperimentConfig cfg = resolve_config(o);
    const Realization r = realize(cfg, cfg.seed);
    const auto instants = r.sequence.instants();
    with_output(o.out, [&](std::ostream& os) {
        if (format_from_string(o.format) == OutputFormat::csv) {
            os << "n,instant_s,interval_s,amplitude\n";
            for (std::size_t n = 0; n < instants.size(); ++n) {
                os << n + 1 << ',' << format_g6(instants[n]) << ','
                   << (n < r.sequence.intervals.size() ? format_g6(r.sequence.intervals[n]) : std::string()) << ','
                   << format_g6(r.firing_amplitudes[n]) << '\n';
            }
        } else {
            nlohmann::json j{{"seed", cfg.seed},
                             {"first_instant", r.sequence.first_instant},
                             {"intervals", r.sequence.intervals},
                             {"nyquist_ok", validate_nyquist(r.sequence, cfg.omega0)}};
            os << j.dump(2) << '\n';
        }
    });
}

void cmd_quantize(const CommonOptions& o, const std::string& designer_name, const std::string& codebook_out)
{
    const ExperimentConfig cfg = resolve_config(o);
    const int bits = single_bits(cfg, o);
    const Designer designer = designer_from_string(designer_name);
    const Interval support = interval_support(cfg);
    const TrainingPool pool = build_training_pool(cfg);
    Codebook cb;
    switch (designer) {
    case Designer::uniform: cb = design_uniform(support, bits); break;
    case Designer::compander: cb = design_compander({cfg.gamma, interval_design_density(pool, cfg)}, bits); break;
    case Designer::lloyd_max: cb = design_lloyd_max(interval_design_density(pool, cfg), bits).codebook; break;
    }
    if (!codebook_out.empty()) write_file(codebook_out, to_json(cb).dump(2) + "\n");

    const Realization r = realize(cfg, cfg.seed);
    const QuantizedSequence q = quantize_sequence(cb, r.sequence.intervals);
    with_output(o.out, [&](std::ostream& os) {
        if (format_from_string(o.format) == OutputFormat::csv) {
            os << "n,interval_s,index,level_s\n";
            for (std::size_t n = 0; n < q.levels.size(); ++n)
                os << n + 1 << ',' << format_g6(r.sequence.intervals[n]) << ',' << q.indices[n] << ','
                   << format_g6(q.levels[n]) << '\n';
        } else {
            nlohmann::json j{{"codebook", to_json(cb)}, {"indices", q.indices}, {"levels", q.levels}};
            os << j.dump(2) << '\n';
        }
    });
}

void cmd_reconstruct(const CommonOptions& o, const std::string& branch_name, bool unquantized)
{
    const ExperimentConfig cfg = resolve_config(o);
    const Realization r = realize(cfg, cfg.seed);
    const ReconstructionConfig rc = reconstruction_config(cfg);
    Waveform estimate;
    std::string label = "unquantized";
    if (unquantized) {
        estimate = reconstruct_tem(measurements_from_sequence(r.sequence, cfg.tem_params()), rc, cfg.support);
    } else {
        const Branch branch = branch_from_string(branch_name);
        const int bits = single_bits(cfg, o);
        const BranchQuantizers q = design_branch_quantizers(build_training_pool(cfg), cfg, branch, bits);
        const FiringSequence sent = quantize_intervals(r.sequence, q.times, cfg.interval_feedback);
        if (is_tem(branch)) {
            estimate = reconstruct_tem(measurements_from_sequence(sent, cfg.tem_params()), rc, cfg.support);
        } else {
            const auto levels = quantize_sequence(*q.amplitudes, r.firing_amplitudes).levels;
            estimate = reconstruct_nus(sent.instants(), levels, rc, cfg.support);
        }
        label = std::string(to_string(branch)) + " " + std::to_string(bits) + " bits";
    }
    const double nmse = nmse_db(r.reference, estimate, cfg.edge_trim);
    std::fprintf(stderr, "seed %llu, %s: NMSE %.4f dB\n", static_cast<unsigned long long>(cfg.seed), label.c_str(),
                 nmse);
    with_output(o.out, [&](std::ostream& os) {
        if (format_from_string(o.format) == OutputFormat::csv) {
            write_waveform_csv(os, estimate);
        } else {
            nlohmann::json j{{"seed", cfg.seed},      {"label", label},       {"nmse_db", nmse},
                             {"start", estimate.start}, {"step", estimate.step}, {"values", estimate.values}};
            os << j.dump(2) << '\n';
        }
    });
}

void cmd_sweep(const CommonOptions& o, bool do_gamma_sweep, bool quiet)
{
    ExperimentConfig cfg = resolve_config(o);
    if (do_gamma_sweep) {
        const GammaSweepResult g = gamma_sweep(cfg);
        for (const auto& [gamma, mean] : g.mean_nmse_by_gamma)
            std::fprintf(stderr, "gamma %.3g: mean tem-nuq NMSE %.3f dB\n", gamma, mean);
        std::fprintf(stderr, "best gamma %.3g\n", g.best_gamma);
        cfg.gamma = g.best_gamma;
    }
    ProgressFn progress;
    if (!quiet)
        progress = [](std::size_t done, std::size_t total) {
            std::fprintf(stderr, "\rrealization %zu/%zu", done, total);
            if (done == total) std::fputc('\n', stderr);
        };
    const auto records = run_sweep(cfg, {kAllBranches.begin(), kAllBranches.end()}, progress);
    with_output(o.out, [&](std::ostream& os) { write_records(os, records, format_from_string(o.format)); });
}

void cmd_distcheck(const CommonOptions& o)
{
    const ExperimentConfig cfg = resolve_config(o);
    const DistributionReport rep = run_distribution_check(cfg);
    std::printf("realizations %zu, intervals %zu, TV distance %.6f (duration-weighted %.6f), "
                "normalization certificate %.8f\n",
                rep.n_realizations, rep.interval_histogram.n_samples(), rep.tv_distance, rep.duration_weighted_tv,
                rep.induced_density.certificate());
    if (o.out.empty()) return;
    if (format_from_string(o.format) == OutputFormat::json) {
        write_file(o.out, report_to_json(rep).dump(2) + "\n");
        return;
    }
    const auto emit = [&](const std::string& suffix, auto&& body) {
        with_output(o.out + suffix, body);
    };
    emit("_intervals.csv", [&](std::ostream& os) { write_histogram_csv(os, rep.interval_histogram); });
    emit("_amplitudes.csv", [&](std::ostream& os) { write_histogram_csv(os, rep.amplitude_histogram); });
    emit("_density.csv", [&](std::ostream& os) { write_density_csv(os, rep.induced_density); });
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Time-encoding quantization experiments"};
    app.require_subcommand(1);

    CommonOptions generate_opts, encode_opts, quantize_opts, reconstruct_opts, sweep_opts, dist_opts;
    std::string designer = "compander", codebook_out, branch = "tem-nuq";
    bool unquantized = false, gamma_sweep_flag = false, quiet = false;

    auto* generate = app.add_subcommand("generate", "Synthesize one bandlimited realization");
    add_common(generate, generate_opts);
    auto* encode = app.add_subcommand("encode", "Encode one realization with the IF-TEM");
    add_common(encode, encode_opts);
    auto* quantize = app.add_subcommand("quantize", "Design an interval codebook and quantize one encoding");
    add_common(quantize, quantize_opts);
    quantize->add_option("--designer", designer, "uniform | compander | lloyd-max")
        ->check(CLI::IsMember({"uniform", "compander", "lloyd-max"}));
    quantize->add_option("--codebook-out", codebook_out, "Also write the codebook record (JSON) here");
    auto* reconstruct = app.add_subcommand("reconstruct", "Quantize, reconstruct and score one realization");
    add_common(reconstruct, reconstruct_opts);
    reconstruct->add_option("--branch", branch, "tem-uq | tem-nuq | nus-uq | nus-nuq")
        ->check(CLI::IsMember({"tem-uq", "tem-nuq", "nus-uq", "nus-nuq"}));
    reconstruct->add_flag("--unquantized", unquantized, "Reconstruct from the exact firing intervals");
    auto* sweep = app.add_subcommand("sweep", "Rate-distortion sweep over branches and bits");
    add_common(sweep, sweep_opts);
    sweep->add_flag("--gamma-sweep", gamma_sweep_flag, "Pick the best gamma from {0.05, 0.1, 0.2, 0.5} first");
    sweep->add_flag("--quiet", quiet, "No progress output");
    auto* distcheck = app.add_subcommand("distcheck", "Empirical vs induced interval distribution");
    add_common(distcheck, dist_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*generate) cmd_generate(generate_opts);
        else if (*encode) cmd_encode(encode_opts);
        else if (*quantize) cmd_quantize(quantize_opts, designer, codebook_out);
        else if (*reconstruct) cmd_reconstruct(reconstruct_opts, branch, unquantized);
        else if (*sweep) cmd_sweep(sweep_opts, gamma_sweep_flag, quiet);
        else if (*distcheck) cmd_distcheck(dist_opts);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
