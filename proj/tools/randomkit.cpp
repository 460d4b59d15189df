// randomkit: generate allocation sequences, run Monte Carlo comparisons and
// validate procedures against the exact oracle.
//
//   randomkit sequence --proc PBD:b=2 --w 1,1 --n 8
//   randomkit run config.json --out results --threads 4
//   randomkit run --proc BSD:b=3 --proc EBCD:p=2/3 --w 1,1 --n 40 --nsim 10000
//   randomkit validate --proc EBCD:p=2/3 --w 1,1 --n 10 --nsim 100000
//
// Exit codes: 0 ok, 1 validation failure, 2 usage or configuration error.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "randomkit/config.hpp"
#include "randomkit/oracle.hpp"
#include "randomkit/workflows.hpp"

namespace rk = randomkit;

namespace {

rk::OutputFormat parse_format(const std::string& s) {
    return s == "json" ? rk::OutputFormat::Json : rk::OutputFormat::Csv;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Restricted randomization procedures: sequences, Monte Carlo operating characteristics, "
                 "exact validation"};
    app.require_subcommand(1);

    std::string weights = "1,1";
    std::uint64_t seed = rk::kDefaultSeed;
    int threads = 0;
    std::string format = "csv";
    std::string out_dir;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--w", weights, "Target ratio, e.g. 4,3,2,1 (fractions allowed)")->capture_default_str();
        cmd->add_option("--seed", seed, "Master seed")->capture_default_str();
        cmd->add_option("--out", out_dir, "Output directory");
        cmd->add_option("--format", format, "Table format")->check(CLI::IsMember({"csv", "json"}));
    };

    // sequence
    auto* seq = app.add_subcommand("sequence", "Generate one allocation sequence");
    std::string seq_proc;
    int seq_n = 0;
    seq->add_option("--proc", seq_proc, "Procedure: KIND[:name=value,...]")->required();
    seq->add_option("--n", seq_n, "Sample size")->required()->check(CLI::PositiveNumber);
    add_common(seq);

    // run
    auto* run = app.add_subcommand("run", "Monte Carlo comparison from a JSON config or --proc flags");
    std::string config_file;
    std::vector<std::string> run_procs;
    std::optional<int> run_n, run_nsim;
    std::vector<std::string> run_metrics;
    bool plots = false;
    std::string brt_norm;
    run->add_option("config", config_file, "JSON run configuration")->check(CLI::ExistingFile);
    run->add_option("--proc", run_procs, "Procedure (repeatable); used when no config file is given");
    run->add_option("--n", run_n, "Sample size (overrides the config)");
    run->add_option("--nsim", run_nsim, "Replicates (overrides the config)");
    run->add_option("--metrics", run_metrics, "Metric identifiers (default: all)");
    run->add_flag("--plots", plots, "Also write SVG plots");
    run->add_option("--brt-normalization", brt_norm, "G(j) normalization")
        ->check(CLI::IsMember({"absolute", "minmax"}));
    run->add_option("--threads", threads, "Worker threads (0: RANDOMKIT_THREADS or all cores)");
    add_common(run);

    // validate
    auto* val = app.add_subcommand("validate", "Compare a simulation with the exact oracle");
    std::string val_proc;
    int val_n = 0, val_nsim = 0;
    double z_limit = 4.0;
    val->add_option("--proc", val_proc, "Procedure: KIND[:name=value,...]")->required();
    val->add_option("--n", val_n, "Sample size")->required()->check(CLI::PositiveNumber);
    val->add_option("--nsim", val_nsim, "Replicates")->required()->check(CLI::PositiveNumber);
    val->add_option("--z", z_limit, "Largest accepted |z|")->capture_default_str();
    val->add_option("--threads", threads, "Worker threads (0: RANDOMKIT_THREADS or all cores)");
    add_common(val);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? rk::kExitOk : rk::kExitUsage;
    }

    try {
        if (*seq) {
            const auto target = rk::parse_weights(weights);
            rk::SequenceRequest req{rk::parse_procedure_spec(seq_proc, target, seq_n), seq_n, seed, std::nullopt,
                                    parse_format(format)};
            if (!out_dir.empty()) req.output_dir = out_dir;
            return rk::cmd_sequence(req, std::cout);
        }
        if (*run) {
            rk::RunConfig cfg;
            if (!config_file.empty()) {
                cfg = rk::load_config(config_file);
                if (!run_procs.empty()) throw rk::ConfigError("proc", "give either a config file or --proc");
                if (run_n && *run_n != cfg.n) {
                    // RAND/TMD carry their planned n, so re-derive every procedure.
                    throw rk::ConfigError("n", "--n cannot override the config file; edit the file instead");
                }
                if (run_nsim) cfg.nsim = *run_nsim;
                if (run->count("--seed")) cfg.seed = seed;
            } else {
                if (run_procs.empty()) throw rk::ConfigError("proc", "give a config file or at least one --proc");
                if (!run_n || !run_nsim) throw rk::ConfigError("n", "--n and --nsim are required without a config");
                cfg.n = *run_n;
                cfg.nsim = *run_nsim;
                cfg.seed = seed;
                const auto target = rk::parse_weights(weights);
                for (const auto& p : run_procs) cfg.procedures.push_back(rk::parse_procedure_spec(p, target, cfg.n));
                cfg.metrics.assign(std::begin(rk::kMetricIds), std::end(rk::kMetricIds));
            }
            if (cfg.nsim < 1) throw rk::ConfigError("nsim", "must be >= 1");
            if (!run_metrics.empty()) cfg.metrics = run_metrics;
            if (run->count("--threads")) cfg.threads = threads;
            if (run->count("--format")) cfg.format = parse_format(format);
            if (!out_dir.empty()) cfg.output_dir = out_dir;
            if (plots) cfg.emit_plots = true;
            if (!brt_norm.empty()) {
                cfg.brt_normalization =
                    brt_norm == "minmax" ? rk::BrtNormalization::MinMax : rk::BrtNormalization::Absolute;
            }
            return rk::cmd_run(cfg, std::cout, std::cerr);
        }
        if (*val) {
            const auto target = rk::parse_weights(weights);
            rk::ValidateRequest req{rk::parse_procedure_spec(val_proc, target, val_n), val_n, val_nsim, seed, threads,
                                    z_limit, std::nullopt};
            if (!out_dir.empty()) req.output_dir = out_dir;
            return rk::cmd_validate(req, std::cout);
        }
    } catch (const std::exception& e) {
        // Config/spec errors, oracle limits and unwritable outputs alike.
        std::cerr << "error: " << e.what() << '\n';
        return rk::kExitUsage;
    }
    return rk::kExitUsage;
}
