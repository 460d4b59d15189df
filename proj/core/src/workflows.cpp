#include "randomkit/workflows.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "randomkit/engine.hpp"
#include "randomkit/metrics.hpp"
#include "randomkit/oracle.hpp"
#include "randomkit/report.hpp"

namespace randomkit {

namespace {

namespace fs = std::filesystem;

std::ofstream open_output(const fs::path& file) {
    std::ofstream f(file, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + file.string());
    return f;
}

void write_file(const fs::path& file, const std::string& content) {
    auto f = open_output(file);
    f << content;
    if (!f) throw std::runtime_error("failed writing " + file.string());
}

void prepare_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
}

std::string metric_title(std::string_view id) {
    if (id == "expected_abs_imb") return "Expected absolute imbalance";
    if (id == "variance_of_imb") return "Variance of imbalance";
    if (id == "expected_max_abs_imb") return "Expected maximum absolute imbalance";
    if (id == "cummean_loss") return "Loss L(j)";
    if (id == "cummean_epcg_c") return "EPCG, convergence guessing";
    if (id == "cummean_epcg_mp") return "EPCG, maximum-probability guessing";
    if (id == "cummean_pda") return "Proportion of deterministic assignments";
    if (id == "fi") return "Forcing index";
    if (id == "fi_normalized") return "Normalized forcing index";
    if (id == "brt") return "Balance-randomness tradeoff G(j)";
    return std::string(id);
}

std::string ordinal(std::size_t i) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%02zu", i + 1);
    return buf;
}

}  // namespace

int cmd_sequence(const SequenceRequest& req, std::ostream& out) {
    const auto sr = simulate_one(req.cfg, req.n, 1, req.seed, {1});
    const auto path = sr.path(0);
    print_sequence_table(out, sr.label(), path, sr.arms());
    if (req.output_dir) {
        prepare_dir(*req.output_dir);
        if (req.format == OutputFormat::Json) {
            auto j = to_json(path);
            j["procedure"] = sr.label();
            j["seed"] = req.seed;
            write_file(*req.output_dir / "sequence.json", j.dump(2) + "\n");
        } else {
            auto a = open_output(*req.output_dir / "sequence_assignments.csv");
            write_assignments_csv(a, path, sr.arms());
            auto p = open_output(*req.output_dir / "sequence_probabilities.csv");
            write_probabilities_csv(p, path, sr.arms());
        }
    }
    return kExitOk;
}

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.procedures.empty()) throw ConfigError("procedures", "at least one procedure is required");
    if (cfg.metrics.empty()) throw ConfigError("metrics", "at least one metric is required");
    for (const auto& m : cfg.metrics) {
        if (!is_metric_id(m)) throw ConfigError("metrics", "unknown metric '" + m + "'");
    }

    const auto results = simulate(cfg.procedures, cfg.n, cfg.nsim, cfg.seed, {cfg.threads});

    bool violated = false;
    for (const auto& sr : results) {
        for (const auto& msg : check_invariants(sr)) {
            err << "invariant violation: " << msg << '\n';
            violated = true;
        }
    }

    prepare_dir(cfg.output_dir);
    const bool json = cfg.format == OutputFormat::Json;
    const std::string ext = json ? ".json" : ".csv";
    std::vector<std::string> written;
    auto emit = [&](const std::string& name, const std::string& content) {
        write_file(cfg.output_dir / name, content);
        written.push_back(name);
    };

    std::vector<std::pair<std::string, std::vector<MetricSeries>>> summaries;
    for (const auto& id : cfg.metrics) {
        if (id == "final_imb") {
            std::vector<FinalImbalanceSample> all;
            for (const auto& sr : results) {
                auto s = calc_final_imb(sr);
                all.insert(all.end(), s.begin(), s.end());
            }
            std::ostringstream os;
            if (json) os << to_json(std::span<const FinalImbalanceSample>(all)).dump(2) << '\n';
            else write_final_imb_csv(os, all);
            emit("final_imb" + ext, os.str());
            if (cfg.emit_plots) emit("final_imb_violin.svg", svg_violin("Final imbalance", all));
            continue;
        }
        if (id == "arp") {
            std::vector<ArpTable> tables;
            for (const auto& sr : results) tables.push_back(eval_arp(sr));
            std::ostringstream os;
            if (json) {
                nlohmann::json arr = nlohmann::json::array();
                for (const auto& t : tables) arr.push_back(to_json(t));
                os << arr.dump(2) << '\n';
            } else {
                write_arp_csv(os, tables);
            }
            emit("arp" + ext, os.str());
            if (cfg.emit_plots) {
                for (std::size_t i = 0; i < tables.size(); ++i) {
                    emit("arp_" + ordinal(i) + ".svg", svg_arp_plot(tables[i]));
                }
            }
            for (const auto& t : tables) {
                const auto [dev, se] = t.max_deviation();
                out << "arp  " << t.label << ": max |pi - rho| = " << format_double(dev) << " (se "
                    << format_double(se) << ")" << (t.any_flagged() ? "  [> 3 se]" : "") << '\n';
            }
            continue;
        }

        std::vector<MetricSeries> series;
        if (id == "brt") {
            series = calc_brt(results, cfg.brt_normalization);
        } else {
            for (const auto& sr : results) series.push_back(calc_metric(sr, id));
        }
        std::ostringstream os;
        if (json) {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& s : series) arr.push_back(to_json(s));
            os << arr.dump(2) << '\n';
        } else {
            write_series_csv(os, series);
        }
        emit(id + ext, os.str());
        if (cfg.emit_plots) {
            emit(id + ".svg", svg_line_plot(metric_title(id), id, series));
            if (id == "brt") emit("brt_heatmap.svg", svg_heatmap(metric_title(id), series));
        }
        summaries.emplace_back(id, std::move(series));
    }

    nlohmann::json meta{
        {"n", cfg.n},
        {"nsim", cfg.nsim},
        {"seed", cfg.seed},
        {"metrics", cfg.metrics},
        {"target", cfg.procedures.front().target.weights},
        {"brt_normalization", cfg.brt_normalization == BrtNormalization::MinMax ? "minmax" : "absolute"},
        {"forcing_index",
         "1:1 two-arm targets use FI(j) = (2/j) sum E|phi_i - 1/2|; other targets use the raw Euclidean "
         "(1/j) sum E|phi_i - rho| (fi) and its value divided by max_k |e_k - rho| (fi_normalized)"},
        {"invariants_passed", !violated},
    };
    nlohmann::json procs = nlohmann::json::array();
    for (const auto& sr : results) procs.push_back(sr.label());
    meta["procedures"] = std::move(procs);
    meta["files"] = written;
    write_file(cfg.output_dir / "run_meta.json", meta.dump(2) + "\n");

    // Console summary: value at the last step per metric, and the G(n) ranking.
    for (const auto& [id, series] : summaries) {
        out << id << " at j = " << cfg.n << ":\n";
        std::vector<const MetricSeries*> order;
        for (const auto& s : series) order.push_back(&s);
        if (id == "brt") {
            std::stable_sort(order.begin(), order.end(),
                             [](auto* a, auto* b) { return a->estimate.back() < b->estimate.back(); });
        }
        for (const auto* s : order) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "  %-18s %.6g", s->label.c_str(), s->estimate.back());
            out << buf;
            if (s->has_se()) {
                std::snprintf(buf, sizeof buf, "  (se %.3g)", s->se.back());
                out << buf;
            }
            out << '\n';
        }
    }
    out << "wrote " << written.size() + 1 << " files to " << cfg.output_dir.string() << '\n';
    if (violated) err << "invariant checks failed\n";
    return violated ? kExitValidationFailure : kExitOk;
}

int cmd_validate(const ValidateRequest& req, std::ostream& out) {
    const int limit = oracle_step_limit(req.cfg.arms());
    if (req.n > limit) {
        throw UnsupportedInstance("unsupported: the exact oracle handles n <= " + std::to_string(limit) + " for K = " +
                                  std::to_string(req.cfg.arms()) + " (requested n = " + std::to_string(req.n) + ")");
    }
    const auto exact = exact_distribution(req.cfg, req.n);
    const auto sr = simulate_one(req.cfg, req.n, req.nsim, req.seed, {req.threads});
    const auto report = compare(sr, exact, kComparedMetrics, req.z_limit);
    const auto j = to_json(report);
    out << j.dump(2) << '\n';
    if (req.output_dir) {
        prepare_dir(*req.output_dir);
        write_file(*req.output_dir / "validate.json", j.dump(2) + "\n");
    }
    return report.passed() ? kExitOk : kExitValidationFailure;
}

}  // namespace randomkit
