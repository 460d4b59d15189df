// Acceptance checks: one PASS/FAIL line per criterion, details indented
// below it. Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "randomkit/config.hpp"
#include "randomkit/engine.hpp"
#include "randomkit/metrics.hpp"
#include "randomkit/oracle.hpp"
#include "randomkit/report.hpp"
#include "randomkit/workflows.hpp"

namespace rk = randomkit;
namespace fs = std::filesystem;
using rk::ProcedureKind;

namespace {

const fs::path kConfigDir = RANDOMKIT_CONFIG_DIR;

std::string vformat(const char* fmt, va_list args) {
    char buf[512];
    std::vsnprintf(buf, sizeof buf, fmt, args);
    return buf;
}

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    __attribute__((format(printf, 2, 3))) void note(const char* fmt, ...) {
        va_list args;
        va_start(args, fmt);
        notes.push_back(vformat(fmt, args));
        va_end(args);
    }
    __attribute__((format(printf, 3, 4))) void require(bool ok, const char* fmt, ...) {
        if (!ok) pass = false;
        va_list args;
        va_start(args, fmt);
        notes.push_back(std::string(ok ? "ok   " : "FAIL ") + vformat(fmt, args));
        va_end(args);
    }
};

const rk::AllocationTarget k11 = rk::normalize_target({1, 1});
const rk::AllocationTarget k4321 = rk::normalize_target({4, 3, 2, 1});

int max_threads() { return std::max(4, static_cast<int>(std::thread::hardware_concurrency())); }

double last(const rk::MetricSeries& s) { return s.estimate.back(); }

// 1. Simulation agrees with the exact oracle for every two-arm Markov design.
Outcome oracle_equivalence() {
    Outcome o;
    const int n = 10, nsim = 100'000;
    const std::vector<rk::ProcedureConfig> cfgs{
        rk::make_config(ProcedureKind::CRD, k11),
        rk::make_config(ProcedureKind::RAND, k11, {}, n),
        rk::make_config(ProcedureKind::TMD, k11, {}, n),
        rk::make_config(ProcedureKind::PBD, k11, {.b = 1}),
        rk::make_config(ProcedureKind::PBD, k11, {.b = 2}),
        rk::make_config(ProcedureKind::BUD, k11, {.lambda = 2}),
        rk::make_config(ProcedureKind::BSD, k11, {.b = 3}),
        rk::make_config(ProcedureKind::BCDWIT, k11, {.b = 3, .p = 2.0 / 3}),
        rk::make_config(ProcedureKind::EUD, k11, {.b = 2}),
        rk::make_config(ProcedureKind::EBCD, k11, {.p = 2.0 / 3}),
        rk::make_config(ProcedureKind::ABCD, k11, {.a = 2}),
        rk::make_config(ProcedureKind::GBCD, k11, {.gamma = 2}),
        rk::make_config(ProcedureKind::BBCD, k11, {.gamma = 1}),
    };
    const auto start = std::chrono::steady_clock::now();
    const auto results = rk::simulate(cfgs, n, nsim, rk::kDefaultSeed);
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
        const auto report = rk::compare(results[i], rk::exact_distribution(cfgs[i], n));
        const auto& w = report.worst();
        o.require(report.passed(), "%-14s %3zu checks, worst |z| = %.2f (%s, j = %d)", report.label.c_str(),
                  report.entries.size(), std::abs(w.z), w.metric.c_str(), w.step);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.note("runtime %.1f s (target < 120 s)", secs);
    o.require(secs < 120.0, "runtime under 2 minutes");
    return o;
}

// 2. Structural invariants at n = 40, nsim = 10^4.
Outcome hard_invariants() {
    Outcome o;
    const int n = 40, nsim = 10'000;
    const std::vector<rk::ProcedureConfig> cfgs{
        rk::make_config(ProcedureKind::BSD, k11, {.b = 3}),
        rk::make_config(ProcedureKind::BCDWIT, k11, {.b = 3, .p = 2.0 / 3}),
        rk::make_config(ProcedureKind::EUD, k11, {.b = 2}),
        rk::make_config(ProcedureKind::RAND, k11, {}, n),
        rk::make_config(ProcedureKind::TMD, k11, {}, n),
        rk::make_config(ProcedureKind::PBD, k11, {.b = 1}),
        rk::make_config(ProcedureKind::PBD, k11, {.b = 2}),
        rk::make_config(ProcedureKind::CRD, k11),
        rk::make_config(ProcedureKind::BUD, k11, {.lambda = 2}),
        rk::make_config(ProcedureKind::EBCD, k11, {.p = 2.0 / 3}),
        rk::make_config(ProcedureKind::ABCD, k11, {.a = 2}),
        rk::make_config(ProcedureKind::GBCD, k11, {.gamma = 2}),
        rk::make_config(ProcedureKind::BBCD, k11, {.gamma = 0.05}),
    };
    const std::vector<rk::ProcedureConfig> multi{
        rk::make_config(ProcedureKind::RAND, k4321, {}, n),
        rk::make_config(ProcedureKind::TMD, k4321, {}, n),
        rk::make_config(ProcedureKind::PBD, k4321, {.b = 1}),
        rk::make_config(ProcedureKind::CRD, k4321),
        rk::make_config(ProcedureKind::BUD, k4321, {.lambda = 2}),
        rk::make_config(ProcedureKind::MWUD, k4321, {.alpha = 2}),
        rk::make_config(ProcedureKind::DLUD, k4321, {.a = 2}),
        rk::make_config(ProcedureKind::DBCD, k4321, {.gamma = 2}),
        rk::make_config(ProcedureKind::MAXENT, k4321, {.eta = 0.5}),
    };
    for (const auto* set : {&cfgs, &multi}) {
        for (const auto& sr : rk::simulate(*set, n, nsim, rk::kDefaultSeed)) {
            const auto problems = rk::check_invariants(sr);
            o.require(problems.empty(), "%-16s %s", sr.label().c_str(),
                      problems.empty() ? "rows sum to 1, MTI / caps / blocks as designed" : problems.front().c_str());
            if (sr.cfg.kind == ProcedureKind::CRD) {
                const auto fi = rk::calc_fi(sr);
                const bool zero = std::all_of(fi.estimate.begin(), fi.estimate.end(), [](double x) { return x == 0.0; });
                o.require(zero, "%-16s FI(j) == 0 for all j", sr.label().c_str());
            }
        }
    }
    return o;
}

std::vector<rk::SimulationResult> simulate_config(const rk::RunConfig& cfg) {
    return rk::simulate(cfg.procedures, cfg.n, cfg.nsim, cfg.seed);
}

// 3. Seven 1:1 designs: BSD(3) has the smallest G(40); CRD the largest L(40) and zero FI.
Outcome figure2() {
    Outcome o;
    const auto cfg = rk::load_config(kConfigDir / "two_arm_designs.json");
    const auto results = simulate_config(cfg);
    const auto g = rk::calc_brt(results);
    std::size_t best = 0, worst_loss = 0;
    std::vector<double> loss;
    for (std::size_t i = 0; i < results.size(); ++i) {
        loss.push_back(last(rk::calc_cummean_loss(results[i])));
        const double fi = last(rk::calc_fi(results[i]));
        o.note("%-10s G(40) = %.4f (se %.4f)  L(40) = %.4f  FI(40) = %.4f", results[i].label().c_str(), last(g[i]),
               g[i].se.back(), loss.back(), fi);
        if (last(g[i]) < last(g[best])) best = i;
        if (loss[i] > loss[worst_loss]) worst_loss = i;
    }
    o.require(results[best].label() == "BSD(3)", "smallest G(40): %s", results[best].label().c_str());
    o.require(results[worst_loss].label() == "CRD", "largest L(40): %s", results[worst_loss].label().c_str());
    const auto crd_fi = rk::calc_fi(results[0]);
    o.require(results[0].label() == "CRD" &&
                  std::all_of(crd_fi.estimate.begin(), crd_fi.estimate.end(), [](double x) { return x == 0.0; }),
              "CRD FI(j) == 0 for all j");
    return o;
}

// 4. BBCD: gamma = 0.05 minimises G(40) for at least 9 of 10 seeds.
Outcome figure3() {
    Outcome o;
    auto cfg = rk::load_config(kConfigDir / "bbcd_gamma.json");
    int wins = 0;
    for (int s = 0; s < 10; ++s) {
        cfg.seed = rk::kDefaultSeed + static_cast<std::uint64_t>(s);
        const auto g = rk::calc_brt(simulate_config(cfg));
        std::size_t best = 0;
        std::string line;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (last(g[i]) < last(g[best])) best = i;
            char buf[64];
            std::snprintf(buf, sizeof buf, " %.4f", last(g[i]));
            line += buf;
        }
        const bool win = g[best].label == "BBCD(0.05)";
        wins += win;
        o.note("seed %llu: G(40) =%s -> %s", static_cast<unsigned long long>(cfg.seed), line.c_str(),
               g[best].label.c_str());
    }
    o.require(wins >= 9, "gamma = 0.05 minimal for %d of 10 seeds (need 9)", wins);
    return o;
}

// 5. DBCD: max |pi - rho| grows with gamma.
Outcome figure45() {
    Outcome o;
    const auto cfg = rk::load_config(kConfigDir / "dbcd_gamma.json");
    std::vector<std::pair<double, double>> dev;
    std::vector<std::string> labels;
    for (const auto& sr : simulate_config(cfg)) {
        const auto t = rk::eval_arp(sr);
        dev.push_back(t.max_deviation());
        labels.push_back(sr.label());
        o.note("%-12s max |pi - rho| = %.5f (se %.5f)%s", sr.label().c_str(), dev.back().first, dev.back().second,
               t.any_flagged() ? "  flagged" : "");
    }
    int held = 0;
    for (std::size_t i = 0; i + 1 < dev.size(); ++i) {
        const double tol = 2.0 * std::hypot(dev[i].second, dev[i + 1].second);
        const bool ok = dev[i + 1].first >= dev[i].first - tol;
        held += ok;
        o.note("%s <= %s: %s", labels[i].c_str(), labels[i + 1].c_str(), ok ? "holds" : "violated");
    }
    o.require(held == 4, "%d of 4 adjacent comparisons hold at 2 se", held);
    return o;
}

// 6. CRD exactly ARP; RAND and PBD within 3 se for 1:1 and 4:3:2:1.
Outcome arp_checks() {
    Outcome o;
    const int n = 40, nsim = 10'000;
    for (const auto& t : {k11, k4321}) {
        const std::vector<rk::ProcedureConfig> cfgs{
            rk::make_config(ProcedureKind::CRD, t),
            rk::make_config(ProcedureKind::RAND, t, {}, n),
            rk::make_config(ProcedureKind::PBD, t, {.b = 1}),
            rk::make_config(ProcedureKind::PBD, t, {.b = 2}),
        };
        for (const auto& sr : rk::simulate(cfgs, n, nsim, rk::kDefaultSeed)) {
            const auto table = rk::eval_arp(sr);
            const auto [dev, se] = table.max_deviation();
            const std::string tag = sr.label() + (t.arms() == 2 ? " 1:1" : " 4:3:2:1");
            if (sr.cfg.kind == ProcedureKind::CRD) {
                const bool exact = dev == 0.0 && std::all_of(table.se.begin(), table.se.end(), [](double s) { return s == 0.0; });
                o.require(exact, "%-16s pi == rho exactly, se = 0", tag.c_str());
            } else {
                int flagged = 0;
                for (bool f : table.flagged) flagged += f;
                o.require(flagged == 0, "%-16s %d of %d cells beyond 3 se (max |pi - rho| = %.4f)", tag.c_str(), flagged,
                          table.steps * table.arms, dev);
            }
        }
    }
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// 7. Byte-identical outputs at 1 thread and at max threads.
Outcome determinism() {
    Outcome o;
    const auto base = fs::temp_directory_path() / "randomkit_acceptance_determinism";
    fs::remove_all(base);
    for (const char* name : {"two_arm_designs.json", "multi_arm_designs.json"}) {
        auto cfg = rk::load_config(kConfigDir / name);
        cfg.metrics.assign(std::begin(rk::kMetricIds), std::end(rk::kMetricIds));
        cfg.emit_plots = true;
        std::vector<fs::path> dirs;
        for (int threads : {1, max_threads()}) {
            cfg.threads = threads;
            cfg.output_dir = base / (std::string(name) + "_" + std::to_string(threads));
            std::ostringstream out, err;
            rk::cmd_run(cfg, out, err);
            dirs.push_back(cfg.output_dir);
        }
        int files = 0, same = 0;
        for (const auto& entry : fs::directory_iterator(dirs[0])) {
            const auto file = entry.path().filename();
            ++files;
            same += fs::exists(dirs[1] / file) && slurp(dirs[0] / file) == slurp(dirs[1] / file);
        }
        int other = 0;
        for ([[maybe_unused]] const auto& entry : fs::directory_iterator(dirs[1])) ++other;
        o.require(files > 0 && same == files && other == files, "%s: %d of %d files identical (1 vs %d threads)", name,
                  same, files, max_threads());
    }
    fs::remove_all(base);
    return o;
}

// 8. The multi-arm scenario (seven designs plus MaxEnt) in under a minute.
Outcome performance() {
    Outcome o;
    auto cfg = rk::load_config(kConfigDir / "multi_arm_designs.json");
    cfg.output_dir = fs::temp_directory_path() / "randomkit_acceptance_performance";
    cfg.metrics.assign(std::begin(rk::kMetricIds), std::end(rk::kMetricIds));
    std::ostringstream out, err;
    const auto start = std::chrono::steady_clock::now();
    const int code = rk::cmd_run(cfg, out, err);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    fs::remove_all(cfg.output_dir);
    std::string names;
    for (const auto& p : cfg.procedures) names += " " + rk::label(p);
    o.note("procedures:%s", names.c_str());
    o.note("n = %d, nsim = %d, threads = %d, all metrics and plots", cfg.n, cfg.nsim, rk::resolve_thread_count(0));
    o.require(code == rk::kExitOk, "run completed with all invariant checks passing");
    o.require(secs < 60.0, "wall time %.1f s (limit 60 s)", secs);
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"1 oracle equivalence (13 two-arm designs, n = 10, nsim = 1e5, |z| <= 4)", oracle_equivalence},
        {"2 hard invariants (n = 40, nsim = 1e4)", hard_invariants},
        {"3 seven 1:1 designs: BSD(3) smallest G(40); CRD largest L(40), FI = 0", figure2},
        {"4 BBCD: gamma = 0.05 minimal G(40) in >= 9 of 10 seeds", figure3},
        {"5 DBCD: max |pi - rho| non-decreasing in gamma (4 of 4 at 2 se)", figure45},
        {"6 ARP: CRD exact; RAND, PBD within 3 se (1:1 and 4:3:2:1)", arp_checks},
        {"7 byte-identical CSVs at 1 thread and max threads", determinism},
        {"8 multi-arm scenario under 60 s", performance},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o.pass = false;
            o.notes.push_back(std::string("exception: ") + e.what());
        }
        std::printf("%s  %s\n", o.pass ? "PASS" : "FAIL", name);
        for (const auto& line : o.notes) std::printf("      %s\n", line.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
