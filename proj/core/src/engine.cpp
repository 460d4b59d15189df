#include "randomkit/engine.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "randomkit/rules.hpp"

namespace randomkit {

TrialPath SimulationResult::path(int replicate) const {
    TrialPath p;
    p.assignments.reserve(static_cast<std::size_t>(n));
    p.probs.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        p.assignments.push_back(arm(replicate, j));
        auto row = phi(replicate, j);
        p.probs.emplace_back(row.begin(), row.end());
    }
    return p;
}

int draw_arm(std::span<const double> phi, double u) {
    int last = 0;
    for (std::size_t k = 0; k < phi.size(); ++k) {
        if (phi[k] > 0.0) last = static_cast<int>(k);
    }
    double cumulative = 0.0;
    for (int k = 0; k < last; ++k) {
        cumulative += phi[static_cast<std::size_t>(k)];
        if (u < cumulative) return k;
    }
    return last;
}

void run_replicate(const ProcedureConfig& cfg, int n, Stream& stream, std::span<std::uint8_t> arms,
                   std::span<double> probs) {
    const auto K = static_cast<std::size_t>(cfg.arms());
    const bool urn_model = cfg.kind == ProcedureKind::DLUD;
    ProcedureState state = initial_state(cfg);
    for (int j = 0; j < n; ++j) {
        auto row = probs.subspan(static_cast<std::size_t>(j) * K, K);
        probabilities(cfg, state, row);
        const int arm = draw_arm(row, stream.uniform());
        int immigrations = 0;
        if (urn_model) immigrations = rules::dlud_sample_immigrations(cfg, state, arm, stream.uniform());
        arms[static_cast<std::size_t>(j)] = static_cast<std::uint8_t>(arm);
        state = advance_state(std::move(state), arm, cfg, immigrations);
    }
}

int resolve_thread_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("RANDOMKIT_THREADS")) {
        char* end = nullptr;
        const long value = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && value > 0) return static_cast<int>(value);
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::vector<SimulationResult> simulate(std::span<const ProcedureConfig> cfgs, int n, int nsim,
                                       std::uint64_t seed, const SimulateOptions& options) {
    if (n < 1) throw std::invalid_argument("sample size n must be >= 1");
    if (nsim < 1) throw std::invalid_argument("nsim must be >= 1");

    std::vector<SimulationResult> results;
    results.reserve(cfgs.size());
    for (const auto& cfg : cfgs) {
        validate(cfg);
        if (!cfg.caps.empty() && cfg.n != n) {
            throw std::invalid_argument(label(cfg) + ": planned sample size " + std::to_string(cfg.n) +
                                        " differs from the simulated n = " + std::to_string(n));
        }
        const std::size_t cells = static_cast<std::size_t>(nsim) * n * cfg.arms();
        if (cells > kMaxProbabilityCells) {
            throw std::length_error("nsim * n * K = " + std::to_string(cells) + " exceeds the limit of " +
                                    std::to_string(kMaxProbabilityCells) +
                                    " probability cells; lower nsim or split the run over seeds");
        }
        SimulationResult r;
        r.cfg = cfg;
        r.n = n;
        r.nsim = nsim;
        r.seed = seed;
        r.assignments.resize(static_cast<std::size_t>(nsim) * n);
        r.probs.resize(cells);
        results.push_back(std::move(r));
    }

    const std::size_t total = results.size() * static_cast<std::size_t>(nsim);
    constexpr std::size_t kChunk = 256;
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        try {
            for (;;) {
                const std::size_t begin = next.fetch_add(kChunk);
                if (begin >= total) return;
                const std::size_t end = std::min(total, begin + kChunk);
                for (std::size_t task = begin; task < end; ++task) {
                    const std::size_t c = task / static_cast<std::size_t>(nsim);
                    const std::size_t r = task % static_cast<std::size_t>(nsim);
                    auto& res = results[c];
                    const auto K = static_cast<std::size_t>(res.arms());
                    Stream stream = child_stream(seed, c, r);
                    run_replicate(res.cfg, n, stream,
                                  std::span(res.assignments).subspan(r * n, static_cast<std::size_t>(n)),
                                  std::span(res.probs).subspan(r * n * K, static_cast<std::size_t>(n) * K));
                }
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next.store(total);
        }
    };

    const int threads = std::min<int>(resolve_thread_count(options.threads),
                                      static_cast<int>((total + kChunk - 1) / kChunk));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

SimulationResult simulate_one(const ProcedureConfig& cfg, int n, int nsim, std::uint64_t seed,
                              const SimulateOptions& options) {
    return std::move(simulate(std::span(&cfg, 1), n, nsim, seed, options).front());
}

std::vector<std::string> check_invariants(const SimulationResult& sr, std::size_t limit) {
    std::vector<std::string> problems;
    auto report = [&](int r, int j, const std::string& what) {
        if (problems.size() < limit) {
            problems.push_back(sr.label() + " replicate " + std::to_string(r + 1) +
                               (j >= 0 ? " step " + std::to_string(j + 1) : std::string()) + ": " + what);
        }
    };
    const auto& cfg = sr.cfg;
    const auto K = static_cast<std::size_t>(sr.arms());
    const int mti = (cfg.kind == ProcedureKind::BSD || cfg.kind == ProcedureKind::BCDWIT ||
                     cfg.kind == ProcedureKind::EUD)
                        ? cfg.params.b
                        : 0;
    const int block = cfg.kind == ProcedureKind::PBD
                          ? cfg.params.b * static_cast<int>(cfg.target.total_weight())
                          : 0;
    std::vector<int> counts(K);
    for (int r = 0; r < sr.nsim; ++r) {
        std::fill(counts.begin(), counts.end(), 0);
        for (int j = 0; j < sr.n; ++j) {
            const auto phi = sr.phi(r, j);
            double sum = 0.0;
            for (double x : phi) {
                if (!(x >= 0.0 && x <= 1.0)) report(r, j, "probability outside [0, 1]");
                sum += x;
            }
            if (std::abs(sum - 1.0) > kProbabilityTolerance) report(r, j, "probabilities sum to " + std::to_string(sum));
            const int arm = sr.arm(r, j);
            if (arm < 0 || static_cast<std::size_t>(arm) >= K || !(phi[static_cast<std::size_t>(arm)] > 0.0)) {
                report(r, j, "drawn arm has zero probability");
                continue;
            }
            counts[static_cast<std::size_t>(arm)] += 1;
            if (mti > 0 && std::abs(counts[0] - counts[1]) > mti) report(r, j, "imbalance exceeds the MTI bound");
            if (block > 0 && (j + 1) % block == 0) {
                const int blocks = (j + 1) / block;
                for (std::size_t k = 0; k < K; ++k) {
                    if (counts[k] != blocks * cfg.params.b * static_cast<int>(cfg.target.weights[k])) {
                        report(r, j, "block is not balanced");
                        break;
                    }
                }
            }
        }
        if (!cfg.caps.empty() && counts != cfg.caps) report(r, -1, "final counts differ from the caps");
    }
    return problems;
}

}  // namespace randomkit
