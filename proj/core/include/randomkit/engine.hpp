#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "randomkit/procedure.hpp"
#include "randomkit/rng.hpp"

namespace randomkit {

/// nsim replicates of one procedure. Assignments are stored as 0-based arm
/// indices (replicate-major, n per replicate); probabilities as the recorded
/// phi rows (replicate-major, n x K per replicate).
struct SimulationResult {
    ProcedureConfig cfg;
    int n = 0;
    int nsim = 0;
    std::uint64_t seed = kDefaultSeed;
    std::vector<std::uint8_t> assignments;
    std::vector<double> probs;

    int arms() const { return cfg.arms(); }
    std::string label() const { return randomkit::label(cfg); }

    int arm(int replicate, int step) const {
        return assignments[static_cast<std::size_t>(replicate) * n + step];
    }
    /// phi row used for step `step` (0-based) of `replicate`.
    std::span<const double> phi(int replicate, int step) const {
        const auto K = static_cast<std::size_t>(arms());
        return {probs.data() + (static_cast<std::size_t>(replicate) * n + step) * K, K};
    }
    TrialPath path(int replicate) const;

    friend bool operator==(const SimulationResult&, const SimulationResult&) = default;
};

struct SimulateOptions {
    /// Worker threads; 0 resolves through RANDOMKIT_THREADS, then the
    /// hardware concurrency.
    int threads = 0;
};

/// Upper bound on stored probability cells (nsim * n * K) per procedure,
/// about 2 GiB of doubles.
inline constexpr std::size_t kMaxProbabilityCells = std::size_t{1} << 28;

/// Runs nsim replicates of n allocations for every config. Replicate r of
/// config c draws from child_stream(seed, c, r), so the output does not
/// depend on the thread count.
std::vector<SimulationResult> simulate(std::span<const ProcedureConfig> cfgs, int n, int nsim,
                                       std::uint64_t seed = kDefaultSeed,
                                       const SimulateOptions& options = {});

SimulationResult simulate_one(const ProcedureConfig& cfg, int n, int nsim,
                              std::uint64_t seed = kDefaultSeed, const SimulateOptions& options = {});

/// Inverse-CDF draw from one uniform u in [0, 1). Cumulative sums run left
/// to right; the last arm with positive probability takes the boundary 1.
int draw_arm(std::span<const double> phi, double u);

/// Generates one replicate into the given buffers (sizes n and n * K).
void run_replicate(const ProcedureConfig& cfg, int n, Stream& stream, std::span<std::uint8_t> arms,
                   std::span<double> probs);

int resolve_thread_count(int requested);

/// Structural checks on a finished result: probability rows are valid and
/// give the drawn arm positive mass; RAND/TMD end at their caps; PBD is
/// balanced at every block boundary; BSD, BCDWIT and EUD stay within +-b.
/// Returns one message per violation (at most `limit`).
std::vector<std::string> check_invariants(const SimulationResult& sr, std::size_t limit = 20);

}  // namespace randomkit
