#pragma once

// Operating characteristics estimated from simulated replicates.
//
// Imbalance is the signed D(j) = N_1 - N_2 for a 1:1 two-arm target and the
// distance d(j) = |N(j) - j rho| otherwise. Every series has one entry per
// step j = 1..n; `se` holds the Monte Carlo standard error and is empty when
// the value has no sampling error to report.

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "randomkit/engine.hpp"

namespace randomkit {

struct MetricSeries {
    std::string metric;
    std::string label;
    std::vector<double> estimate;
    std::vector<double> se;

    int steps() const { return static_cast<int>(estimate.size()); }
    bool has_se() const { return !se.empty(); }
};

struct FinalImbalanceSample {
    std::string label;
    int replicate = 0;
    double value = 0.0;
};

enum class GuessingStrategy {
    Convergence,         // "C": guess the most underrepresented arm
    MaximumProbability,  // "MP": guess the arm with the largest phi
};

/// Accepts "C" and "MP" (case-insensitive). Throws std::invalid_argument.
GuessingStrategy parse_strategy(std::string_view token);

std::vector<FinalImbalanceSample> calc_final_imb(const SimulationResult& sr);
MetricSeries calc_expected_abs_imb(const SimulationResult& sr);
/// Sample variance of D(j) for 1:1 two-arm targets, mean d^2(j) otherwise.
MetricSeries calc_variance_of_imb(const SimulationResult& sr);
MetricSeries calc_expected_max_abs_imb(const SimulationResult& sr);
/// L(j) = (1/j) sum_{i<=j} v(i) / i with v the variance series.
MetricSeries calc_cummean_loss(const SimulationResult& sr);
/// Cumulative average of the per-step probability of a correct guess. Ties
/// in the guess set count 1/|set| each instead of a randomized guess.
MetricSeries calc_cummean_epcg(const SimulationResult& sr, GuessingStrategy strategy);
/// Cumulative share of steps where some arm has phi >= 1 - 1e-12.
MetricSeries calc_cummean_pda(const SimulationResult& sr);

enum class ForcingScale {
    Raw,         // multi-arm: (1/j) sum E|phi_i - rho|
    Normalized,  // multi-arm: raw / FI_max(rho)
};

/// Forcing index. For 1:1 two-arm targets this is always
/// (2/j) sum E|phi_i - 1/2|, which puts a fully deterministic rule at 1.
MetricSeries calc_fi(const SimulationResult& sr, ForcingScale scale = ForcingScale::Raw);

/// max_k |e_k - rho|: the forcing distance of a deterministic assignment.
double max_forcing_distance(std::span<const double> rho);

enum class BrtNormalization {
    Absolute,  // 1:1: G = sqrt(L^2 + FI^2); else U_B = min(L, 1), U_R = FI / FI_max
    MinMax,    // per step, rescale L and FI to [0, 1] across the compared procedures
};

/// Balance-randomness tradeoff G(j) for each result.
std::vector<MetricSeries> calc_brt(std::span<const SimulationResult> results,
                                   BrtNormalization normalization = BrtNormalization::Absolute);
MetricSeries calc_brt(const SimulationResult& sr);

/// Unconditional allocation probabilities pi_jk (n x K, row-major).
struct ArpTable {
    std::string label;
    int steps = 0;
    int arms = 0;
    std::vector<double> rho;
    std::vector<double> pi;
    std::vector<double> se;
    std::vector<bool> flagged;  // |pi - rho| > 3 se

    double at(int step, int arm) const { return pi[static_cast<std::size_t>(step * arms + arm)]; }
    double se_at(int step, int arm) const { return se[static_cast<std::size_t>(step * arms + arm)]; }
    bool any_flagged() const;
    /// max over (j, k) of |pi_jk - rho_k|, and the se at that cell.
    std::pair<double, double> max_deviation() const;
};

ArpTable eval_arp(const SimulationResult& sr);

/// Metric identifiers accepted by the run workflow.
inline constexpr std::string_view kMetricIds[] = {
    "final_imb",       "expected_abs_imb", "variance_of_imb", "expected_max_abs_imb",
    "cummean_loss",    "cummean_epcg_c",   "cummean_epcg_mp", "cummean_pda",
    "fi",              "fi_normalized",    "brt",             "arp",
};

bool is_metric_id(std::string_view id);

/// Series-valued metric by identifier. "final_imb" and "arp" are not series
/// and are rejected here.
MetricSeries calc_metric(const SimulationResult& sr, std::string_view id);

}  // namespace randomkit
