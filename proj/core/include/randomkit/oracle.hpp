#pragma once

// Exact reference values for small instances.
//
// exact_distribution runs a forward pass over allocation states: the mass of
// each state splits into its successors by the procedure's rule. States are
// count vectors N(j); DLUD also carries the number of immigration events so
// far, which together with N fixes the urn. The DLUD immigration series is
// cut at the same 1e-12 residual the simulator uses, so its tables are exact
// up to that truncation.
//
// Size limits: n <= 20 for K = 2, n <= 12 for K = 3, n <= 10 for K >= 4.
// enumerate_paths additionally needs K^n <= 1e6.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "randomkit/engine.hpp"
#include "randomkit/metrics.hpp"

namespace randomkit {

class UnsupportedInstance : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using CountTable = std::map<std::vector<int>, double>;

struct ExactDistribution {
    ProcedureConfig cfg;
    int n = 0;
    /// tables[j]: probability of each count vector after j steps, j = 0..n.
    std::vector<CountTable> tables;

    // Per-step series (index j-1 is step j), defined as in metrics.hpp.
    std::vector<double> expected_abs_imb;
    std::vector<double> variance_of_imb;
    std::vector<double> mean_distance;         // E d(j)
    std::vector<double> mean_sq_distance;      // E d^2(j)
    std::vector<double> cummean_loss;
    std::vector<double> cummean_epcg_c;
    std::vector<double> cummean_epcg_mp;
    std::vector<double> cummean_pda;
    std::vector<double> fi;
    std::vector<double> fi_normalized;
    std::vector<double> pi;  // n x K, row-major

    double pi_at(int step, int arm) const { return pi[static_cast<std::size_t>(step * cfg.arms() + arm)]; }

    /// Series by metric identifier (see kMetricIds); throws for "arp",
    /// "final_imb", "brt" and "expected_max_abs_imb".
    const std::vector<double>& series(std::string_view metric) const;
};

/// Largest n the oracle accepts for K arms.
int oracle_step_limit(int arms);

ExactDistribution exact_distribution(const ProcedureConfig& cfg, int n);

struct WeightedPath {
    std::vector<int> arms;  // 0-based
    double probability = 0.0;
};

/// Every positive-probability assignment sequence of length n.
std::vector<WeightedPath> enumerate_paths(const ProcedureConfig& cfg, int n);

/// E max_{i<=j} |imbalance(i)| for j = 1..n from full enumeration.
std::vector<double> exact_expected_max_abs_imb(const ProcedureConfig& cfg, int n);

struct ComparisonEntry {
    std::string metric;
    int step = 0;   // 1-based
    int arm = 0;    // 1-based for "arp", 0 otherwise
    double estimate = 0.0;
    double se = 0.0;
    double exact = 0.0;
    double z = 0.0;  // infinite when se = 0 and the values differ
};

struct ComparisonReport {
    std::string label;
    int n = 0;
    int nsim = 0;
    std::uint64_t seed = 0;
    double z_limit = 4.0;
    std::vector<ComparisonEntry> entries;

    bool passed() const;
    /// Entry with the largest |z|.
    const ComparisonEntry& worst() const;
    std::vector<ComparisonEntry> failures() const;
};

/// Metrics checked by compare().
inline constexpr std::string_view kComparedMetrics[] = {
    "expected_abs_imb", "variance_of_imb", "cummean_epcg_c", "cummean_epcg_mp",
    "cummean_pda",      "fi",              "arp",
};

/// z-scores (estimate - exact) / se for every compared metric and step.
/// Values within 1e-9 of each other count as agreeing (z = 0); otherwise a
/// zero se gives an infinite z. Throws
/// std::invalid_argument when the result and the distribution describe
/// different designs or sample sizes.
ComparisonReport compare(const SimulationResult& sr, const ExactDistribution& exact,
                         std::span<const std::string_view> metrics = kComparedMetrics,
                         double z_limit = 4.0);

}  // namespace randomkit
