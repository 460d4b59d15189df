#pragma once

#include <span>
#include <vector>

namespace randomkit {

/// Target allocation ratio w_1:...:w_K together with the derived proportions
/// rho_k = w_k / sum(w).
struct AllocationTarget {
    std::vector<double> weights;
    std::vector<double> rho;

    int arms() const { return static_cast<int>(weights.size()); }
    double total_weight() const;

    /// True when every weight is an integer (PBD, BUD and DLUD need this).
    bool integral() const;

    /// K = 2 with rho = (1/2, 1/2): the 1:1 trial where D(j) = N_1 - N_2 is used.
    bool two_arm_equal() const;

    friend bool operator==(const AllocationTarget&, const AllocationTarget&) = default;
};

/// Throws std::invalid_argument for fewer than two weights or any weight <= 0.
AllocationTarget normalize_target(std::span<const double> weights);
AllocationTarget normalize_target(std::initializer_list<double> weights);

/// Per-arm sample sizes n_k for a fixed n: floor(n * rho_k), with the
/// remainder handed out by largest fractional part (ties to the lower arm).
std::vector<int> target_caps(const AllocationTarget& target, int n);

}  // namespace randomkit
