#include "randomkit/target.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace randomkit {

double AllocationTarget::total_weight() const {
    return std::accumulate(weights.begin(), weights.end(), 0.0);
}

bool AllocationTarget::integral() const {
    return std::all_of(weights.begin(), weights.end(),
                       [](double w) { return w == std::floor(w); });
}

bool AllocationTarget::two_arm_equal() const {
    return rho.size() == 2 && rho[0] == 0.5 && rho[1] == 0.5;
}

AllocationTarget normalize_target(std::span<const double> weights) {
    if (weights.size() < 2) {
        throw std::invalid_argument("allocation target needs at least two weights, got " +
                                    std::to_string(weights.size()));
    }
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (!(weights[k] > 0.0) || !std::isfinite(weights[k])) {
            throw std::invalid_argument("weight w[" + std::to_string(k + 1) +
                                        "] must be a positive finite number");
        }
    }
    AllocationTarget t;
    t.weights.assign(weights.begin(), weights.end());
    const double total = t.total_weight();
    t.rho.reserve(weights.size());
    for (double w : weights) t.rho.push_back(w / total);
    return t;
}

AllocationTarget normalize_target(std::initializer_list<double> weights) {
    return normalize_target(std::span<const double>(weights.begin(), weights.size()));
}

std::vector<int> target_caps(const AllocationTarget& target, int n) {
    if (n < 1) throw std::invalid_argument("sample size must be positive");
    const auto K = target.rho.size();
    std::vector<int> caps(K);
    std::vector<double> frac(K);
    int assigned = 0;
    const double total = target.total_weight();
    for (std::size_t k = 0; k < K; ++k) {
        // n * w_k / W is exact whenever the true quotient is an integer
        const double exact = n * target.weights[k] / total;
        caps[k] = static_cast<int>(std::floor(exact));
        frac[k] = exact - caps[k];
        assigned += caps[k];
    }
    std::vector<std::size_t> order(K);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return frac[x] > frac[y]; });
    for (std::size_t i = 0; assigned < n; ++i, ++assigned) caps[order[i % K]] += 1;
    return caps;
}

}  // namespace randomkit
