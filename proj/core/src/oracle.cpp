#include "randomkit/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "randomkit/rules.hpp"

namespace randomkit {

namespace {

constexpr double kTieTolerance = 1e-12;
constexpr double kExactAgreement = 1e-9;

struct Transition {
    int arm;
    double probability;
    ProcedureState next;
};

std::vector<Transition> transitions(const ProcedureConfig& cfg, const ProcedureState& state) {
    std::vector<Transition> out;
    if (cfg.kind == ProcedureKind::DLUD) {
        const auto law = rules::dlud_draw_law(cfg, state);
        double total = 0.0;
        for (const auto& term : law) total += term.probability;
        for (const auto& term : law) {
            out.push_back({term.arm, term.probability / total,
                           advance_state(state, term.arm, cfg, term.immigrations)});
        }
        return out;
    }
    const ProbabilityVector phi = probabilities(cfg, state);
    for (int k = 0; k < phi.size(); ++k) {
        if (phi[k] > 0.0) out.push_back({k, phi[k], advance_state(state, k, cfg)});
    }
    return out;
}

std::vector<int> state_key(const ProcedureConfig& cfg, const ProcedureState& s) {
    std::vector<int> key = s.counts;
    if (cfg.kind == ProcedureKind::DLUD) key.push_back(s.immigrations);
    return key;
}

struct Weighted {
    ProcedureState state;
    double probability = 0.0;
};

double imbalance_value(const ProcedureConfig& cfg, const ProcedureState& s) {
    if (cfg.target.two_arm_equal()) return imbalance(s);
    return distance_from_target(s.counts, s.j, cfg.target.rho);
}

// Probability of a correct guess at the next step, given phi and the state.
double guess_hit(const ProcedureConfig& cfg, const ProcedureState& s, std::span<const double> phi,
                 GuessingStrategy strategy) {
    if (strategy == GuessingStrategy::MaximumProbability) return *std::max_element(phi.begin(), phi.end());
    const auto& rho = cfg.target.rho;
    std::vector<double> gap(phi.size());
    for (std::size_t k = 0; k < phi.size(); ++k) gap[k] = s.counts[k] - s.j * rho[k];
    const double lowest = *std::min_element(gap.begin(), gap.end());
    double hit = 0.0;
    int ties = 0;
    for (std::size_t k = 0; k < phi.size(); ++k) {
        if (gap[k] <= lowest + kTieTolerance) {
            hit += phi[k];
            ++ties;
        }
    }
    return hit / ties;
}

void cumulate(std::vector<double>& v) {
    double running = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        running += v[i];
        v[i] = running / double(i + 1);
    }
}

void check_limits(const ProcedureConfig& cfg, int n) {
    validate(cfg);
    if (n < 1) throw std::invalid_argument("oracle needs n >= 1");
    if (!cfg.caps.empty() && cfg.n != n) {
        throw std::invalid_argument(label(cfg) + ": planned sample size differs from n");
    }
    const int limit = oracle_step_limit(cfg.arms());
    if (n > limit) {
        throw UnsupportedInstance("exact computation for " + label(cfg) + " supports n <= " +
                                  std::to_string(limit) + " with K = " + std::to_string(cfg.arms()) +
                                  ", got n = " + std::to_string(n));
    }
}

}  // namespace

int oracle_step_limit(int arms) {
    if (arms <= 2) return 20;
    if (arms == 3) return 12;
    return 10;
}

const std::vector<double>& ExactDistribution::series(std::string_view metric) const {
    if (metric == "expected_abs_imb") return expected_abs_imb;
    if (metric == "variance_of_imb") return variance_of_imb;
    if (metric == "cummean_loss") return cummean_loss;
    if (metric == "cummean_epcg_c") return cummean_epcg_c;
    if (metric == "cummean_epcg_mp") return cummean_epcg_mp;
    if (metric == "cummean_pda") return cummean_pda;
    if (metric == "fi") return fi;
    if (metric == "fi_normalized") return fi_normalized;
    throw std::invalid_argument("no exact series for metric '" + std::string(metric) + "'");
}

ExactDistribution exact_distribution(const ProcedureConfig& cfg, int n) {
    check_limits(cfg, n);
    const auto K = static_cast<std::size_t>(cfg.arms());
    const bool one_to_one = cfg.target.two_arm_equal();
    const auto& rho = cfg.target.rho;
    const double fi_max = max_forcing_distance(rho);

    ExactDistribution ex;
    ex.cfg = cfg;
    ex.n = n;
    const auto steps = static_cast<std::size_t>(n);
    for (auto* v : {&ex.expected_abs_imb, &ex.variance_of_imb, &ex.mean_distance, &ex.mean_sq_distance,
                    &ex.cummean_loss, &ex.cummean_epcg_c, &ex.cummean_epcg_mp, &ex.cummean_pda, &ex.fi,
                    &ex.fi_normalized}) {
        v->assign(steps, 0.0);
    }
    ex.pi.assign(steps * K, 0.0);

    std::map<std::vector<int>, Weighted> current;
    const ProcedureState start = initial_state(cfg);
    current.emplace(state_key(cfg, start), Weighted{start, 1.0});
    auto marginal = [](const std::map<std::vector<int>, Weighted>& states) {
        CountTable table;
        for (const auto& [key, w] : states) table[w.state.counts] += w.probability;
        return table;
    };
    ex.tables.push_back(marginal(current));

    std::vector<double> phi(K);
    for (std::size_t j = 0; j < steps; ++j) {
        std::map<std::vector<int>, Weighted> next;
        for (const auto& [key, w] : current) {
            probabilities(cfg, w.state, phi);
            const double p = w.probability;
            ex.cummean_epcg_c[j] += p * guess_hit(cfg, w.state, phi, GuessingStrategy::Convergence);
            ex.cummean_epcg_mp[j] += p * guess_hit(cfg, w.state, phi, GuessingStrategy::MaximumProbability);
            if (*std::max_element(phi.begin(), phi.end()) >= 1.0 - kProbabilityTolerance) ex.cummean_pda[j] += p;
            double sq = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                sq += (phi[k] - rho[k]) * (phi[k] - rho[k]);
                ex.pi[j * K + k] += p * phi[k];
            }
            const double forcing = one_to_one ? 2.0 * std::abs(phi[0] - 0.5) : std::sqrt(sq);
            ex.fi[j] += p * forcing;
            ex.fi_normalized[j] += p * (one_to_one ? forcing : std::sqrt(sq) / fi_max);

            for (auto& t : transitions(cfg, w.state)) {
                const double mass = p * t.probability;
                if (mass <= 0.0) continue;
                auto [it, inserted] = next.try_emplace(state_key(cfg, t.next), Weighted{t.next, 0.0});
                it->second.probability += mass;
            }
        }
        double mean = 0.0, mean_sq = 0.0;
        for (const auto& [key, w] : next) {
            const double x = imbalance_value(cfg, w.state);
            const double d = distance_from_target(w.state.counts, w.state.j, rho);
            ex.expected_abs_imb[j] += w.probability * std::abs(x);
            ex.mean_distance[j] += w.probability * d;
            ex.mean_sq_distance[j] += w.probability * d * d;
            mean += w.probability * x;
            mean_sq += w.probability * x * x;
        }
        ex.variance_of_imb[j] = one_to_one ? std::max(0.0, mean_sq - mean * mean) : mean_sq;
        current = std::move(next);
        ex.tables.push_back(marginal(current));
    }

    double loss = 0.0;
    for (std::size_t j = 0; j < steps; ++j) {
        loss += ex.variance_of_imb[j] / double(j + 1);
        ex.cummean_loss[j] = loss / double(j + 1);
    }
    cumulate(ex.cummean_epcg_c);
    cumulate(ex.cummean_epcg_mp);
    cumulate(ex.cummean_pda);
    cumulate(ex.fi);
    cumulate(ex.fi_normalized);
    return ex;
}

std::vector<WeightedPath> enumerate_paths(const ProcedureConfig& cfg, int n) {
    check_limits(cfg, n);
    if (std::pow(double(cfg.arms()), double(n)) > 1e6) {
        throw UnsupportedInstance("path enumeration needs K^n <= 1e6, got " + std::to_string(cfg.arms()) +
                                  "^" + std::to_string(n));
    }
    std::vector<WeightedPath> paths;
    std::vector<int> prefix;
    // Each prefix carries the distribution over states consistent with it;
    // only DLUD can hold more than one.
    auto descend = [&](auto&& self, const std::vector<Weighted>& states) -> void {
        if (static_cast<int>(prefix.size()) == n) {
            double total = 0.0;
            for (const auto& w : states) total += w.probability;
            paths.push_back({prefix, total});
            return;
        }
        std::vector<std::map<std::vector<int>, Weighted>> by_arm(static_cast<std::size_t>(cfg.arms()));
        for (const auto& w : states) {
            for (auto& t : transitions(cfg, w.state)) {
                const double mass = w.probability * t.probability;
                if (mass <= 0.0) continue;
                auto& bucket = by_arm[static_cast<std::size_t>(t.arm)];
                auto [it, inserted] = bucket.try_emplace(state_key(cfg, t.next), Weighted{t.next, 0.0});
                it->second.probability += mass;
            }
        }
        for (int k = 0; k < cfg.arms(); ++k) {
            const auto& bucket = by_arm[static_cast<std::size_t>(k)];
            if (bucket.empty()) continue;
            std::vector<Weighted> children;
            children.reserve(bucket.size());
            for (const auto& [key, w] : bucket) children.push_back(w);
            prefix.push_back(k);
            self(self, children);
            prefix.pop_back();
        }
    };
    descend(descend, {Weighted{initial_state(cfg), 1.0}});
    return paths;
}

std::vector<double> exact_expected_max_abs_imb(const ProcedureConfig& cfg, int n) {
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    for (const auto& path : enumerate_paths(cfg, n)) {
        ProcedureState s;
        s.counts.assign(static_cast<std::size_t>(cfg.arms()), 0);
        double top = 0.0;
        for (int j = 0; j < n; ++j) {
            s.counts[static_cast<std::size_t>(path.arms[j])] += 1;
            s.j = j + 1;
            top = std::max(top, std::abs(imbalance_value(cfg, s)));
            out[static_cast<std::size_t>(j)] += path.probability * top;
        }
    }
    return out;
}

bool ComparisonReport::passed() const {
    return std::all_of(entries.begin(), entries.end(),
                       [&](const ComparisonEntry& e) { return std::abs(e.z) <= z_limit; });
}

const ComparisonEntry& ComparisonReport::worst() const {
    if (entries.empty()) throw std::logic_error("empty comparison report");
    return *std::max_element(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        return std::abs(a.z) < std::abs(b.z);
    });
}

std::vector<ComparisonEntry> ComparisonReport::failures() const {
    std::vector<ComparisonEntry> out;
    std::copy_if(entries.begin(), entries.end(), std::back_inserter(out),
                 [&](const ComparisonEntry& e) { return !(std::abs(e.z) <= z_limit); });
    return out;
}

ComparisonReport compare(const SimulationResult& sr, const ExactDistribution& exact,
                         std::span<const std::string_view> metrics, double z_limit) {
    if (!(sr.cfg == exact.cfg)) {
        throw std::invalid_argument("comparison of " + sr.label() + " against the exact distribution of " +
                                    label(exact.cfg));
    }
    if (sr.n != exact.n) {
        throw std::invalid_argument("simulated n = " + std::to_string(sr.n) + " but exact n = " +
                                    std::to_string(exact.n));
    }
    ComparisonReport report;
    report.label = sr.label();
    report.n = sr.n;
    report.nsim = sr.nsim;
    report.seed = sr.seed;
    report.z_limit = z_limit;

    auto score = [](double estimate, double se, double truth) {
        // Differences at rounding level are not sampling error, even when
        // summation noise leaves a tiny nonzero se.
        const double diff = estimate - truth;
        if (std::abs(diff) <= kExactAgreement) return 0.0;
        if (se > 0.0) return diff / se;
        return std::copysign(std::numeric_limits<double>::infinity(), diff);
    };

    for (std::string_view metric : metrics) {
        if (metric == "arp") {
            const ArpTable arp = eval_arp(sr);
            for (int j = 0; j < sr.n; ++j) {
                for (int k = 0; k < sr.arms(); ++k) {
                    const double truth = exact.pi_at(j, k);
                    report.entries.push_back({"arp", j + 1, k + 1, arp.at(j, k), arp.se_at(j, k), truth,
                                              score(arp.at(j, k), arp.se_at(j, k), truth)});
                }
            }
            continue;
        }
        const MetricSeries est = calc_metric(sr, metric);
        const auto& truth = exact.series(metric);
        for (int j = 0; j < sr.n; ++j) {
            const double se = est.has_se() ? est.se[j] : 0.0;
            report.entries.push_back({std::string(metric), j + 1, 0, est.estimate[j], se, truth[j],
                                      score(est.estimate[j], se, truth[j])});
        }
    }
    return report;
}

}  // namespace randomkit
