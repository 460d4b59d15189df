#include "randomkit/rules.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace randomkit::rules {

namespace {

// Rows built from closed-form rules must already sum to one; rounding is
// absorbed here, anything larger means an unreachable state or a bug.
void settle(std::span<double> out, const char* rule) {
    double sum = 0.0;
    for (double& x : out) {
        if (x < 0.0) {
            if (x > -kProbabilityTolerance) {
                x = 0.0;
            } else {
                throw std::logic_error(std::string(rule) + ": negative probability (unreachable state)");
            }
        }
        sum += x;
    }
    if (std::abs(sum - 1.0) > kProbabilityTolerance) {
        throw std::logic_error(std::string(rule) + ": probabilities sum to " + std::to_string(sum));
    }
    if (sum != 1.0) {
        for (double& x : out) x /= sum;
    }
}

// Softmax over log-weights; exact zeros stay zero.
void normalize_logs(std::span<double> out) {
    const double top = *std::max_element(out.begin(), out.end());
    double sum = 0.0;
    for (double& x : out) {
        x = std::exp(x - top);
        sum += x;
    }
    for (double& x : out) x /= sum;
}

void two_arm(double phi_e, std::span<double> out) {
    out[0] = phi_e;
    out[1] = 1.0 - phi_e;
}

void copy_rho(const ProcedureConfig& cfg, std::span<double> out) {
    std::copy(cfg.target.rho.begin(), cfg.target.rho.end(), out.begin());
}

int sign(int x) { return (x > 0) - (x < 0); }

}  // namespace

void crd(const ProcedureConfig& cfg, const ProcedureState&, std::span<double> out) {
    copy_rho(cfg, out);
}

void rand(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out) {
    const int remaining = cfg.n - s.j;
    if (remaining <= 0) throw std::out_of_range("RAND: all slots are filled");
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = double(cfg.caps[k] - s.counts[k]) / remaining;
    }
    settle(out, "RAND");
}

void tmd(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out) {
    if (s.j >= cfg.n) throw std::out_of_range("TMD: all slots are filled");
    double open = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (s.counts[k] > cfg.caps[k]) throw std::logic_error("TMD: count exceeds cap");
        if (s.counts[k] < cfg.caps[k]) open += cfg.target.rho[k];
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = s.counts[k] < cfg.caps[k] ? cfg.target.rho[k] / open : 0.0;
    }
}

void pbd(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out) {
    const int b = cfg.params.b;
    const int big_w = static_cast<int>(cfg.target.total_weight());
    const int block = b * big_w;
    const int done = s.j / block;
    const int left = block - (s.j - done * block);
    for (std::size_t k = 0; k < out.size(); ++k) {
        const int quota = b * static_cast<int>(cfg.target.weights[k]);
        const int used = s.counts[k] - done * quota;
        out[k] = double(quota - used) / left;
    }
    settle(out, "PBD");
}

void bud(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out) {
    const int lambda = cfg.params.lambda;
    int sets = std::numeric_limits<int>::max();
    for (std::size_t k = 0; k < out.size(); ++k) {
        sets = std::min(sets, s.counts[k] / static_cast<int>(cfg.target.weights[k]));
    }
    const int big_w = static_cast<int>(cfg.target.total_weight());
    const int balls = big_w * (lambda + sets) - s.j;
    for (std::size_t k = 0; k < out.size(); ++k) {
        const int wk = static_cast<int>(cfg.target.weights[k]);
        out[k] = double(wk * (lambda + sets) - s.counts[k]) / balls;
    }
    settle(out, "BUD");
}

void mwud(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out) {
    const auto& rho = cfg.target.rho;
    const double alpha = cfg.params.alpha;
    double total = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double mass = alpha * rho[k] - s.counts[k] + s.j * rho[k];
        out[k] = std::max(mass, 0.0);
        total += out[k];
    }
    if (!(total > 0.0)) throw std::logic_error("MWUD: urn mass vanished");
    for (double& x : out) x /= total;
}

std::vector<ImmigrationTerm> dlud_draw_law(const ProcedureConfig& cfg, const ProcedureState& s) {
    if (!s.urn) throw std::invalid_argument("DLUD: state has no urn");
    const auto& w = cfg.target.weights;
    const double a = cfg.params.a;
    std::vector<double> urn = *s.urn;
    double balls = std::accumulate(urn.begin(), urn.end(), 0.0);
    const double refill = a * cfg.target.total_weight();

    std::vector<ImmigrationTerm> law;
    double pending = 1.0;  // probability that only the token has been drawn so far
    for (int m = 0; pending >= kDludResidual; ++m) {
        const double draw = balls + 1.0;
        for (std::size_t k = 0; k < urn.size(); ++k) {
            if (urn[k] > 0.0) law.push_back({m, static_cast<int>(k), pending * urn[k] / draw});
        }
        pending /= draw;
        for (std::size_t k = 0; k < urn.size(); ++k) urn[k] += a * w[k];
        balls += refill;
    }
    return law;
}

void dlud(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    double total = 0.0;
    for (const auto& term : dlud_draw_law(cfg, s)) {
        out[static_cast<std::size_t>(term.arm)] += term.probability;
        total += term.probability;
    }
    for (double& x : out) x /= total;
}

int dlud_sample_immigrations(const ProcedureConfig& cfg, const ProcedureState& s, int arm, double u) {
    const auto law = dlud_draw_law(cfg, s);
    double mass = 0.0;
    for (const auto& term : law) {
        if (term.arm == arm) mass += term.probability;
    }
    if (!(mass > 0.0)) throw std::invalid_argument("DLUD: arm cannot be drawn from this urn");
    const double threshold = u * mass;
    double acc = 0.0;
    int last = 0;
    for (const auto& term : law) {
        if (term.arm != arm) continue;
        acc += term.probability;
        last = term.immigrations;
        if (threshold < acc) return last;
    }
    return last;
}

void dbcd(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out) {
    const auto& rho = cfg.target.rho;
    const bool start_up =
        s.j == 0 || std::any_of(s.counts.begin(), s.counts.end(), [](int c) { return c == 0; });
    const double gamma = cfg.params.gamma;
    if (start_up || gamma == 0.0) return copy_rho(cfg, out);
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double observed = double(s.counts[k]) / s.j;
        out[k] = std::log(rho[k]) + gamma * (std::log(rho[k]) - std::log(observed));
    }
    normalize_logs(out);
}

std::vector<double> hypothetical_imbalance(std::span<const int> counts, int j,
                                           std::span<const double> rho) {
    std::vector<int> next(counts.begin(), counts.end());
    std::vector<double> b(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) {
        next[k] += 1;
        b[k] = distance_from_target(next, j + 1, rho);
        next[k] -= 1;
    }
    return b;
}

MaxEntSolution solve_maxent(std::span<const double> rho, std::span<const double> b, double eta,
                            std::span<double> out) {
    const auto K = rho.size();
    const double lowest = *std::min_element(b.begin(), b.end());
    const double highest = *std::max_element(b.begin(), b.end());
    double average = 0.0;
    for (std::size_t k = 0; k < K; ++k) average += rho[k] * b[k];
    const double target = eta * lowest + (1.0 - eta) * average;

    auto tilt = [&](double mu) {
        // rho_k mu^(B_k - min B), normalized; returns the tilted mean of B
        const double log_mu = std::log(mu);
        double total = 0.0;
        double mean = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            out[k] = rho[k] * std::exp((b[k] - lowest) * log_mu);
            total += out[k];
        }
        for (std::size_t k = 0; k < K; ++k) {
            out[k] /= total;
            mean += out[k] * b[k];
        }
        return mean;
    };

    if (highest - lowest <= kProbabilityTolerance || eta == 0.0 ||
        average <= target + kProbabilityTolerance) {
        std::copy(rho.begin(), rho.end(), out.begin());
        return {1.0, 0};
    }
    if (eta == 1.0) {
        // mu -> 0: all mass on the minimizers, in proportion to rho
        double total = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            out[k] = b[k] - lowest <= kProbabilityTolerance ? rho[k] : 0.0;
            total += out[k];
        }
        for (std::size_t k = 0; k < K; ++k) out[k] /= total;
        return {0.0, 0};
    }

    // tilted mean is increasing in mu: min B at 0+, sum rho_k B_k at 1
    double lo = 0.0;
    double hi = 1.0;
    constexpr int kMaxIterations = 200;
    constexpr double kTolerance = 1e-12;
    for (int it = 1; it <= kMaxIterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double mean = tilt(mid);
        if (std::abs(mean - target) <= kTolerance * (1.0 + std::abs(target)) ||
            hi - lo <= kTolerance * hi) {
            return {mid, it};
        }
        (mean > target ? hi : lo) = mid;
    }
    throw std::runtime_error("MaxEnt: bisection did not converge");
}

void maxent(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out) {
    // Start-up: the first subject is allocated at rho. For unequal targets the
    // hypothetical imbalances already differ at j = 0 and the tilt would
    // otherwise favour the largest arm.
    if (s.j == 0) {
        std::copy(cfg.target.rho.begin(), cfg.target.rho.end(), out.begin());
        return;
    }
    const auto b = hypothetical_imbalance(s.counts, s.j, cfg.target.rho);
    solve_maxent(cfg.target.rho, b, cfg.params.eta, out);
}

void bsd(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out) {
    const int d = imbalance(s);
    const int b = cfg.params.b;
    if (std::abs(d) > b) throw std::logic_error("BSD: imbalance beyond the MTI bound");
    two_arm(d == b ? 0.0 : d == -b ? 1.0 : 0.5, out);
}

void bcdwit(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out) {
    const int d = imbalance(s);
    const int b = cfg.params.b;
    const double p = cfg.params.p;
    if (std::abs(d) > b) throw std::logic_error("BCDWIT: imbalance beyond the MTI bound");
    double phi = 0.5;
    if (d == b) {
        phi = 0.0;
    } else if (d == -b) {
        phi = 1.0;
    } else if (d < 0) {
        phi = p;
    } else if (d > 0) {
        phi = 1.0 - p;
    }
    two_arm(phi, out);
}

void eud(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out) {
    const int d = imbalance(s);
    const int b = cfg.params.b;
    if (std::abs(d) > b) throw std::logic_error("EUD: imbalance beyond the MTI bound");
    two_arm(double(b - d) / (2.0 * b), out);
}

void ebcd(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out) {
    two_arm(0.5 + sign(imbalance(s)) * (0.5 - cfg.params.p), out);
}

void abcd(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out) {
    const int d = imbalance(s);
    const double a = cfg.params.a;
    if (d == 0) return two_arm(0.5, out);
    const double lean = std::pow(std::abs(d), a);
    two_arm(d > 0 ? 1.0 / (1.0 + lean) : lean / (1.0 + lean), out);
}

double smith_allocation(double x, double gamma) {
    const double lo = std::pow(1.0 - x, gamma);
    const double hi = std::pow(1.0 + x, gamma);
    if (lo + hi == 0.0) return 0.5;
    return lo / (lo + hi);
}

void gbcd(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out) {
    if (s.j == 0) return two_arm(0.5, out);
    // (1 - x) : (1 + x) = N_C : N_E at x = D / j
    const double e = std::pow(double(s.counts[0]), cfg.params.gamma);
    const double c = std::pow(double(s.counts[1]), cfg.params.gamma);
    two_arm(c / (e + c), out);
}

void bbcd(const ProcedureConfig& cfg, const ProcedureState& s, std::span<double> out) {
    const int ne = s.counts[0];
    const int nc = s.counts[1];
    if (s.j == 0) return two_arm(0.5, out);
    if (s.j == 1) return two_arm(nc == 1 ? 1.0 : 0.0, out);
    if (ne == 0 || nc == 0) throw std::logic_error("BBCD: an arm is empty after two steps");
    const double j = s.j;
    const double inv = 1.0 / cfg.params.gamma;
    const double log_e = inv * std::log1p(nc / (j * ne));
    const double log_c = inv * std::log1p(ne / (j * nc));
    two_arm(1.0 / (1.0 + std::exp(log_c - log_e)), out);
}

}  // namespace randomkit::rules
