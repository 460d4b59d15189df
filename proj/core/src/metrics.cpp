#include "randomkit/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace randomkit {

namespace {

constexpr double kTieTolerance = 1e-12;

// nsim x n table of per-replicate values, replicate-major.
struct Samples {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Samples(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

struct Summary {
    std::vector<double> mean;
    std::vector<double> se;
};

// Column means and standard errors; two passes for accuracy.
Summary summarize(const Samples& s) {
    Summary out{std::vector<double>(static_cast<std::size_t>(s.cols), 0.0),
                std::vector<double>(static_cast<std::size_t>(s.cols), 0.0)};
    for (int r = 0; r < s.rows; ++r) {
        for (int c = 0; c < s.cols; ++c) out.mean[c] += s.at(r, c);
    }
    for (double& m : out.mean) m /= s.rows;
    if (s.rows < 2) return out;
    for (int r = 0; r < s.rows; ++r) {
        for (int c = 0; c < s.cols; ++c) {
            const double d = s.at(r, c) - out.mean[c];
            out.se[c] += d * d;
        }
    }
    for (double& v : out.se) v = std::sqrt(v / (s.rows - 1) / s.rows);
    return out;
}

void cumulative_average(Samples& s) {
    for (int r = 0; r < s.rows; ++r) {
        double running = 0.0;
        for (int c = 0; c < s.cols; ++c) {
            running += s.at(r, c);
            s.at(r, c) = running / (c + 1);
        }
    }
}

// Signed D(j) for 1:1 two-arm targets, d(j) otherwise; column j-1 is step j.
Samples imbalance_samples(const SimulationResult& sr) {
    const bool signed_d = sr.cfg.target.two_arm_equal();
    const auto& rho = sr.cfg.target.rho;
    Samples s(sr.nsim, sr.n);
    std::vector<int> counts(static_cast<std::size_t>(sr.arms()));
    for (int r = 0; r < sr.nsim; ++r) {
        std::fill(counts.begin(), counts.end(), 0);
        for (int j = 0; j < sr.n; ++j) {
            counts[static_cast<std::size_t>(sr.arm(r, j))] += 1;
            s.at(r, j) = signed_d ? double(counts[0] - counts[1])
                                  : distance_from_target(counts, j + 1, rho);
        }
    }
    return s;
}

MetricSeries make_series(std::string metric, const SimulationResult& sr, Summary summary) {
    return MetricSeries{std::move(metric), sr.label(), std::move(summary.mean), std::move(summary.se)};
}

// Per-replicate loss terms l_r(j) whose mean is L(j).
Samples loss_samples(const SimulationResult& sr) {
    Samples imb = imbalance_samples(sr);
    if (sr.cfg.target.two_arm_equal()) {
        // centre on the step mean: the mean of l_r(j) is then the variance-based loss
        const Summary centre = summarize(imb);
        const double scale = sr.nsim > 1 ? double(sr.nsim) / (sr.nsim - 1) : 0.0;
        for (int r = 0; r < imb.rows; ++r) {
            for (int j = 0; j < imb.cols; ++j) {
                const double d = imb.at(r, j) - centre.mean[j];
                imb.at(r, j) = d * d * scale;
            }
        }
    } else {
        for (double& x : imb.data) x *= x;
    }
    for (int r = 0; r < imb.rows; ++r) {
        double running = 0.0;
        for (int j = 0; j < imb.cols; ++j) {
            running += imb.at(r, j) / (j + 1);
            imb.at(r, j) = running / (j + 1);
        }
    }
    return imb;
}

// Per-step forcing distance, before cumulative averaging.
Samples forcing_samples(const SimulationResult& sr, ForcingScale scale) {
    const auto& rho = sr.cfg.target.rho;
    const bool one_to_one = sr.cfg.target.two_arm_equal();
    const double norm = scale == ForcingScale::Normalized ? max_forcing_distance(rho) : 1.0;
    Samples s(sr.nsim, sr.n);
    for (int r = 0; r < sr.nsim; ++r) {
        for (int j = 0; j < sr.n; ++j) {
            const auto phi = sr.phi(r, j);
            if (one_to_one) {
                s.at(r, j) = 2.0 * std::abs(phi[0] - 0.5);
            } else {
                double sum = 0.0;
                for (std::size_t k = 0; k < phi.size(); ++k) sum += (phi[k] - rho[k]) * (phi[k] - rho[k]);
                s.at(r, j) = std::sqrt(sum) / norm;
            }
        }
    }
    cumulative_average(s);
    return s;
}

Samples fi_for_brt(const SimulationResult& sr) { return forcing_samples(sr, ForcingScale::Normalized); }

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::toupper(static_cast<unsigned char>(x)) ==
                      std::toupper(static_cast<unsigned char>(y));
           });
}

}  // namespace

GuessingStrategy parse_strategy(std::string_view token) {
    if (iequals(token, "C")) return GuessingStrategy::Convergence;
    if (iequals(token, "MP")) return GuessingStrategy::MaximumProbability;
    throw std::invalid_argument("unknown guessing strategy '" + std::string(token) + "' (expected C or MP)");
}

std::vector<FinalImbalanceSample> calc_final_imb(const SimulationResult& sr) {
    const Samples imb = imbalance_samples(sr);
    const std::string name = sr.label();
    std::vector<FinalImbalanceSample> out;
    out.reserve(static_cast<std::size_t>(sr.nsim));
    for (int r = 0; r < sr.nsim; ++r) out.push_back({name, r + 1, imb.at(r, sr.n - 1)});
    return out;
}

MetricSeries calc_expected_abs_imb(const SimulationResult& sr) {
    Samples imb = imbalance_samples(sr);
    for (double& x : imb.data) x = std::abs(x);
    return make_series("expected_abs_imb", sr, summarize(imb));
}

MetricSeries calc_variance_of_imb(const SimulationResult& sr) {
    Samples imb = imbalance_samples(sr);
    if (!sr.cfg.target.two_arm_equal()) {
        for (double& x : imb.data) x *= x;
        return make_series("variance_of_imb", sr, summarize(imb));
    }
    const Summary first = summarize(imb);
    const auto n = static_cast<std::size_t>(sr.n);
    Summary out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    if (sr.nsim < 2) return make_series("variance_of_imb", sr, std::move(out));
    std::vector<double> m4(n, 0.0);
    for (int r = 0; r < sr.nsim; ++r) {
        for (int j = 0; j < sr.n; ++j) {
            const double d = imb.at(r, j) - first.mean[j];
            out.mean[j] += d * d;
            m4[j] += d * d * d * d;
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        // Var(s^2) = (mu4 - sigma^4 (N - 3) / (N - 1)) / N. Unlike the delta
        // method this keeps the O(1/N) term, which dominates when |D| is
        // constant across replicates (e.g. TBD one step before the end).
        const double N = sr.nsim;
        const double q = m4[j] / N;
        const double m2 = out.mean[j] / N;
        out.mean[j] /= N - 1;
        out.se[j] = std::sqrt(std::max(0.0, q - m2 * m2 * (N - 3) / (N - 1)) / N);
    }
    return make_series("variance_of_imb", sr, std::move(out));
}

MetricSeries calc_expected_max_abs_imb(const SimulationResult& sr) {
    Samples imb = imbalance_samples(sr);
    for (int r = 0; r < imb.rows; ++r) {
        double top = 0.0;
        for (int j = 0; j < imb.cols; ++j) {
            top = std::max(top, std::abs(imb.at(r, j)));
            imb.at(r, j) = top;
        }
    }
    return make_series("expected_max_abs_imb", sr, summarize(imb));
}

MetricSeries calc_cummean_loss(const SimulationResult& sr) {
    return make_series("cummean_loss", sr, summarize(loss_samples(sr)));
}

MetricSeries calc_cummean_epcg(const SimulationResult& sr, GuessingStrategy strategy) {
    const auto& rho = sr.cfg.target.rho;
    const auto K = static_cast<std::size_t>(sr.arms());
    Samples s(sr.nsim, sr.n);
    std::vector<int> counts(K);
    std::vector<double> gap(K);
    for (int r = 0; r < sr.nsim; ++r) {
        std::fill(counts.begin(), counts.end(), 0);
        for (int j = 0; j < sr.n; ++j) {
            const auto phi = sr.phi(r, j);
            double hit = 0.0;
            if (strategy == GuessingStrategy::MaximumProbability) {
                hit = *std::max_element(phi.begin(), phi.end());
            } else {
                for (std::size_t k = 0; k < K; ++k) gap[k] = counts[k] - j * rho[k];
                const double lowest = *std::min_element(gap.begin(), gap.end());
                int ties = 0;
                for (std::size_t k = 0; k < K; ++k) {
                    if (gap[k] <= lowest + kTieTolerance) {
                        hit += phi[k];
                        ++ties;
                    }
                }
                hit /= ties;
            }
            s.at(r, j) = hit;
            counts[static_cast<std::size_t>(sr.arm(r, j))] += 1;
        }
    }
    cumulative_average(s);
    return make_series(strategy == GuessingStrategy::Convergence ? "cummean_epcg_c" : "cummean_epcg_mp", sr,
                       summarize(s));
}

MetricSeries calc_cummean_pda(const SimulationResult& sr) {
    Samples s(sr.nsim, sr.n);
    for (int r = 0; r < sr.nsim; ++r) {
        for (int j = 0; j < sr.n; ++j) {
            const auto phi = sr.phi(r, j);
            s.at(r, j) = *std::max_element(phi.begin(), phi.end()) >= 1.0 - kProbabilityTolerance ? 1.0 : 0.0;
        }
    }
    cumulative_average(s);
    return make_series("cummean_pda", sr, summarize(s));
}

double max_forcing_distance(std::span<const double> rho) {
    double sum_sq = 0.0;
    for (double r : rho) sum_sq += r * r;
    double best = 0.0;
    for (double r : rho) best = std::max(best, std::sqrt(sum_sq - r * r + (1.0 - r) * (1.0 - r)));
    return best;
}

MetricSeries calc_fi(const SimulationResult& sr, ForcingScale scale) {
    return make_series(scale == ForcingScale::Raw ? "fi" : "fi_normalized", sr,
                       summarize(forcing_samples(sr, scale)));
}

std::vector<MetricSeries> calc_brt(std::span<const SimulationResult> results, BrtNormalization normalization) {
    std::vector<MetricSeries> out;
    out.reserve(results.size());
    if (normalization == BrtNormalization::Absolute) {
        for (const auto& sr : results) {
            const bool clip = !sr.cfg.target.two_arm_equal();
            const Samples loss = loss_samples(sr);
            const Samples fi = fi_for_brt(sr);
            const Summary l = summarize(loss);
            const Summary f = summarize(fi);
            MetricSeries g{"brt", sr.label(), std::vector<double>(static_cast<std::size_t>(sr.n)),
                           std::vector<double>(static_cast<std::size_t>(sr.n))};
            // se by linearizing G around the means: g_r = dG/dL l_r + dG/dFI f_r
            Samples lin(sr.nsim, sr.n);
            for (int j = 0; j < sr.n; ++j) {
                const bool clipped = clip && l.mean[j] > 1.0;
                const double ub = clipped ? 1.0 : l.mean[j];
                const double ur = f.mean[j];
                const double value = std::hypot(ub, ur);
                g.estimate[j] = value;
                const double dl = value > 0.0 && !clipped ? ub / value : 0.0;
                const double df = value > 0.0 ? ur / value : 0.0;
                for (int r = 0; r < sr.nsim; ++r) lin.at(r, j) = dl * loss.at(r, j) + df * fi.at(r, j);
            }
            g.se = summarize(lin).se;
            out.push_back(std::move(g));
        }
        return out;
    }

    std::vector<Summary> losses;
    std::vector<Summary> forcing;
    int steps = std::numeric_limits<int>::max();
    for (const auto& sr : results) {
        losses.push_back(summarize(loss_samples(sr)));
        forcing.push_back(summarize(fi_for_brt(sr)));
        steps = std::min(steps, sr.n);
    }
    for (std::size_t i = 0; i < results.size(); ++i) {
        out.push_back(MetricSeries{"brt", results[i].label(), std::vector<double>(static_cast<std::size_t>(steps)), {}});
    }
    auto rescale = [](double x, double lo, double hi) { return hi > lo ? (x - lo) / (hi - lo) : 0.0; };
    for (int j = 0; j < steps; ++j) {
        double lmin = std::numeric_limits<double>::infinity(), lmax = -lmin;
        double fmin = lmin, fmax = -lmin;
        for (std::size_t i = 0; i < results.size(); ++i) {
            lmin = std::min(lmin, losses[i].mean[j]);
            lmax = std::max(lmax, losses[i].mean[j]);
            fmin = std::min(fmin, forcing[i].mean[j]);
            fmax = std::max(fmax, forcing[i].mean[j]);
        }
        for (std::size_t i = 0; i < results.size(); ++i) {
            out[i].estimate[j] = std::hypot(rescale(losses[i].mean[j], lmin, lmax),
                                            rescale(forcing[i].mean[j], fmin, fmax));
        }
    }
    return out;
}

MetricSeries calc_brt(const SimulationResult& sr) {
    return std::move(calc_brt(std::span(&sr, 1)).front());
}

bool ArpTable::any_flagged() const {
    return std::any_of(flagged.begin(), flagged.end(), [](bool f) { return f; });
}

std::pair<double, double> ArpTable::max_deviation() const {
    double worst = -1.0;
    double worst_se = 0.0;
    for (int j = 0; j < steps; ++j) {
        for (int k = 0; k < arms; ++k) {
            const double dev = std::abs(at(j, k) - rho[static_cast<std::size_t>(k)]);
            if (dev > worst) {
                worst = dev;
                worst_se = se_at(j, k);
            }
        }
    }
    return {worst, worst_se};
}

ArpTable eval_arp(const SimulationResult& sr) {
    ArpTable t;
    t.label = sr.label();
    t.steps = sr.n;
    t.arms = sr.arms();
    t.rho = sr.cfg.target.rho;
    Samples dev(sr.nsim, sr.n * sr.arms());
    for (int r = 0; r < sr.nsim; ++r) {
        for (int j = 0; j < sr.n; ++j) {
            const auto phi = sr.phi(r, j);
            for (int k = 0; k < t.arms; ++k) dev.at(r, j * t.arms + k) = phi[k] - t.rho[k];
        }
    }
    // averaging deviations keeps constant rows exactly at rho
    const Summary s = summarize(dev);
    t.pi.resize(s.mean.size());
    t.se = s.se;
    t.flagged.resize(s.mean.size());
    for (std::size_t c = 0; c < s.mean.size(); ++c) {
        const double rho = t.rho[c % static_cast<std::size_t>(t.arms)];
        t.pi[c] = rho + s.mean[c];
        const double gap = std::abs(s.mean[c]);
        t.flagged[c] = t.se[c] > 0.0 ? gap > 3.0 * t.se[c] : gap > kProbabilityTolerance;
    }
    return t;
}

bool is_metric_id(std::string_view id) {
    return std::find(std::begin(kMetricIds), std::end(kMetricIds), id) != std::end(kMetricIds);
}

MetricSeries calc_metric(const SimulationResult& sr, std::string_view id) {
    if (id == "expected_abs_imb") return calc_expected_abs_imb(sr);
    if (id == "variance_of_imb") return calc_variance_of_imb(sr);
    if (id == "expected_max_abs_imb") return calc_expected_max_abs_imb(sr);
    if (id == "cummean_loss") return calc_cummean_loss(sr);
    if (id == "cummean_epcg_c") return calc_cummean_epcg(sr, GuessingStrategy::Convergence);
    if (id == "cummean_epcg_mp") return calc_cummean_epcg(sr, GuessingStrategy::MaximumProbability);
    if (id == "cummean_pda") return calc_cummean_pda(sr);
    if (id == "fi") return calc_fi(sr, ForcingScale::Raw);
    if (id == "fi_normalized") return calc_fi(sr, ForcingScale::Normalized);
    if (id == "brt") return calc_brt(sr);
    throw std::invalid_argument("'" + std::string(id) + "' is not a series metric");
}

}  // namespace randomkit
