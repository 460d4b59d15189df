#include "randomkit/procedure.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "randomkit/rules.hpp"

namespace randomkit {

namespace {

struct KindInfo {
    ProcedureKind kind;
    std::string_view name;
};

constexpr std::array<KindInfo, 16> kKinds{{
    {ProcedureKind::CRD, "CRD"},       {ProcedureKind::RAND, "RAND"},
    {ProcedureKind::TMD, "TMD"},       {ProcedureKind::PBD, "PBD"},
    {ProcedureKind::BUD, "BUD"},       {ProcedureKind::MWUD, "MWUD"},
    {ProcedureKind::DLUD, "DLUD"},     {ProcedureKind::DBCD, "DBCD"},
    {ProcedureKind::MAXENT, "MaxEnt"}, {ProcedureKind::BSD, "BSD"},
    {ProcedureKind::BCDWIT, "BCDWIT"}, {ProcedureKind::EUD, "EUD"},
    {ProcedureKind::EBCD, "EBCD"},     {ProcedureKind::ABCD, "ABCD"},
    {ProcedureKind::GBCD, "GBCD"},     {ProcedureKind::BBCD, "BBCD"},
}};

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::toupper(static_cast<unsigned char>(x)) ==
                      std::toupper(static_cast<unsigned char>(y));
           });
}

[[noreturn]] void reject(const ProcedureConfig& cfg, const std::string& what) {
    throw std::invalid_argument(std::string(kind_name(cfg.kind)) + ": " + what);
}

[[noreturn]] void reject_param(const ProcedureConfig& cfg, const char* param, const std::string& what) {
    throw InvalidParameter(param, std::string(kind_name(cfg.kind)) + ": " + what);
}

void require_integral_target(const ProcedureConfig& cfg) {
    if (!cfg.target.integral()) reject(cfg, "needs an integer-valued allocation ratio");
}

}  // namespace

std::string_view kind_name(ProcedureKind kind) {
    for (const auto& info : kKinds) {
        if (info.kind == kind) return info.name;
    }
    return "?";
}

std::optional<ProcedureKind> parse_kind(std::string_view name) {
    if (iequals(name, "TBD")) return ProcedureKind::TMD;
    for (const auto& info : kKinds) {
        if (iequals(name, info.name)) return info.kind;
    }
    return std::nullopt;
}

bool is_two_arm_only(ProcedureKind kind) {
    return kind >= ProcedureKind::BSD;
}

bool is_markov(ProcedureKind kind) { return kind != ProcedureKind::DLUD; }

void validate(const ProcedureConfig& cfg) {
    const auto& t = cfg.target;
    if (t.arms() < 2 || t.rho.size() != t.weights.size()) {
        reject(cfg, "allocation target must have at least two arms");
    }
    if (t.arms() > 255) reject(cfg, "at most 255 arms are supported");
    if (is_two_arm_only(cfg.kind) && !t.two_arm_equal()) {
        reject(cfg, "defined only for two arms with 1:1 allocation");
    }
    if (cfg.n < 0) reject(cfg, "sample size must be non-negative");

    const auto& q = cfg.params;
    switch (cfg.kind) {
        case ProcedureKind::CRD:
            break;
        case ProcedureKind::RAND:
        case ProcedureKind::TMD:
            if (cfg.n < 1) reject(cfg, "needs the planned sample size n >= 1");
            break;
        case ProcedureKind::PBD:
            if (q.b < 1) reject_param(cfg, "b", "block multiplier b must be an integer >= 1");
            require_integral_target(cfg);
            break;
        case ProcedureKind::BUD:
            if (q.lambda < 1) reject_param(cfg, "lambda", "lambda must be an integer >= 1");
            require_integral_target(cfg);
            break;
        case ProcedureKind::MWUD:
            if (!(q.alpha > 0.0)) reject_param(cfg, "alpha", "alpha must be > 0");
            break;
        case ProcedureKind::DLUD:
            if (!(q.a > 0.0)) reject_param(cfg, "a", "immigration multiplier a must be > 0");
            require_integral_target(cfg);
            for (double w : t.weights) {
                if (q.a * w != std::floor(q.a * w)) {
                    reject_param(cfg, "a", "a * w_k must be an integer number of balls");
                }
            }
            break;
        case ProcedureKind::DBCD:
            if (!(q.gamma >= 0.0)) reject_param(cfg, "gamma", "gamma must be >= 0");
            break;
        case ProcedureKind::MAXENT:
            if (!(q.eta >= 0.0 && q.eta <= 1.0)) reject_param(cfg, "eta", "eta must lie in [0, 1]");
            break;
        case ProcedureKind::BSD:
        case ProcedureKind::EUD:
            if (q.b < 1) reject_param(cfg, "b", "MTI bound b must be an integer >= 1");
            break;
        case ProcedureKind::BCDWIT:
            if (q.b < 1) reject_param(cfg, "b", "MTI bound b must be an integer >= 1");
            [[fallthrough]];
        case ProcedureKind::EBCD:
            if (!(q.p > 0.5 && q.p <= 1.0)) reject_param(cfg, "p", "p must lie in (0.5, 1]");
            break;
        case ProcedureKind::ABCD:
            if (!(q.a >= 0.0)) reject_param(cfg, "a", "a must be >= 0");
            break;
        case ProcedureKind::GBCD:
            if (!(q.gamma >= 0.0)) reject_param(cfg, "gamma", "gamma must be >= 0");
            break;
        case ProcedureKind::BBCD:
            if (!(q.gamma > 0.0)) reject_param(cfg, "gamma", "gamma must be > 0");
            break;
    }
    if (cfg.kind == ProcedureKind::RAND || cfg.kind == ProcedureKind::TMD) {
        if (cfg.caps != target_caps(t, cfg.n)) reject(cfg, "caps do not match the target and n");
    }
}

ProcedureConfig make_config(ProcedureKind kind, AllocationTarget target, ProcedureParams params,
                            int n) {
    ProcedureConfig cfg;
    cfg.kind = kind;
    cfg.params = params;
    cfg.target = std::move(target);
    cfg.n = n;
    if ((kind == ProcedureKind::RAND || kind == ProcedureKind::TMD) && n >= 1) {
        cfg.caps = target_caps(cfg.target, n);
    }
    validate(cfg);
    return cfg;
}

std::string format_param(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    std::string shortest(buf, end);
    if (shortest.size() <= 6) return shortest;
    for (int den = 2; den <= 100; ++den) {
        const double num = std::round(value * den);
        if (std::abs(num / den - value) <= 1e-12 * std::max(1.0, std::abs(value))) {
            return std::to_string(static_cast<long long>(num)) + "/" + std::to_string(den);
        }
    }
    return shortest;
}

std::string label(const ProcedureConfig& cfg) {
    const auto& q = cfg.params;
    const std::string name(kind_name(cfg.kind));
    auto with = [&](std::initializer_list<double> values) {
        std::string s = name + "(";
        bool first = true;
        for (double v : values) {
            if (!first) s += ",";
            s += format_param(v);
            first = false;
        }
        return s + ")";
    };
    switch (cfg.kind) {
        case ProcedureKind::CRD:
        case ProcedureKind::RAND:
            return name;
        case ProcedureKind::TMD:
            return cfg.target.two_arm_equal() ? "TBD" : name;
        case ProcedureKind::PBD:
        case ProcedureKind::BSD:
        case ProcedureKind::EUD:
            return with({double(q.b)});
        case ProcedureKind::BUD:
            return with({double(q.lambda)});
        case ProcedureKind::MWUD:
            return with({q.alpha});
        case ProcedureKind::DLUD:
        case ProcedureKind::ABCD:
            return with({q.a});
        case ProcedureKind::DBCD:
        case ProcedureKind::GBCD:
        case ProcedureKind::BBCD:
            return with({q.gamma});
        case ProcedureKind::MAXENT:
            return with({q.eta});
        case ProcedureKind::BCDWIT:
            return with({q.p, double(q.b)});
        case ProcedureKind::EBCD:
            return with({q.p});
    }
    return name;
}

ProcedureState initial_state(const ProcedureConfig& cfg) {
    ProcedureState s;
    s.counts.assign(static_cast<std::size_t>(cfg.arms()), 0);
    if (cfg.kind == ProcedureKind::DLUD) s.urn = cfg.target.weights;
    return s;
}

ProcedureState advance_state(ProcedureState state, int arm, const ProcedureConfig& cfg,
                             int immigrations) {
    if (arm < 0 || arm >= cfg.arms()) {
        throw std::out_of_range("arm index " + std::to_string(arm + 1) + " outside 1.." +
                                std::to_string(cfg.arms()));
    }
    const auto k = static_cast<std::size_t>(arm);
    if (!cfg.caps.empty()) {
        if (state.j >= cfg.n) throw std::out_of_range("all " + std::to_string(cfg.n) + " slots are filled");
        if (state.counts[k] >= cfg.caps[k]) {
            throw std::out_of_range("arm " + std::to_string(arm + 1) + " already holds its cap");
        }
    }
    if (cfg.kind == ProcedureKind::DLUD) {
        if (!state.urn) throw std::invalid_argument("DLUD state has no urn");
        if (immigrations < 0) throw std::invalid_argument("negative immigration count");
        auto& urn = *state.urn;
        for (std::size_t l = 0; l < urn.size(); ++l) {
            urn[l] += immigrations * cfg.params.a * cfg.target.weights[l];
        }
        if (urn[k] < 1.0) {
            throw std::invalid_argument("urn holds no ball of type " + std::to_string(arm + 1));
        }
        urn[k] -= 1.0;
        state.immigrations += immigrations;
    } else if (immigrations != 0) {
        throw std::invalid_argument("immigrations apply to DLUD only");
    }
    state.counts[k] += 1;
    state.j += 1;
    return state;
}

void probabilities(const ProcedureConfig& cfg, const ProcedureState& state, std::span<double> out) {
    switch (cfg.kind) {
        case ProcedureKind::CRD: return rules::crd(cfg, state, out);
        case ProcedureKind::RAND: return rules::rand(cfg, state, out);
        case ProcedureKind::TMD: return rules::tmd(cfg, state, out);
        case ProcedureKind::PBD: return rules::pbd(cfg, state, out);
        case ProcedureKind::BUD: return rules::bud(cfg, state, out);
        case ProcedureKind::MWUD: return rules::mwud(cfg, state, out);
        case ProcedureKind::DLUD: return rules::dlud(cfg, state, out);
        case ProcedureKind::DBCD: return rules::dbcd(cfg, state, out);
        case ProcedureKind::MAXENT: return rules::maxent(cfg, state, out);
        case ProcedureKind::BSD: return rules::bsd(cfg, state, out);
        case ProcedureKind::BCDWIT: return rules::bcdwit(cfg, state, out);
        case ProcedureKind::EUD: return rules::eud(cfg, state, out);
        case ProcedureKind::EBCD: return rules::ebcd(cfg, state, out);
        case ProcedureKind::ABCD: return rules::abcd(cfg, state, out);
        case ProcedureKind::GBCD: return rules::gbcd(cfg, state, out);
        case ProcedureKind::BBCD: return rules::bbcd(cfg, state, out);
    }
}

ProbabilityVector probabilities(const ProcedureConfig& cfg, const ProcedureState& state) {
    ProbabilityVector phi;
    phi.values.resize(static_cast<std::size_t>(cfg.arms()));
    probabilities(cfg, state, phi.values);
    return phi;
}

double distance_from_target(std::span<const int> counts, int j, std::span<const double> rho) {
    double sum = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const double diff = counts[k] - j * rho[k];
        sum += diff * diff;
    }
    return std::sqrt(sum);
}

}  // namespace randomkit
