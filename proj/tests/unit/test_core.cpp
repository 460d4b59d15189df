#include <doctest.h>

#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "randomkit/procedure.hpp"
#include "randomkit/rules.hpp"
#include "randomkit/target.hpp"

using namespace randomkit;

namespace {

ProcedureConfig two_arm(ProcedureKind kind, ProcedureParams p = {}, int n = 0) {
    return make_config(kind, normalize_target({1, 1}), p, n);
}

// One representative config per kind, over the given target where allowed.
std::vector<ProcedureConfig> every_kind(const AllocationTarget& t, int n) {
    std::vector<ProcedureConfig> out{
        make_config(ProcedureKind::CRD, t),
        make_config(ProcedureKind::RAND, t, {}, n),
        make_config(ProcedureKind::TMD, t, {}, n),
        make_config(ProcedureKind::PBD, t, {.b = 1}),
        make_config(ProcedureKind::BUD, t, {.lambda = 2}),
        make_config(ProcedureKind::MWUD, t, {.alpha = 2}),
        make_config(ProcedureKind::DLUD, t, {.a = 2}),
        make_config(ProcedureKind::DBCD, t, {.gamma = 2}),
        make_config(ProcedureKind::MAXENT, t, {.eta = 0.5}),
    };
    if (t.two_arm_equal()) {
        out.push_back(make_config(ProcedureKind::BSD, t, {.b = 3}));
        out.push_back(make_config(ProcedureKind::BCDWIT, t, {.b = 3, .p = 2.0 / 3}));
        out.push_back(make_config(ProcedureKind::EUD, t, {.b = 2}));
        out.push_back(make_config(ProcedureKind::EBCD, t, {.p = 2.0 / 3}));
        out.push_back(make_config(ProcedureKind::ABCD, t, {.a = 2}));
        out.push_back(make_config(ProcedureKind::GBCD, t, {.gamma = 2}));
        out.push_back(make_config(ProcedureKind::BBCD, t, {.gamma = 1}));
    }
    return out;
}

// Visits every reachable state up to depth n (DLUD: with no immigrations).
void walk(const ProcedureConfig& cfg, int n, const std::function<void(const ProcedureState&, const ProbabilityVector&)>& f) {
    std::function<void(const ProcedureState&)> rec = [&](const ProcedureState& s) {
        if (s.j == n) return;
        const auto phi = probabilities(cfg, s);
        f(s, phi);
        for (int k = 0; k < cfg.arms(); ++k) {
            if (!(phi[k] > 0)) continue;
            // DLUD: follow the fewest immigrations that make arm k drawable.
            int m = 0;
            if (cfg.kind == ProcedureKind::DLUD) {
                for (const auto& term : rules::dlud_draw_law(cfg, s)) {
                    if (term.arm == k) {
                        m = term.immigrations;
                        break;
                    }
                }
            }
            rec(advance_state(s, k, cfg, m));
        }
    };
    rec(initial_state(cfg));
}

}  // namespace

TEST_CASE("normalize_target derives proportions") {
    auto t = normalize_target({4, 3, 2, 1});
    REQUIRE(t.arms() == 4);
    CHECK(t.rho[0] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(t.rho[1] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(t.rho[2] == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(t.rho[3] == doctest::Approx(0.1).epsilon(1e-15));

    auto e = normalize_target({1, 1});
    CHECK(e.rho == std::vector<double>{0.5, 0.5});
    CHECK(e.two_arm_equal());

    const double r2 = std::sqrt(2.0);
    auto s = normalize_target({r2, 1, 1});
    CHECK(s.rho[0] == doctest::Approx(r2 / (r2 + 2)).epsilon(1e-15));
    CHECK(s.rho[1] == doctest::Approx(1 / (r2 + 2)).epsilon(1e-15));
    CHECK(std::abs(std::accumulate(s.rho.begin(), s.rho.end(), 0.0) - 1.0) <= 1e-12);
    CHECK_FALSE(s.integral());
}

TEST_CASE("normalize_target is scale invariant and rejects bad input") {
    auto a = normalize_target({4, 3, 2, 1});
    auto b = normalize_target({40, 30, 20, 10});
    for (int k = 0; k < 4; ++k) CHECK(a.rho[k] == doctest::Approx(b.rho[k]).epsilon(1e-15));

    CHECK_THROWS_AS(normalize_target(std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(normalize_target({1}), std::invalid_argument);
    CHECK_THROWS_AS(normalize_target({1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(normalize_target({1, -2}), std::invalid_argument);
}

TEST_CASE("target caps: floor plus largest remainder, ties to the lower arm") {
    CHECK(target_caps(normalize_target({4, 3, 2, 1}), 10) == std::vector<int>{4, 3, 2, 1});
    CHECK(target_caps(normalize_target({1, 1}), 8) == std::vector<int>{4, 4});
    CHECK(target_caps(normalize_target({1, 1}), 7) == std::vector<int>{4, 3});
    CHECK(target_caps(normalize_target({1, 1, 1}), 4) == std::vector<int>{2, 1, 1});
    // 4:3:2:1 at n = 13: 5.2, 3.9, 2.6, 1.3 -> floors 5,3,2,1; remainder 2 to .9 and .6.
    CHECK(target_caps(normalize_target({4, 3, 2, 1}), 13) == std::vector<int>{5, 4, 3, 1});
}

TEST_CASE("initial_state") {
    auto crd = initial_state(two_arm(ProcedureKind::CRD));
    CHECK(crd.j == 0);
    CHECK(crd.counts == std::vector<int>{0, 0});
    CHECK_FALSE(crd.urn.has_value());

    auto rand = initial_state(two_arm(ProcedureKind::RAND, {}, 8));
    CHECK(rand.j == 0);
    CHECK(rand.counts == std::vector<int>{0, 0});

    auto dlud = initial_state(make_config(ProcedureKind::DLUD, normalize_target({4, 3, 2, 1}), {.a = 2}));
    REQUIRE(dlud.urn.has_value());
    CHECK(*dlud.urn == std::vector<double>{4, 3, 2, 1});
    CHECK(dlud.immigrations == 0);
}

TEST_CASE("advance_state") {
    const auto crd = two_arm(ProcedureKind::CRD);
    ProcedureState s{3, {2, 1}, std::nullopt, 0};
    auto t = advance_state(s, 1, crd);
    CHECK(t.j == 4);
    CHECK(t.counts == std::vector<int>{2, 2});

    const auto four = make_config(ProcedureKind::CRD, normalize_target({4, 3, 2, 1}));
    auto u = advance_state(initial_state(four), 0, four);
    CHECK(u.j == 1);
    CHECK(u.counts == std::vector<int>{1, 0, 0, 0});

    const auto dlud = make_config(ProcedureKind::DLUD, normalize_target({4, 3, 2, 1}), {.a = 2});
    auto d = advance_state(initial_state(dlud), 0, dlud);
    CHECK(*d.urn == std::vector<double>{3, 3, 2, 1});
    // One immigration first adds a*w = (8,6,4,2).
    auto di = advance_state(initial_state(dlud), 3, dlud, 1);
    CHECK(*di.urn == std::vector<double>{12, 9, 6, 2});
    CHECK(di.immigrations == 1);

    CHECK_THROWS_AS(advance_state(initial_state(crd), 2, crd), std::out_of_range);
    CHECK_THROWS_AS(advance_state(initial_state(crd), -1, crd), std::out_of_range);

    const auto rand = two_arm(ProcedureKind::RAND, {}, 2);
    auto r = advance_state(initial_state(rand), 0, rand);
    CHECK_THROWS_AS(advance_state(r, 0, rand), std::out_of_range);  // arm 1 cap is 1
    r = advance_state(r, 1, rand);
    CHECK_THROWS_AS(advance_state(r, 1, rand), std::out_of_range);  // trial complete
}

TEST_CASE("labels") {
    CHECK(label(two_arm(ProcedureKind::PBD, {.b = 2})) == "PBD(2)");
    CHECK(label(two_arm(ProcedureKind::CRD)) == "CRD");
    CHECK(label(two_arm(ProcedureKind::MAXENT, {.eta = 0.5})) == "MaxEnt(0.5)");
    CHECK(label(two_arm(ProcedureKind::EBCD, {.p = 2.0 / 3})) == "EBCD(2/3)");
    CHECK(label(two_arm(ProcedureKind::BSD, {.b = 3})) == "BSD(3)");
    CHECK(label(two_arm(ProcedureKind::BCDWIT, {.b = 3, .p = 2.0 / 3})) == "BCDWIT(2/3,3)");
    CHECK(label(two_arm(ProcedureKind::RAND, {}, 8)) == "RAND");
    CHECK(label(two_arm(ProcedureKind::TMD, {}, 8)) == "TBD");
    CHECK(label(make_config(ProcedureKind::TMD, normalize_target({4, 3, 2, 1}), {}, 10)) == "TMD");
    CHECK(label(two_arm(ProcedureKind::BBCD, {.gamma = 0.05})) == "BBCD(0.05)");
    CHECK(format_param(0.1) == "0.1");
    CHECK(format_param(1.0 / 3) == "1/3");
}

TEST_CASE("parse_kind accepts names case-insensitively") {
    CHECK(parse_kind("maxent") == ProcedureKind::MAXENT);
    CHECK(parse_kind("MaxEnt") == ProcedureKind::MAXENT);
    CHECK(parse_kind("TBD") == ProcedureKind::TMD);
    CHECK_FALSE(parse_kind("XYZ").has_value());
}

TEST_CASE("parameter domains") {
    const auto t = normalize_target({1, 1});
    CHECK_THROWS_AS(make_config(ProcedureKind::PBD, t, {.b = 0}), std::invalid_argument);
    CHECK_THROWS_AS(make_config(ProcedureKind::EBCD, t, {.p = 0.4}), std::invalid_argument);
    CHECK_THROWS_AS(make_config(ProcedureKind::EBCD, t, {.p = 0.5}), std::invalid_argument);
    CHECK_NOTHROW(make_config(ProcedureKind::EBCD, t, {.p = 1.0}));
    CHECK_THROWS_AS(make_config(ProcedureKind::ABCD, t, {.a = -1}), std::invalid_argument);
    CHECK_THROWS_AS(make_config(ProcedureKind::BBCD, t, {.gamma = 0}), std::invalid_argument);
    CHECK_NOTHROW(make_config(ProcedureKind::GBCD, t, {.gamma = 0}));
    CHECK_THROWS_AS(make_config(ProcedureKind::BUD, t, {.lambda = 0}), std::invalid_argument);
    CHECK_THROWS_AS(make_config(ProcedureKind::MWUD, t, {.alpha = 0}), std::invalid_argument);
    CHECK_THROWS_AS(make_config(ProcedureKind::MAXENT, t, {.eta = 1.5}), std::invalid_argument);
    CHECK_THROWS_AS(make_config(ProcedureKind::RAND, t), std::invalid_argument);  // needs n
    // Two-arm-only kinds need a 1:1 target.
    CHECK_THROWS_AS(make_config(ProcedureKind::BSD, normalize_target({2, 1}), {.b = 3}), std::invalid_argument);
    CHECK_THROWS_AS(make_config(ProcedureKind::BSD, normalize_target({1, 1, 1}), {.b = 3}), std::invalid_argument);
    // PBD needs integral weights.
    CHECK_THROWS_AS(make_config(ProcedureKind::PBD, normalize_target({1.5, 1}), {.b = 1}), std::invalid_argument);
}

TEST_CASE("every rule yields a probability vector on every reachable state") {
    for (const auto& t : {normalize_target({1, 1}), normalize_target({2, 1, 1}), normalize_target({4, 3, 2, 1})}) {
        const int n = t.arms() == 2 ? 12 : 7;
        for (const auto& cfg : every_kind(t, n)) {
            CAPTURE(label(cfg));
            CAPTURE(t.arms());
            bool first = true;
            walk(cfg, n, [&](const ProcedureState& s, const ProbabilityVector& phi) {
                REQUIRE(phi.size() == t.arms());
                double sum = 0;
                for (double x : phi.values) {
                    REQUIRE(x >= 0.0);
                    REQUIRE(x <= 1.0);
                    sum += x;
                }
                REQUIRE(std::abs(sum - 1.0) <= kProbabilityTolerance);
                REQUIRE(std::accumulate(s.counts.begin(), s.counts.end(), 0) == s.j);
                if (first) {
                    // First-patient rule: phi_1 = rho, except RAND, which draws from the rounded caps.
                    for (int k = 0; k < t.arms(); ++k) {
                        const double want = cfg.kind == ProcedureKind::RAND ? static_cast<double>(cfg.caps[k]) / n : t.rho[k];
                        CHECK(phi[k] == doctest::Approx(want).epsilon(1e-14));
                    }
                    first = false;
                }
            });
        }
    }
}

TEST_CASE("distance_from_target") {
    const std::vector<double> rho{0.5, 0.5};
    CHECK(distance_from_target(std::vector<int>{3, 1}, 4, rho) == doctest::Approx(std::sqrt(2.0)));
    CHECK(distance_from_target(std::vector<int>{2, 2}, 4, rho) == 0.0);
}
