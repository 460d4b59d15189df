#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <array>
#include <cstdlib>

#include "randomkit/engine.hpp"
#include "randomkit/rules.hpp"

using namespace randomkit;

namespace {

const AllocationTarget k11 = normalize_target({1, 1});
const AllocationTarget k4321 = normalize_target({4, 3, 2, 1});

std::vector<int> final_counts(const SimulationResult& sr, int r) {
    std::vector<int> c(static_cast<std::size_t>(sr.arms()), 0);
    for (int j = 0; j < sr.n; ++j) c[static_cast<std::size_t>(sr.arm(r, j))] += 1;
    return c;
}

}  // namespace

TEST_CASE("CRD: one path of n one-hot rows with constant probabilities") {
    const auto sr = simulate_one(make_config(ProcedureKind::CRD, k11), 8, 1);
    REQUIRE(sr.assignments.size() == 8);
    REQUIRE(sr.probs.size() == 16);
    for (double p : sr.probs) CHECK(p == 0.5);
    const auto path = sr.path(0);
    CHECK(path.assignments.size() == 8);
    for (int a : path.assignments) CHECK((a == 0 || a == 1));
}

TEST_CASE("RAND: every path ends at the caps") {
    const auto sr = simulate_one(make_config(ProcedureKind::RAND, k11, {}, 8), 8, 1000);
    for (int r = 0; r < sr.nsim; ++r) REQUIRE(final_counts(sr, r) == std::vector<int>{4, 4});
    CHECK(check_invariants(sr).empty());
}

TEST_CASE("different procedures give different probability columns") {
    const std::vector<ProcedureConfig> cfgs{
        make_config(ProcedureKind::PBD, k11, {.b = 2}),
        make_config(ProcedureKind::RAND, k11, {}, 8),
        make_config(ProcedureKind::BSD, k11, {.b = 3}),
        make_config(ProcedureKind::EBCD, k11, {.p = 2.0 / 3}),
    };
    const auto results = simulate(cfgs, 8, 1);
    REQUIRE(results.size() == 4);
    for (std::size_t a = 0; a < results.size(); ++a) {
        CHECK(results[a].cfg == cfgs[a]);
        for (std::size_t b = a + 1; b < results.size(); ++b) CHECK(results[a].probs != results[b].probs);
    }
}

TEST_CASE("draw_arm") {
    const std::array<double, 3> point{0, 1, 0};
    for (double u : {0.0, 0.5, 0.999999}) CHECK(draw_arm(point, u) == 1);
    const std::array<double, 2> fair{0.5, 0.5};
    CHECK(draw_arm(fair, 0.25) == 0);
    CHECK(draw_arm(fair, 0.5) == 1);
    // Rounding in the cumulative sum never selects a zero-probability arm.
    const std::array<double, 3> tail{0.1, 0.9, 0};
    CHECK(draw_arm(tail, std::nextafter(1.0, 0.0)) == 1);
}

TEST_CASE("child streams: deterministic and distinct") {
    auto a = child_stream(314159, 0, 0), b = child_stream(314159, 0, 0);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next() == b.next());

    auto c = child_stream(314159, 0, 0), d = child_stream(314159, 0, 1), e = child_stream(314159, 1, 0);
    int same_d = 0, same_e = 0;
    for (int i = 0; i < 64; ++i) {
        const auto x = c.next();
        same_d += x == d.next();
        same_e += x == e.next();
    }
    CHECK(same_d == 0);
    CHECK(same_e == 0);

    // High words of the seed matter too.
    auto f = child_stream(1, 0, 0), g = child_stream(1 + (std::uint64_t{1} << 32), 0, 0);
    CHECK(f.next() != g.next());
}

TEST_CASE("chi-square uniformity of 100 streams x 10^4 uniforms") {
    constexpr int kStreams = 100, kDraws = 10'000, kBins = 50;
    std::vector<long> pooled(kBins, 0);
    double sum_stat = 0;
    for (int s = 0; s < kStreams; ++s) {
        auto stream = child_stream(kDefaultSeed, 0, static_cast<std::uint64_t>(s));
        std::vector<long> bins(kBins, 0);
        for (int i = 0; i < kDraws; ++i) {
            const double u = stream.uniform();
            REQUIRE(u >= 0.0);
            REQUIRE(u < 1.0);
            bins[static_cast<std::size_t>(u * kBins)] += 1;
        }
        const double expected = double(kDraws) / kBins;
        double stat = 0;
        for (int k = 0; k < kBins; ++k) {
            const double dev = bins[static_cast<std::size_t>(k)] - expected;
            stat += dev * dev / expected;
            pooled[static_cast<std::size_t>(k)] += bins[static_cast<std::size_t>(k)];
        }
        sum_stat += stat;
    }
    // Independent per-stream statistics add up to chi-square with 100 (B - 1) df.
    const boost::math::chi_squared summed(kStreams * (kBins - 1));
    CHECK(sum_stat < boost::math::quantile(boost::math::complement(summed, 0.001)));
    CHECK(sum_stat > boost::math::quantile(summed, 0.001));

    const double expected = double(kStreams) * kDraws / kBins;
    double stat = 0;
    for (long b : pooled) stat += (b - expected) * (b - expected) / expected;
    const boost::math::chi_squared dist(kBins - 1);
    CHECK(stat < boost::math::quantile(boost::math::complement(dist, 0.001)));
}

TEST_CASE("recorded probabilities equal the rule re-evaluated on the reconstructed state") {
    const std::vector<ProcedureConfig> cfgs{
        make_config(ProcedureKind::TMD, k4321, {}, 30),
        make_config(ProcedureKind::BUD, k4321, {.lambda = 2}),
        make_config(ProcedureKind::DLUD, k4321, {.a = 2}),
        make_config(ProcedureKind::MAXENT, k4321, {.eta = 0.5}),
        make_config(ProcedureKind::DBCD, k4321, {.gamma = 2}),
        make_config(ProcedureKind::BBCD, k11, {.gamma = 0.05}),
    };
    const auto results = simulate(cfgs, 30, 50, 7);
    for (const auto& sr : results) {
        CAPTURE(sr.label());
        const bool dlud = sr.cfg.kind == ProcedureKind::DLUD;
        for (int r = 0; r < sr.nsim; ++r) {
            // DLUD's immigration counts are not stored; replay them from the same stream.
            auto stream = child_stream(sr.seed, static_cast<std::uint64_t>(&sr - results.data()),
                                       static_cast<std::uint64_t>(r));
            auto state = initial_state(sr.cfg);
            for (int j = 0; j < sr.n; ++j) {
                const auto phi = probabilities(sr.cfg, state);
                const auto rec = sr.phi(r, j);
                for (int k = 0; k < sr.arms(); ++k) REQUIRE(phi[k] == rec[static_cast<std::size_t>(k)]);
                const double u = stream.uniform();
                REQUIRE(draw_arm(rec, u) == sr.arm(r, j));
                int m = 0;
                if (dlud) m = rules::dlud_sample_immigrations(sr.cfg, state, sr.arm(r, j), stream.uniform());
                state = advance_state(std::move(state), sr.arm(r, j), sr.cfg, m);
            }
        }
        CHECK(check_invariants(sr).empty());
    }
}

TEST_CASE("thread count does not change the result") {
    const std::vector<ProcedureConfig> cfgs{
        make_config(ProcedureKind::EBCD, k11, {.p = 2.0 / 3}),
        make_config(ProcedureKind::DLUD, k4321, {.a = 2}),
    };
    for (const auto& cfg : cfgs) {
        const auto one = simulate_one(cfg, 25, 997, 5, {.threads = 1});
        const auto four = simulate_one(cfg, 25, 997, 5, {.threads = 4});
        const auto seven = simulate_one(cfg, 25, 997, 5, {.threads = 7});
        CHECK(one == four);
        CHECK(one == seven);
    }
    // Config index feeds the stream: the same cfg in slot 1 differs from slot 0.
    const std::vector<ProcedureConfig> twice{cfgs[0], cfgs[0]};
    const auto both = simulate(twice, 25, 100, 5);
    CHECK(both[0].assignments != both[1].assignments);
}

TEST_CASE("RANDOMKIT_THREADS resolves the default thread count") {
    CHECK(resolve_thread_count(3) == 3);
    ::setenv("RANDOMKIT_THREADS", "5", 1);
    CHECK(resolve_thread_count(0) == 5);
    ::setenv("RANDOMKIT_THREADS", "junk", 1);
    CHECK(resolve_thread_count(0) >= 1);
    ::unsetenv("RANDOMKIT_THREADS");
}

TEST_CASE("argument errors") {
    const auto crd = make_config(ProcedureKind::CRD, k11);
    CHECK_THROWS_AS(simulate_one(crd, 0, 10), std::invalid_argument);
    CHECK_THROWS_AS(simulate_one(crd, 10, 0), std::invalid_argument);
    // RAND planned for 8 cannot be simulated with n = 10.
    CHECK_THROWS_AS(simulate_one(make_config(ProcedureKind::RAND, k11, {}, 8), 10, 10), std::invalid_argument);
    // Memory bound.
    CHECK_THROWS_AS(simulate_one(crd, 1 << 20, 1 << 10), std::length_error);
}

TEST_CASE("check_invariants flags corrupted results") {
    auto sr = simulate_one(make_config(ProcedureKind::BSD, k11, {.b = 3}), 40, 200, 3);
    REQUIRE(check_invariants(sr).empty());

    SUBCASE("row sum") {
        sr.probs[0] += 1e-9;
        const auto problems = check_invariants(sr);
        REQUIRE(!problems.empty());
        CHECK(problems[0].find("sum") != std::string::npos);
    }
    SUBCASE("MTI") {
        for (int j = 0; j < sr.n; ++j) {
            sr.assignments[static_cast<std::size_t>(j)] = 0;
            sr.probs[static_cast<std::size_t>(2 * j)] = 1;
            sr.probs[static_cast<std::size_t>(2 * j + 1)] = 0;
        }
        const auto problems = check_invariants(sr);
        REQUIRE(!problems.empty());
        CHECK(problems[0].find("MTI") != std::string::npos);
    }
    SUBCASE("zero-probability draw") {
        sr.probs[0] = 1;
        sr.probs[1] = 0;
        sr.assignments[0] = 1;
        CHECK(!check_invariants(sr).empty());
    }
    SUBCASE("limit") {
        for (double& p : sr.probs) p = 0.75;
        CHECK(check_invariants(sr, 5).size() == 5);
    }
}

TEST_CASE("check_invariants: block balance and caps") {
    auto pbd = simulate_one(make_config(ProcedureKind::PBD, k4321, {.b = 1}), 40, 100, 3);
    CHECK(check_invariants(pbd).empty());
    // Swap two assignments across a block boundary.
    int r = 0;
    while (pbd.arm(r, 9) == pbd.arm(r, 10)) ++r;
    std::swap(pbd.assignments[static_cast<std::size_t>(r * 40 + 9)], pbd.assignments[static_cast<std::size_t>(r * 40 + 10)]);
    bool block_message = false;
    for (const auto& p : check_invariants(pbd)) block_message |= p.find("block") != std::string::npos;
    CHECK(block_message);
}
