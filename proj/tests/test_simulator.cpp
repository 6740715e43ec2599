#include <doctest.h>

#include <cmath>
#include <map>

#include "cdmara/analytic.hpp"
#include "cdmara/numerics.hpp"
#include "cdmara/simulator.hpp"
#include "oracles.hpp"

using namespace cdmara;
using namespace cdmara::sim;
using numerics::RngStream;

TEST_CASE("sample_gain") {
    RngStream rng(42, 0);
    constexpr int n = 1000000;

    double sum = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = sample_gain(rng, Scheme::AdaptiveConstant, 0.0);
        sum += g;
        sum_sq += g * g;
    }
    double mean = sum / n;
    double se = std::sqrt((sum_sq / n - mean * mean) / n);
    CHECK(std::abs(mean - 1.0) < 3.0 * se);

    const double g_th = 1.204;
    sum = sum_sq = 0.0;
    int atom = 0;
    for (int i = 0; i < n; ++i) {
        const double g = sample_gain(rng, Scheme::AdaptiveConstant, g_th);
        REQUIRE(g >= g_th);
        if (g == g_th) ++atom;
        sum += g;
        sum_sq += g * g;
    }
    CHECK(std::abs(static_cast<double>(atom) / n - (1.0 - std::exp(-g_th))) < 0.005);
    mean = sum / n;
    se = std::sqrt((sum_sq / n - mean * mean) / n);
    CHECK(std::abs(mean - (std::exp(-g_th) + g_th)) < 3.0 * se);

    // Conventional access ignores the threshold.
    bool below = false;
    for (int i = 0; i < 1000; ++i) below |= sample_gain(rng, Scheme::Conventional, g_th) < g_th;
    CHECK(below);
}

TEST_CASE("slot outcomes conserve transmitters") {
    SystemParams p;
    SlotScratch scratch;
    for (Scheme s : kAllSchemes) {
        RngStream rng(3, static_cast<std::uint64_t>(s));
        for (int i = 0; i < 5000; ++i) {
            const auto o = simulate_slot(rng, p, s, 18.1, scratch);
            REQUIRE(o.successes + o.collided + o.capture_failed == o.k);
            REQUIRE(o.k <= p.stations);
        }
    }
}

TEST_CASE("empty slot") {
    SystemParams p;
    RngStream rng(5, 0);
    bool seen = false;
    for (int i = 0; i < 1000 && !seen; ++i) {
        const auto o = simulate_slot(rng, p, Scheme::Conventional, 0.05);
        if (o.k == 0) {
            CHECK(o == SlotOutcome{0, 0, 0, 0});
            seen = true;
        }
    }
    CHECK(seen);
}

TEST_CASE("a single sequence makes every multi-access slot collide") {
    SystemParams p;
    p.n_seq = 1;
    SlotScratch scratch;
    RngStream rng(9, 0);
    for (std::uint64_t k = 2; k < 30; ++k) {
        const auto o = simulate_slot_with_k(rng, p, Scheme::Conventional, k, scratch);
        CHECK(o.collided == k);
        CHECK(o.successes == 0);
    }
}

TEST_CASE("lone conventional transmitter") {
    SystemParams p;
    SlotScratch scratch;
    RngStream rng(17, 0);
    constexpr int n = 1000000;
    int hits = 0;
    for (int i = 0; i < n; ++i) hits += static_cast<int>(simulate_slot_with_k(rng, p, Scheme::Conventional, 1, scratch).successes);
    const double rate = static_cast<double>(hits) / n;
    const double se = std::sqrt(rate * (1.0 - rate) / n);
    CHECK(std::abs(rate - 0.996843) < 3.0 * se);
}

TEST_CASE("inversion beyond the boundary never captures") {
    SystemParams p;
    p.n_seq = std::nullopt;
    SlotScratch scratch;
    RngStream rng(19, 0);
    for (int i = 0; i < 2000; ++i) {
        CHECK(simulate_slot_with_k(rng, p, Scheme::AdaptiveInversion, 25, scratch).successes == 0);
        CHECK(simulate_slot_with_k(rng, p, Scheme::AdaptiveInversion, 21, scratch).successes == 21);
    }
}

TEST_CASE("inversion outcomes do not depend on the threshold") {
    SystemParams a, b;
    a.outage = 0.0;
    b.outage = 0.9;
    RngStream ra(23, 0), rb(23, 0);
    SlotScratch sa, sb;
    for (int i = 0; i < 5000; ++i)
        REQUIRE(simulate_slot(ra, a, Scheme::AdaptiveInversion, 15.0, sa) ==
                simulate_slot(rb, b, Scheme::AdaptiveInversion, 15.0, sb));
}

TEST_CASE("arrival counts are Poisson") {
    SystemParams p;
    const double lambda = 18.1;
    RngStream rng(29, 0);
    SlotScratch scratch;
    constexpr int n = 200000;
    std::map<std::uint64_t, int> hist;
    for (int i = 0; i < n; ++i) ++hist[simulate_slot(rng, p, Scheme::Conventional, lambda, scratch).k];

    // Pool the tails so every bin expects at least 5 counts.
    std::vector<double> expected;
    std::vector<double> observed;
    double e_acc = 0.0;
    double o_acc = 0.0;
    const auto kt = numerics::poisson_truncation(lambda);
    for (std::uint64_t k = 0; k <= kt; ++k) {
        e_acc += n * numerics::poisson_pmf(k, lambda);
        o_acc += hist.count(k) ? hist[k] : 0;
        if (e_acc >= 5.0 && n * (1.0 - numerics::poisson_cdf(k, lambda)) >= 5.0) {
            expected.push_back(e_acc);
            observed.push_back(o_acc);
            e_acc = o_acc = 0.0;
        }
    }
    expected.back() += e_acc;
    observed.back() += o_acc;
    double chi2 = 0.0;
    for (std::size_t i = 0; i < expected.size(); ++i)
        chi2 += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
    const double dof = static_cast<double>(expected.size() - 1);
    CHECK(chi2 < oracle::chi2_critical(dof, 3.09));
}

TEST_CASE("throughput estimates") {
    SystemParams p;
    p.outage = 0.2;
    const auto conv = estimate_throughput(p, Scheme::Conventional, 18.1, 100000, 42);
    CHECK(conv.slots == 100000);
    CHECK(conv.std_error > 0.0);
    CHECK(std::abs(conv.mean - analytic::throughput_sum(18.1, p, Scheme::Conventional)) < 3.0 * conv.std_error);
    // Published values carry one decimal, so allow half a unit of rounding.
    CHECK(std::abs(conv.mean - 6.7) < 0.05 + 3.0 * conv.std_error);

    p.outage = 0.7;
    const auto cst = estimate_throughput(p, Scheme::AdaptiveConstant, 12.9, 100000, 42);
    CHECK(std::abs(cst.mean - analytic::throughput_sum(12.9, p, Scheme::AdaptiveConstant)) < 3.0 * cst.std_error);
    CHECK(std::abs(cst.mean - 10.0) < 0.05 + 3.0 * cst.std_error);

    // Without a threshold worth meeting or sequence collisions, every arrival succeeds.
    SystemParams easy;
    easy.eta_th = 1e-9;
    easy.n_seq = std::nullopt;
    const auto all = estimate_throughput(easy, Scheme::Conventional, 6.0, 100000, 1);
    CHECK(std::abs(all.mean - 6.0) < 3.0 * all.std_error);

    const auto one = estimate_throughput(p, Scheme::Conventional, 18.1, 1, 42);
    CHECK(one.degenerate);
    CHECK(one.std_error == 0.0);
}

TEST_CASE("estimates do not depend on the worker count") {
    SystemParams p;
    for (Scheme s : kAllSchemes) {
        const auto a = estimate_throughput(p, s, 15.0, 30000, 99, 1);
        const auto b = estimate_throughput(p, s, 15.0, 30000, 99, 8);
        CHECK(a.mean == b.mean);
        CHECK(a.std_error == b.std_error);
        const auto c = estimate_ps_given_k(p, s, 10, 30000, 99, 1);
        const auto d = estimate_ps_given_k(p, s, 10, 30000, 99, 3);
        CHECK(c.mean == d.mean);
    }
    CHECK(estimate_throughput(p, Scheme::Conventional, 15.0, 30000, 99).mean !=
          estimate_throughput(p, Scheme::Conventional, 15.0, 30000, 100).mean);
}

TEST_CASE("success probability estimates") {
    SystemParams p;
    CHECK(estimate_ps_given_k(p, Scheme::AdaptiveInversion, 1, 10000, 1).mean == 1.0);
    CHECK(estimate_ps_given_k(p, Scheme::AdaptiveInversion, 21, 10000, 1).mean == 1.0);
    CHECK(estimate_ps_given_k(p, Scheme::AdaptiveInversion, 22, 10000, 1).mean == 0.0);

    const auto est = estimate_ps_given_k(p, Scheme::AdaptiveConstant, 10, 1000000, 7);
    CHECK(std::abs(est.mean - analytic::ps_const(10, p)) < 3.0 * est.std_error);
}
