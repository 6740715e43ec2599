#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cdmara/analytic.hpp"
#include "cdmara/numerics.hpp"
#include "oracles.hpp"

using namespace cdmara;
using namespace cdmara::analytic;

namespace {

SystemParams fig3() {
    SystemParams p;
    p.outage = 0.2;
    return p;
}

// Monte Carlo capture rate of station 0 among k transmitters with gains
// max(Exp(1), g_th) and a matched-filter SINR, drawn with the standard library.
struct McResult {
    double p;
    double se;
};
McResult capture_oracle(std::uint64_t k, double g_th, double n, double eta, double noise, int trials,
                        unsigned seed) {
    std::mt19937_64 gen(seed);
    std::exponential_distribution<double> exp1(1.0);
    auto gain = [&] { return std::max(exp1(gen), g_th); };
    long hits = 0;
    for (int t = 0; t < trials; ++t) {
        const double g0 = gain();
        double w = 0.0;
        for (std::uint64_t i = 1; i < k; ++i) w += gain();
        if (g0 / (noise + w / n) > eta) ++hits;
    }
    const double p = static_cast<double>(hits) / trials;
    return {p, std::sqrt(p * (1.0 - p) / trials)};
}

// Closed expression for the constant-power scheme once the desired gain is
// known to exceed every possible interference level.
double const_case_b(std::uint64_t k, const SystemParams& p) {
    const double g_th = p.g_th();
    const double n = p.processing_gain;
    const double eta = p.eta_th;
    const double noise = 1.0 / p.snr;
    const double o = static_cast<double>(k - 1);
    return std::exp(-eta * (o * g_th / n + noise)) * std::pow(1.0 - std::exp(-g_th) * eta / (n + eta), o);
}

}  // namespace

TEST_CASE("collision probability") {
    CHECK(collision_prob(5, 1) == 0.0);
    CHECK(collision_prob(1, 1) == 0.0);
    CHECK(collision_prob(std::nullopt, 50) == 0.0);
    CHECK(collision_prob(2, 2) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(collision_prob(128, 2) == doctest::Approx(0.0078125).epsilon(1e-14));
    CHECK(collision_prob(1, 3) == 1.0);
    CHECK(collision_prob(128, 40) == doctest::Approx(1.0 - std::pow(127.0 / 128.0, 39)).epsilon(1e-13));
    CHECK_THROWS_AS(collision_prob(128, 0), DomainError);
}

TEST_CASE("ps_conv") {
    const SystemParams p;
    CHECK(ps_conv(1, p) == doctest::Approx(std::exp(-0.00316227766)).epsilon(1e-10));
    CHECK(ps_conv(1, p) == doctest::Approx(0.996843).epsilon(1e-6));
    SystemParams quiet = p;
    quiet.snr = INFINITY;
    CHECK(ps_conv(1, quiet) == 1.0);
    for (std::uint64_t k = 1; k < 200; ++k) CHECK(ps_conv(k + 1, p) < ps_conv(k, p));

    const auto mc = capture_oracle(5, 0.0, 64.0, p.eta_th, 0.001, 10000000, 5);
    CHECK(std::abs(ps_conv(5, p) - mc.p) < 3.0 * mc.se);
}

TEST_CASE("ps_const") {
    const SystemParams p;
    CHECK(ps_const(1, p) == 1.0);
    for (std::uint64_t k = 1; k <= 150; ++k) {
        const double v = ps_const(k, p);
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
        if (k > 1) CHECK(v <= ps_const(k - 1, p) + 1e-12);
    }

    const auto mc = capture_oracle(10, p.g_th(), 64.0, p.eta_th, 0.001, 10000000, 10);
    CHECK(std::abs(ps_const(10, p) - mc.p) < 3.0 * mc.se);

    // Beyond the boundary every k uses the closed expression.
    const auto split = case_split(p);
    const auto kb = static_cast<std::uint64_t>(std::floor(split.k_boundary));
    CHECK(kb == 21);
    for (std::uint64_t k = kb + 1; k < kb + 30; ++k)
        CHECK(ps_const(k, p) == doctest::Approx(const_case_b(k, p)).epsilon(1e-12));

    // At the last case-A k, the closed expression misses only the atom's
    // contribution and stays close.
    CHECK(std::abs(ps_const(kb, p) - const_case_b(kb, p)) < 0.01);
    CHECK(std::abs(ps_const(kb, p) - ps_const(kb + 1, p)) < 0.05);
}

TEST_CASE("ps_const reduces to ps_conv as the threshold vanishes") {
    SystemParams p;
    p.outage = 1e-12;
    double worst = 0.0;
    for (std::uint64_t k = 1; k <= 100; ++k) worst = std::max(worst, std::abs(ps_const(k, p) - ps_conv(k, p)));
    CHECK(worst < 1e-6);

    p.outage = 0.0;
    for (std::uint64_t k = 1; k <= 100; ++k) CHECK(ps_const(k, p) == ps_conv(k, p));
}

TEST_CASE("interference dominance is reported, not required") {
    // Truncating interferer gains from below raises interference, so the
    // constant-power scheme can fall below conventional access at large k.
    int violations = 0;
    for (double eta_db : {1.0, 5.0, 10.0})
        for (double po : {0.05, 0.2, 0.5, 0.7, 0.9})
            for (std::uint64_t k = 1; k <= 60; ++k) {
                SystemParams p;
                p.eta_th = db_to_linear(eta_db);
                p.outage = po;
                if (ps_const(k, p) < ps_conv(k, p) - 1e-12) ++violations;
            }
    MESSAGE("ps_const < ps_conv at " << violations << " of " << 3 * 5 * 60 << " grid points");
}

TEST_CASE("ps_inv boundary rules") {
    SystemParams p;
    CHECK(ps_inv(1, p) == 1.0);
    CHECK(ps_inv(20, p) == 1.0);
    CHECK(inversion_k_max(p) == 21);
    CHECK(ps_inv(21, p) == 1.0);
    CHECK(ps_inv(22, p) == 0.0);
    // Direct SINR at k = 21 sits just above the threshold.
    CHECK(1.0 / (0.001 + 20.0 / 64.0) > p.eta_th);

    p.inversion_boundary = InversionBoundary::StrictFloor;
    CHECK(inversion_k_max(p) == 20);
    CHECK(ps_inv(20, p) == 1.0);
    CHECK(ps_inv(21, p) == 0.0);

    for (auto rule : {InversionBoundary::SumLimit, InversionBoundary::StrictFloor}) {
        SystemParams q;
        q.inversion_boundary = rule;
        q.snr = q.eta_th;
        for (std::uint64_t k = 1; k <= 5; ++k) CHECK(ps_inv(k, q) == 0.0);
    }

    // Independent of the transmission threshold.
    SystemParams a, b;
    a.outage = 0.0;
    b.outage = 0.95;
    for (std::uint64_t k = 1; k <= 40; ++k) CHECK(ps_inv(k, a) == ps_inv(k, b));
}

TEST_CASE("throughput sum") {
    const SystemParams p = fig3();
    for (Scheme s : kAllSchemes) {
        const double lambda = 1e-6;
        CHECK(throughput_sum(lambda, p, s) == doctest::Approx(lambda * ps(s, 1, p)).epsilon(1e-5));
    }
    CHECK(throughput_sum(18.1, p, Scheme::Conventional) == doctest::Approx(6.72).epsilon(0.002));
    CHECK(throughput_sum(18.1, p, Scheme::Conventional) == doctest::Approx(6.7).epsilon(0.02));
    CHECK_THROWS_AS(throughput_sum(0.0, p, Scheme::Conventional), DomainError);
    CHECK(truncation_tail_bound(40.0, p) < 1e-15);
}

TEST_CASE("closed forms agree with the generic sum") {
    for (SequenceCount n : {SequenceCount{1}, SequenceCount{64}, SequenceCount{128}, SequenceCount{}}) {
        SystemParams p = fig3();
        p.n_seq = n;
        double worst_conv = 0.0;
        double worst_inv = 0.0;
        for (double lambda = 0.25; lambda <= 40.0; lambda += 0.25) {
            const double c = throughput_sum(lambda, p, Scheme::Conventional);
            worst_conv = std::max(worst_conv, std::abs(c / throughput_conv_closed(lambda, p) - 1.0));
            const double i = throughput_sum(lambda, p, Scheme::AdaptiveInversion);
            const double ic = throughput_inv_closed(lambda, p);
            if (ic > 0.0) worst_inv = std::max(worst_inv, std::abs(i / ic - 1.0));
        }
        CHECK(worst_conv < 1e-9);
        CHECK(worst_inv < 1e-9);
    }

    SystemParams p;
    p.n_seq = std::nullopt;
    const double lambda = 7.0;
    CHECK(throughput_conv_closed(lambda, p) ==
          doctest::Approx(lambda * std::exp(-p.eta_th * (lambda / (p.eta_th + 64.0) + 0.001))).epsilon(1e-14));
    CHECK(throughput_conv_closed(1e-9, p) == doctest::Approx(1e-9 * std::exp(-p.eta_th * 0.001)).epsilon(1e-8));

    p.n_seq = 1;
    for (double l : {1.0, 2.0, 5.0}) CHECK(throughput_inv_closed(l, p) == doctest::Approx(l * std::exp(-l)));
}

TEST_CASE("success curve caches values") {
    SuccessCurve curve(fig3(), Scheme::AdaptiveConstant);
    const auto s = curve.upto(30);
    CHECK(s.size() == 30);
    CHECK(curve.at(7) == ps_const(7, fig3()));
    CHECK(curve.upto(10).size() == 10);
}
