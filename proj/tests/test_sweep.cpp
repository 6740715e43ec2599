#include <doctest.h>

#include <cmath>

#include "cdmara/analytic.hpp"
#include "cdmara/numerics.hpp"
#include "cdmara/sweep.hpp"

using namespace cdmara;
using namespace cdmara::sweep;

namespace {

SystemParams with_eta_db(double db) {
    SystemParams p;
    p.eta_th = db_to_linear(db);
    return p;
}

}  // namespace

TEST_CASE("maximum over lambda matches a dense grid") {
    const SystemParams p;
    double best = 0.0;
    double best_at = 0.0;
    for (int i = 0; i <= 10000; ++i) {
        const double lambda = 0.01 + (60.0 - 0.01) * i / 10000.0;
        const double s = analytic::throughput_sum(lambda, p, Scheme::Conventional);
        if (s > best) {
            best = s;
            best_at = lambda;
        }
    }
    const auto m = max_throughput(p, Scheme::Conventional);
    CHECK(m.bracketed);
    CHECK(m.s_star >= best - 1e-12);
    CHECK(m.s_star - best < 1e-6);
    CHECK(std::abs(m.lambda_star - best_at) < 0.01);
    CHECK(m.lambda_star > 18.1);
    CHECK(m.lambda_star < 18.4);
    CHECK(m.s_star == doctest::Approx(6.7).epsilon(0.02));

    const auto inv = max_throughput(p, Scheme::AdaptiveInversion);
    CHECK(inv.s_star == doctest::Approx(12.4).epsilon(0.05));
}

TEST_CASE("inversion maximum is independent of the outage") {
    SystemParams a, b, c;
    a.outage = 0.0;
    b.outage = 0.5;
    c.outage = 0.9;
    const auto ma = max_throughput(a, Scheme::AdaptiveInversion);
    CHECK(max_throughput(b, Scheme::AdaptiveInversion).s_star == ma.s_star);
    CHECK(max_throughput(c, Scheme::AdaptiveInversion).s_star == ma.s_star);
}

TEST_CASE("collision-free limits") {
    const struct {
        double eta_db;
        double conv, cst, inv;
    } cases[] = {{1.0, 19.0, 30.2, 37.9}, {5.0, 7.8, 11.0, 13.9}, {10.0, 2.69, 3.23, 3.81}};
    for (const auto& c : cases) {
        const SystemParams p = with_eta_db(c.eta_db);
        CAPTURE(c.eta_db);
        CHECK(limit_throughput(p, Scheme::Conventional).s_star == doctest::Approx(c.conv).epsilon(0.03));
        CHECK(limit_throughput(p, Scheme::AdaptiveConstant).s_star == doctest::Approx(c.cst).epsilon(0.03));
        CHECK(limit_throughput(p, Scheme::AdaptiveInversion).s_star == doctest::Approx(c.inv).epsilon(0.03));
        for (Scheme s : kAllSchemes) CHECK(limit_throughput(p, s).s_star >= max_throughput(p, s).s_star);
    }
}

TEST_CASE("sequences needed for a fraction of the limit") {
    for (Scheme s : kAllSchemes) {
        const auto f1 = sequences_for_fraction(with_eta_db(1.0), s, 0.8);
        CHECK(f1.reached);
        CHECK(f1.below.value_or(0) <= 128);
        CHECK(f1.n_seq >= 128);
        CHECK(f1.crossing >= static_cast<double>(*f1.below));
        CHECK(f1.crossing <= static_cast<double>(f1.n_seq));

        const auto f10 = sequences_for_fraction(with_eta_db(10.0), s, 0.8);
        CHECK(f10.n_seq == 32);
        CHECK(f10.below == std::uint64_t{16});

        const auto tiny = sequences_for_fraction(SystemParams{}, s, 1e-9);
        CHECK(tiny.n_seq == 2);
        CHECK(!tiny.below);

        const auto all = sequences_for_fraction(SystemParams{}, s, 0.99999);
        CHECK(!all.reached);
    }
    CHECK_THROWS(sequences_for_fraction(SystemParams{}, Scheme::Conventional, 0.0));
}

TEST_CASE("crossover of inversion and conventional access") {
    SystemParams p;
    p.outage = 0.2;
    const auto x = crossover_lambda(p, Scheme::AdaptiveInversion, Scheme::Conventional, 16.0, 30.0);
    REQUIRE(x);
    CHECK(std::abs(*x - 22.6) < 0.5);
    CHECK(analytic::throughput_sum(*x + 0.1, p, Scheme::AdaptiveInversion) <
          analytic::throughput_sum(*x + 0.1, p, Scheme::Conventional));
    CHECK(analytic::throughput_sum(*x - 0.1, p, Scheme::AdaptiveInversion) >
          analytic::throughput_sum(*x - 0.1, p, Scheme::Conventional));
    CHECK(!crossover_lambda(p, Scheme::AdaptiveInversion, Scheme::Conventional, 1.0, 10.0));
}

TEST_CASE("z score") {
    CHECK(z_score(1.0, 0.5, 0.25) == 2.0);
    CHECK(z_score(1.0, 1.0, 0.0) == 0.0);
    CHECK(z_score(1.0, 0.5, 0.0) == INFINITY);
    CHECK(z_score(0.5, 1.0, 0.0) == -INFINITY);
}

TEST_CASE("sweep rows") {
    SweepSpec spec;
    spec.axis = Axis::Lambda;
    spec.values = {5.0, 10.0};
    spec.mode = Mode::Both;
    spec.slots = 2000;
    const auto r = run_sweep(spec);
    REQUIRE(r.rows.size() == 6);
    CHECK(r.rows[0].scheme == Scheme::Conventional);
    CHECK(r.rows[1].scheme == Scheme::AdaptiveConstant);
    CHECK(r.rows[3].axis_value == 10.0);
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        const auto& row = r.rows[i];
        CHECK(row.seed == numerics::derive_seed(42, i));
        CHECK(row.analytic);
        CHECK(row.simulated);
        CHECK(row.z);
        CHECK(row.error.empty());
        CHECK(!row.maximized);
        CHECK(*row.analytic == analytic::throughput_sum(row.lambda, row.params, row.scheme));
    }
    CHECK(r.max_tail_bound < 1e-15);

    spec.threads = 4;
    const auto again = run_sweep(spec);
    for (std::size_t i = 0; i < r.rows.size(); ++i) CHECK(*again.rows[i].simulated == *r.rows[i].simulated);
}

TEST_CASE("sweep over non-lambda axes maximizes") {
    SweepSpec spec;
    spec.schemes = {Scheme::Conventional};
    spec.axis = Axis::NSeq;
    spec.values = {64.0, 128.0, 256.0, INFINITY};
    const auto r = run_sweep(spec);
    REQUIRE(r.rows.size() == 4);
    CHECK(r.rows[0].maximized);
    CHECK(*r.rows[0].analytic == doctest::Approx(5.9).epsilon(0.03));
    CHECK(*r.rows[1].analytic == doctest::Approx(6.7).epsilon(0.03));
    CHECK(*r.rows[2].analytic == doctest::Approx(7.2).epsilon(0.03));
    CHECK(!r.rows[3].params.n_seq);
    CHECK(*r.rows[3].analytic == limit_throughput(SystemParams{}, Scheme::Conventional).s_star);

    spec.axis = Axis::Outage;
    spec.values = {0.7};
    CHECK(run_sweep(spec).rows[0].params.outage == 0.7);

    spec.axis = Axis::EtaDb;
    spec.values = {10.0};
    CHECK(run_sweep(spec).rows[0].params.eta_th == doctest::Approx(10.0));
}

TEST_CASE("sweep specs are validated") {
    SweepSpec spec;
    CHECK_THROWS_AS(validate_spec(spec), ParamError);
    spec.values = {1.0};
    CHECK_NOTHROW(validate_spec(spec));
    spec.schemes.clear();
    CHECK_THROWS_AS(validate_spec(spec), ParamError);
    spec.schemes = {Scheme::Conventional};
    spec.mode = Mode::Both;
    spec.slots = 0;
    CHECK_THROWS_AS(validate_spec(spec), ParamError);
}

TEST_CASE("a failing row does not stop the sweep") {
    SweepSpec spec;
    spec.schemes = {Scheme::Conventional};
    spec.axis = Axis::Outage;
    spec.values = {0.5, 1.5, 2.0};
    const auto r = run_sweep(spec);
    REQUIRE(r.rows.size() == 3);
    CHECK(r.rows[0].error.empty());
    CHECK(r.rows[0].analytic);
    CHECK(!r.rows[1].error.empty());
    CHECK(!r.rows[1].analytic);
    CHECK(!r.rows[2].error.empty());
}
