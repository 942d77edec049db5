#include "doctest.h"

#include <cmath>
#include <sstream>

#include "endow/pricing.hpp"
#include "support.hpp"

using namespace endow;

namespace {

struct Run {
    ModelSpec spec;
    BondSurface surface;
    PathBundle bundle;
    FilterSet filters;
    BsdeSolution pure, claim;
};

Run solve(const ModelSpec& s, int steps, std::size_t paths, std::uint64_t seed = 1) {
    Run r;
    r.spec = s;
    PdeOptions pde;
    pde.n_mu = 48;
    pde.n_y = 8;
    pde.n_t = 100;
    r.surface = build_bond_surface(s, pde);
    SimulationOptions so;
    so.n_paths = paths;
    so.seed = seed;
    r.bundle = simulate_paths(s, TimeGrid(s.horizon, steps), r.surface, so);
    r.filters = compute_filters(s, r.bundle);
    r.pure = solve_pure_investment_bsde(s, r.bundle, r.surface, &r.filters, {});
    r.claim = solve_claim_bsde(s, r.bundle, r.filters, r.surface, &r.pure, {});
    return r;
}

}  // namespace

TEST_CASE("node summaries") {
    NodeField f(2, 101);
    for (std::size_t p = 0; p <= 100; ++p) {
        f(0, p) = static_cast<double>(p);
        f(1, p) = 3.0;
    }
    const NodeSummary s = summarize(f);
    CHECK(s.mean[0] == doctest::Approx(50.0));
    CHECK(s.q05[0] == doctest::Approx(5.0));
    CHECK(s.q95[0] == doctest::Approx(95.0));
    CHECK(s.q05[1] == 3.0);
}

TEST_CASE("indifference price in the deterministic benchmark") {
    const Run r = solve(testing::deterministic_spec(), 50, 3000);
    const IndifferencePrice p = indifference_price(r.spec, r.claim, r.pure, r.bundle, r.filters, r.surface, {});
    CHECK(p.headline == doctest::Approx(testing::deterministic_price(1.0, 1.0, 0.05)).epsilon(1e-4));
    CHECK(p.headline_std_error < 1e-6);
    CHECK(p.min_price >= 0.0);
    CHECK(p.max_price <= 1.0 + 1e-9);
    for (std::size_t p_ = 0; p_ < r.bundle.n_paths; ++p_)
        for (std::size_t i = 0; i <= 50; ++i)
            if (r.bundle.tau[p_] <= r.bundle.grid.t(static_cast<int>(i))) CHECK(p.price(i, p_) == 0.0);
    CHECK(actuarial_price(r.spec, r.bundle, r.filters) == doctest::Approx(std::exp(-0.05)).epsilon(1e-10));
}

TEST_CASE("zero claim prices at zero") {
    ModelSpec s = testing::cir_spec(0.5, 0.02, 0.1, 0.015, 1.0, -0.1);
    s.claim = Claim::constant(0.0);
    const Run r = solve(s, 20, 2000);
    const IndifferencePrice p = indifference_price(s, r.claim, r.pure, r.bundle, r.filters, r.surface, {});
    for (double v : p.price.raw()) CHECK(v == 0.0);
}

TEST_CASE("strategies: Merton term, premia and 1/alpha homogeneity") {
    const Run r = solve(testing::deterministic_spec(1.0, 1.0, 0.05, 0.3), 10, 500);
    const StrategySeries th = optimal_strategy_pure(r.spec, r.surface, r.bundle, r.pure);
    for (double v : th.theta1.raw()) CHECK(v == doctest::Approx(0.3 / 0.2).epsilon(1e-8));
    for (double v : th.theta2.raw()) CHECK(v == 0.0);
    for (double a : th.admissibility) CHECK(a == doctest::Approx(0.09).epsilon(1e-8));

    ModelSpec twice = r.spec;
    twice.risk_aversion = 2.0;
    const StrategySeries half = optimal_strategy(twice, r.surface, r.bundle, r.pure.z1, r.pure.z2, r.pure.z3);
    for (std::size_t k = 0; k < half.theta1.raw().size(); ++k)
        CHECK(half.theta1.raw()[k] == doctest::Approx(0.5 * th.theta1.raw()[k]));

    const Run zero = solve(testing::deterministic_spec(1.0, 1.0, 0.05, 0.0), 10, 500);
    const StrategySeries none = optimal_strategy_claim(zero.spec, zero.surface, zero.bundle, zero.claim, &zero.pure);
    for (double v : none.theta1.raw()) CHECK(std::abs(v) < 1e-9);
}

TEST_CASE("bond strategy with one mortality factor") {
    // d = 0: theta2 = (muB + c z2) / (alpha c^2); with z = 0 this is alpha_mu / (alpha c).
    const ModelSpec s = testing::cir_spec(0.5, 0.02, 0.1, 0.015, 1.0, -0.2);
    const Run r = solve(s, 10, 500);
    const StrategySeries th = optimal_strategy_pure(s, r.surface, r.bundle, r.pure);
    for (std::size_t p = 0; p < 20; ++p) {
        const MarketPoint m = market_point(s, r.surface, r.bundle, 3, p);
        CHECK(m.d == 0.0);
        CHECK(th.theta2(3, p) ==
              doctest::Approx((m.bond_drift + m.c * r.pure.z2(3, p)) / (m.c * m.c)).epsilon(1e-10));
    }
}

TEST_CASE("wealth bookkeeping and driftless gains") {
    const Run r = solve(testing::deterministic_spec(1.0, 1.0, 0.05, 0.0), 20, 20000);
    StrategySeries zero{NodeField(20, 20000), NodeField(20, 20000), std::vector<double>(20000, 0.0)};
    const WealthSeries w0 = wealth_trajectory(r.spec, r.surface, r.bundle, zero, 3.0);
    for (double v : w0.wealth.raw()) CHECK(v == 3.0);

    StrategySeries flat{NodeField(20, 20000, 2.0), NodeField(20, 20000), std::vector<double>(20000, 0.0)};
    const WealthSeries w = wealth_trajectory(r.spec, r.surface, r.bundle, flat, 1.0);
    CHECK(w.bookkeeping_error < 1e-12);
    double s = 0, s2 = 0;
    for (std::size_t p = 0; p < 20000; ++p) {
        const double x = w.wealth(20, p);
        s += x;
        s2 += x * x;
    }
    const double mean = s / 20000;
    const double se = std::sqrt((s2 / 20000 - mean * mean) / 19999);
    CHECK(std::abs(mean - 1.0) < 3 * se);
}

TEST_CASE("martingale diagnostic") {
    NodeField one(11, 100, 0.0), flat(11, 100, 5.0);
    const MartingaleStats c = martingale_diagnostic(one, flat, 1.0, 5.0);
    for (double m : c.mean_increment) CHECK(m == 0.0);
    CHECK(c.fraction_insignificant == 1.0);

    // Deterministic increasing value with no wealth: every step is significantly positive.
    NodeField up(11, 100);
    for (std::size_t i = 0; i <= 10; ++i)
        for (std::size_t p = 0; p < 100; ++p) up(i, p) = 0.01 * static_cast<double>(i);
    const MartingaleStats u = martingale_diagnostic(up, flat, 1.0, 5.0);
    CHECK(u.fraction_positive == 1.0);
}

TEST_CASE("price report and CSV exports") {
    const Run r = solve(testing::deterministic_spec(), 10, 2000);
    const PriceReport rep = build_price_report(r.spec, r.bundle, r.filters, r.surface, r.claim, r.pure, {});
    CHECK(rep.wealth.bookkeeping_error < 1e-12);
    CHECK(std::isfinite(rep.max_admissibility));
    std::ostringstream ts;
    write_term_structure_csv(rep, r.bundle.grid, ts);
    std::istringstream in(ts.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,p_alpha_mean,p_alpha_q05,p_alpha_q95,theta1_mean,theta2_mean");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 11);
    std::ostringstream sp;
    write_strategy_csv(rep, r.bundle.grid, sp);
    CHECK(sp.str().rfind("t,theta1_mean", 0) == 0);
}
