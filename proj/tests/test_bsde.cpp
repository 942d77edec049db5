#include "doctest.h"

#include <cmath>

#include "endow/bsde.hpp"
#include "endow/error.hpp"
#include "support.hpp"

using namespace endow;

namespace {

struct Run {
    ModelSpec spec;
    BondSurface surface;
    PathBundle bundle;
    FilterSet filters;
};

Run setup(const ModelSpec& s, int steps, std::size_t paths, std::uint64_t seed = 1) {
    Run r{s, {}, {}, {}};
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
    return r;
}

}  // namespace

TEST_CASE("pure generator formula") {
    const MarketPoint m{0.06, 0.2, 0.01, -0.1, 0.0};
    CHECK(pure_generator(m, 0, 0, 0) == doctest::Approx(0.09 + 0.01));
    CHECK(pure_generator(m, 0.1, 0.2, 0.3) ==
          doctest::Approx(-(0.01 + 0.04 + 0.09) + 0.16 + (0.01 - 0.02) * (0.01 - 0.02) / 0.01));
    const MarketPoint flat{0.06, 0.2, 0.0, 0.0, 0.0};
    CHECK(pure_generator(flat, 0, 0.5, 0.5) == doctest::Approx(0.09 - 0.5));
    const MarketPoint bad{0.06, 0.2, 0.01, 0.0, 0.0};
    try {
        pure_generator(bad, 0, 0, 0);
        FAIL("expected ZERO_VOL");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroVol);
    }
}

TEST_CASE("deterministic market: pure value is minus half the squared Sharpe ratio") {
    const Run r = setup(testing::deterministic_spec(), 20, 2000);
    const BsdeSolution u = solve_pure_investment_bsde(r.spec, r.bundle, r.surface, &r.filters, {});
    for (int i = 0; i <= 20; ++i) CHECK(u.mean(static_cast<std::size_t>(i)) == doctest::Approx(-0.045 * (1 - r.bundle.grid.t(i))).epsilon(1e-9));
    for (double z : u.z1.raw()) CHECK(std::abs(z) < 1e-9);
}

TEST_CASE("zero premia give zero value and zero integrands") {
    const Run r = setup(testing::deterministic_spec(1.0, 1.0, 0.05, 0.0), 10, 1000);
    const BsdeSolution u = solve_pure_investment_bsde(r.spec, r.bundle, r.surface, &r.filters, {});
    for (double v : u.value.raw()) CHECK(v == 0.0);
    for (double v : u.z2.raw()) CHECK(v == 0.0);
}

TEST_CASE("zero claim reproduces the pure-investment value exactly") {
    ModelSpec s = testing::cir_spec(0.5, 0.02, 0.1, 0.015, 2.0, -0.1);
    s.claim = Claim::constant(0.0);
    s.lambda = MortalityFunction(MortalityFunction::Family::Additive, {0.01, 0.05});
    const Run r = setup(s, 25, 3000);
    const BsdeSolution pure = solve_pure_investment_bsde(s, r.bundle, r.surface, &r.filters, {});
    const BsdeSolution claim = solve_claim_bsde(s, r.bundle, r.filters, r.surface, &pure, {});
    CHECK(claim.value.raw() == pure.value.raw());
}

TEST_CASE("deterministic claim value follows the closed form") {
    const ModelSpec s = testing::deterministic_spec();
    const Run r = setup(s, 50, 2000);
    const BsdeSolution pure = solve_pure_investment_bsde(s, r.bundle, r.surface, &r.filters, {});
    const BsdeSolution claim = solve_claim_bsde(s, r.bundle, r.filters, r.surface, &pure, {});
    const double expected = std::log1p(std::expm1(1.0) * std::exp(-0.05)) - 0.045;
    CHECK(claim.value_at_zero() == doctest::Approx(expected).epsilon(1e-4));

    BsdeOptions zero;
    zero.post_death = PostDeathValue::Zero;
    const BsdeSolution claim0 = solve_claim_bsde(s, r.bundle, r.filters, r.surface, nullptr, zero);
    const OracleSeries o = ode_oracle(s, r.bundle.grid, PostDeathValue::Zero);
    CHECK(claim0.value_at_zero() == doctest::Approx(o.claim[0]).epsilon(1e-4));
    CHECK_THROWS_AS(solve_claim_bsde(s, r.bundle, r.filters, r.surface, nullptr, {}), Error);
}

TEST_CASE("ODE reference closed forms") {
    const ModelSpec s = testing::deterministic_spec(1.0, 1.0, 0.05, 0.3);
    const OracleSeries o = ode_oracle(s, TimeGrid(1.0, 10), PostDeathValue::PureInvestment);
    CHECK(o.t.size() == 11);
    CHECK(o.pure[0] == doctest::Approx(-0.045).epsilon(1e-12));
    CHECK(o.claim[0] - o.pure[0] == doctest::Approx(std::log1p(std::expm1(1.0) * std::exp(-0.05))).epsilon(1e-10));
    CHECK(o.claim[10] == 1.0);

    const ModelSpec small = testing::deterministic_spec(0.01, 1.0, 0.05, 0.0);
    const OracleSeries os = ode_oracle(small, TimeGrid(1.0, 10), PostDeathValue::PureInvestment);
    CHECK(os.claim[0] / 0.01 == doctest::Approx(100 * std::log1p(std::expm1(0.01) * std::exp(-0.05))).epsilon(1e-10));

    // CIR intensity with premium on a one-factor bond: Sharpe ratio of the bond is alpha_mu.
    const ModelSpec cir = testing::cir_spec(0.5, 0.02, 0.1, 0.015, 1.0, -0.2);
    const OracleSeries oc = ode_oracle(cir, TimeGrid(1.0, 10), PostDeathValue::PureInvestment);
    CHECK(oc.pure[0] == doctest::Approx(-0.5 * (0.09 + 0.04)).epsilon(1e-10));
}

TEST_CASE("ODE reference declines random coefficients") {
    ModelSpec s = testing::deterministic_spec();
    CHECK_FALSE(oracle_unavailable(s).has_value());
    s.claim = Claim::capped_call(1.0, 0.5);
    CHECK(oracle_unavailable(s).has_value());
    s = testing::cir_spec();
    s.lambda = MortalityFunction(MortalityFunction::Family::Multiplicative, {1.0, 2.0});
    CHECK(oracle_unavailable(s).has_value());
    s = testing::cir_spec();
    s.mu_S = CoefficientFunction::affine(0.06, 0, 0, 1.0);
    s.sigma_Y = CoefficientFunction::constant(0.1);
    CHECK(oracle_unavailable(s).has_value());
    CHECK_THROWS_AS(ode_oracle(s, TimeGrid(5.0, 10), PostDeathValue::PureInvestment), Error);
}

TEST_CASE("random horizon assembly") {
    const ModelSpec s = testing::deterministic_spec(1.0, 1.0, 0.5);
    const Run r = setup(s, 10, 500);
    const BsdeSolution pure = solve_pure_investment_bsde(s, r.bundle, r.surface, &r.filters, {});
    const BsdeSolution claim = solve_claim_bsde(s, r.bundle, r.filters, r.surface, &pure, {});
    const RandomHorizonSolution g = assemble_random_horizon(claim, r.bundle, &pure);
    for (std::size_t p = 0; p < 500; ++p)
        for (std::size_t i = 0; i <= 10; ++i) {
            const double t = r.bundle.grid.t(static_cast<int>(i));
            if (t < r.bundle.tau[p])
                CHECK(g.value(i, p) == claim.value(i, p));
            else
                CHECK(g.value(i, p) == pure.value(i, p));
            if (t > r.bundle.tau[p]) CHECK(g.jump_integrand(i, p) == 0.0);
        }
}

TEST_CASE("value bound breach is reported as divergence") {
    ModelSpec s = testing::deterministic_spec(5.0, 2.0);
    const Run r = setup(s, 10, 500);
    BsdeOptions o;
    o.value_bound = 1.0;
    try {
        const BsdeSolution pure = solve_pure_investment_bsde(s, r.bundle, r.surface, &r.filters, o);
        solve_claim_bsde(s, r.bundle, r.filters, r.surface, &pure, o);
        FAIL("expected DIVERGED");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Diverged);
    }
}

TEST_CASE("solution does not depend on the worker count") {
    ModelSpec s = testing::cir_spec(0.5, 0.02, 0.1, 0.015, 1.0, -0.1);
    s.claim = Claim::survival_indexed(1.0);
    const Run r = setup(s, 10, 9000);
    BsdeOptions o1, o3;
    o3.threads = 3;
    const BsdeSolution a = solve_pure_investment_bsde(s, r.bundle, r.surface, &r.filters, o1);
    const BsdeSolution b = solve_pure_investment_bsde(s, r.bundle, r.surface, &r.filters, o3);
    CHECK(a.value.raw() == b.value.raw());
    const BsdeSolution ca = solve_claim_bsde(s, r.bundle, r.filters, r.surface, &a, o1);
    const BsdeSolution cb = solve_claim_bsde(s, r.bundle, r.filters, r.surface, &b, o3);
    CHECK(ca.value.raw() == cb.value.raw());
    CHECK(ca.z2.raw() == cb.z2.raw());
    CHECK(ca.diagnostics[0].n_basis == 1);
    CHECK(ca.diagnostics[5].n_basis > 1);
}
