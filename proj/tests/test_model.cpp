#include "doctest.h"

#include <cmath>

#include "endow/error.hpp"
#include "endow/model.hpp"
#include "support.hpp"

using namespace endow;

namespace {

std::string first_failure(const ModelSpec& s, int n_steps = 100) {
    const ValidationReport r = validate_model(s, TimeGrid(s.horizon, n_steps));
    const ValidationCheck* f = r.first_failure();
    return f ? f->name : "";
}

}  // namespace

TEST_CASE("coefficient families evaluate their closed forms") {
    CHECK(CoefficientFunction::constant(0.3).eval(0.5, 1.0, 2.0, StateVar::Mu) == 0.3);
    CHECK(CoefficientFunction::affine(1, 2, 3, 4).eval(0.5, 0.1, 0.2, StateVar::Mu) == doctest::Approx(1 + 1 + 0.3 + 0.8));
    CHECK(CoefficientFunction::mean_reversion(0.5, 0.02).eval(0, 0.01, 7.0, StateVar::Mu) == doctest::Approx(0.005));
    CHECK(CoefficientFunction::mean_reversion(2.0, 1.0).eval(0, 9.0, 0.5, StateVar::Y) == doctest::Approx(1.0));
    CHECK(CoefficientFunction::reversion_to_y(2.0).eval(0, 0.01, 0.03, StateVar::Mu) == doctest::Approx(0.04));
    CHECK(CoefficientFunction::sqrt(0.1).eval(0, 0.04, 0, StateVar::Mu) == doctest::Approx(0.02));
    CHECK(CoefficientFunction::sqrt(0.1, 1.0).eval(0, 0, 5.0, StateVar::Y) == doctest::Approx(0.2));
}

TEST_CASE("square-root coefficient is strict unless truncated") {
    const auto f = CoefficientFunction::sqrt(0.1);
    try {
        f.eval(0, -0.01, 0, StateVar::Mu);
        FAIL("expected DOMAIN");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Domain);
        CHECK(e.detail() == "mu");
    }
    CHECK(f.eval_truncated(0, -0.01, 0, StateVar::Mu) == 0.0);
}

TEST_CASE("coefficient dependence flags") {
    CHECK(CoefficientFunction::constant(0).identically_zero());
    CHECK_FALSE(CoefficientFunction::sqrt(0.1).identically_zero());
    CHECK(CoefficientFunction::reversion_to_y(1).depends_on(StateVar::Y, StateVar::Mu));
    CHECK_FALSE(CoefficientFunction::mean_reversion(1, 0).depends_on(StateVar::Y, StateVar::Mu));
    CHECK(CoefficientFunction::affine(0, 1, 0, 0).depends_on_time());
}

TEST_CASE("mortality families, bounds and clipping") {
    MortalityFunction m(MortalityFunction::Family::Multiplicative, {1.0, 3.0});
    CHECK(m(0, 0.02, 1) == doctest::Approx(0.06));
    MortalityFunction a(MortalityFunction::Family::Additive, {0.01, 0.02}, 0.5);
    CHECK(a(0, 0.02, 0) == doctest::Approx(0.02));
    m.with_bounds(0.001, 0.05);
    CHECK(m(0, 0.02, 1) == doctest::Approx(0.05));
    CHECK(m(0, 0.0, 0) == doctest::Approx(0.001));
    CHECK(m.raw(0, 0.02, 1) == doctest::Approx(0.06));
    CHECK(m.depends_on_mu());
    CHECK(m.depends_on_state());
    CHECK_FALSE(MortalityFunction(MortalityFunction::Family::StateConstant, {0.05, 0.05}).depends_on_state());
}

TEST_CASE("claim payoffs stay within their bound") {
    const Claim call = Claim::capped_call(1.0, 0.5);
    CHECK(call.payoff(0.8, 0, 0, 0, 1) == 0.0);
    CHECK(call.payoff(1.2, 0, 0, 0, 1) == doctest::Approx(0.2));
    CHECK(call.payoff(3.0, 0, 0, 0, 1) == 0.5);
    CHECK(call.bound() == 0.5);
    CHECK(Claim::survival_indexed(2.0).payoff(1, 1, 0, 0, 0.9) == doctest::Approx(1.8));
    CHECK(Claim::constant(1.0).is_constant());
}

TEST_CASE("benchmark model validates") {
    const ModelSpec s = testing::deterministic_spec();
    const ValidationReport r = validate_model(s, TimeGrid(1.0, 100));
    CHECK(r.ok());
    CHECK_NOTHROW(throw_if_rejected(r));
    CHECK(validate_model(testing::cir_spec(), TimeGrid(5.0, 50)).ok());
}

TEST_CASE("validation names the violated invariant") {
    ModelSpec s = testing::deterministic_spec();
    s.sigma_S = CoefficientFunction::constant(0.0);
    CHECK(first_failure(s) == "sigma_S_positive");

    s = testing::deterministic_spec();
    s.chain.generator(0, 0) = -0.4;
    CHECK(first_failure(s) == "chain_generator");

    s = testing::deterministic_spec();
    s.chain.initial = Eigen::Vector2d(0.7, 0.7);
    CHECK(first_failure(s) == "chain_initial_distribution");

    s = testing::deterministic_spec();
    s.lambda = MortalityFunction(MortalityFunction::Family::StateConstant, {0.05});
    CHECK(first_failure(s) == "lambda_states");

    s = testing::deterministic_spec();
    s.lambda = MortalityFunction(MortalityFunction::Family::Multiplicative, {1.0, 2.0});
    s.b_mu = CoefficientFunction::mean_reversion(0.5, 0.02);
    s.sigma_mu = CoefficientFunction::sqrt(0.05);
    CHECK(first_failure(s) == "lambda_bounded");
    s.lambda.with_bounds(1e-4, 1.0, true);
    CHECK(first_failure(s).empty());
    CHECK_FALSE(validate_model(s, TimeGrid(1.0, 100)).warnings.empty());

    s = testing::deterministic_spec();
    s.risk_aversion = -1.0;
    CHECK(first_failure(s) == "risk_aversion_positive");

    s = testing::cir_spec();
    s.b_mu = CoefficientFunction::affine(-0.01, 0, 0, 0);
    CHECK(first_failure(s, 50) == "cir_positivity");

    s = testing::deterministic_spec();
    CHECK(first_failure(s, 100).empty());
    const ValidationReport r = validate_model(s, TimeGrid(2.0, 100));
    REQUIRE_FALSE(r.ok());
    try {
        throw_if_rejected(r);
        FAIL("expected REJECTED");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Rejected);
        CHECK(e.detail() == "horizon_matches_grid");
    }
}

TEST_CASE("state domain brackets the initial state") {
    const ModelSpec s = testing::cir_spec();
    const StateDomain d = state_domain(s);
    CHECK(d.mu_lo >= 0.0);
    CHECK(d.mu_lo < s.mu_0);
    CHECK(d.mu_hi > s.mu_0);
    CHECK(d.y_lo < s.y_0);
    CHECK(d.y_hi > s.y_0);
}

TEST_CASE("error codes map to exit codes") {
    CHECK(exit_code_for(ErrorCode::Schema) == 2);
    CHECK(exit_code_for(ErrorCode::Rejected) == 2);
    CHECK(exit_code_for(ErrorCode::Diverged) == 3);
    CHECK(exit_code_for(ErrorCode::GridTooCoarse) == 3);
    CHECK(exit_code_for(ErrorCode::Degenerate) == 3);
    CHECK(exit_code_for(ErrorCode::Io) == 1);
    CHECK(std::string(Error(ErrorCode::Schema, "/numerics/seed", "required").what()) ==
          "SCHEMA(/numerics/seed): required");
}
