#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "endow/grid.hpp"

namespace endow {

/// Which state variable a coefficient treats as "its own" (the argument of a
/// mean-reversion or square-root family).
enum class StateVar { Mu, Y };

/// Closed catalog of scalar coefficient families f(t, mu, y).
///
/// - constant:        value
/// - affine:          c0 + ct*t + cmu*mu + cy*y
/// - mean_reversion:  rate * (target - x)
/// - reversion_to_y:  rate * (y - x)      (population hazard tracking the factor)
/// - sqrt:            scale * sqrt(x - shift)
///
/// x is the own variable supplied at evaluation time.
class CoefficientFunction {
public:
    enum class Family { Constant, Affine, MeanReversion, ReversionToY, Sqrt };

    CoefficientFunction() = default;

    static CoefficientFunction constant(double value);
    static CoefficientFunction affine(double c0, double ct, double cmu, double cy);
    static CoefficientFunction mean_reversion(double rate, double target);
    static CoefficientFunction reversion_to_y(double rate);
    static CoefficientFunction sqrt(double scale, double shift = 0.0);

    /// Strict evaluation; throws DOMAIN on a negative square-root argument.
    double eval(double t, double mu, double y, StateVar own) const;
    /// Full-truncation evaluation: a negative square-root argument counts as 0.
    double eval_truncated(double t, double mu, double y, StateVar own) const;

    Family family() const { return family_; }
    const std::vector<double>& params() const { return p_; }

    bool identically_zero() const;
    bool depends_on(StateVar v, StateVar own) const;
    bool depends_on_time() const { return family_ == Family::Affine && p_[1] != 0.0; }
    /// Lower bound of the square-root radicand (the shift); 0 for other families.
    double sqrt_shift() const { return family_ == Family::Sqrt ? p_[1] : 0.0; }

private:
    CoefficientFunction(Family f, std::vector<double> p) : family_(f), p_(std::move(p)) {}
    double eval_impl(double t, double mu, double y, StateVar own, bool truncate) const;

    Family family_ = Family::Constant;
    std::vector<double> p_{0.0};
};

/// Mortality intensity lambda(t, mu, z) for a finite chain state z.
///
/// - state_constant: values[z]
/// - multiplicative: values[z] * mu
/// - additive:       values[z] + mu_weight * mu
///
/// When bounds are declared and clip is on, values are clipped into them.
class MortalityFunction {
public:
    enum class Family { StateConstant, Multiplicative, Additive };

    MortalityFunction() = default;
    MortalityFunction(Family family, std::vector<double> values, double mu_weight = 1.0);

    MortalityFunction& with_bounds(double lower, double upper, bool clip = true);

    double raw(double t, double mu, int z) const;
    double operator()(double t, double mu, int z) const;
    void row(double t, double mu, Eigen::VectorXd& out) const;

    int n_states() const { return static_cast<int>(values_.size()); }
    Family family() const { return family_; }
    const std::vector<double>& values() const { return values_; }
    double mu_weight() const { return mu_weight_; }
    const std::optional<std::pair<double, double>>& bounds() const { return bounds_; }
    bool clip() const { return clip_; }

    bool depends_on_mu() const;
    bool depends_on_state() const;

private:
    Family family_ = Family::StateConstant;
    std::vector<double> values_{0.05};
    double mu_weight_ = 1.0;
    std::optional<std::pair<double, double>> bounds_;
    bool clip_ = true;
};

/// Terminal payoff xi = g(S1_T, S2_T, mu_T, Y_T), optionally scaled by the
/// realised survivor index.
class Claim {
public:
    enum class Family { Constant, CappedCall, SurvivalIndexed };

    static Claim constant(double k);
    static Claim capped_call(double strike, double cap);
    static Claim survival_indexed(double k);

    double payoff(double s1, double s2, double mu, double y, double survivor) const;
    /// The bound k with |xi| <= k.
    double bound() const;
    bool is_constant() const { return family_ == Family::Constant; }
    Family family() const { return family_; }
    double level() const { return level_; }
    double strike() const { return strike_; }

private:
    Family family_ = Family::Constant;
    double level_ = 1.0;
    double strike_ = 0.0;
};

struct ChainSpec {
    Eigen::MatrixXd generator = Eigen::MatrixXd::Zero(1, 1);
    Eigen::VectorXd initial = Eigen::VectorXd::Ones(1);

    int n_states() const { return static_cast<int>(initial.size()); }
};

struct ModelSpec {
    double horizon = 1.0;

    CoefficientFunction mu_S = CoefficientFunction::constant(0.0);
    CoefficientFunction sigma_S = CoefficientFunction::constant(0.2);
    double s1_0 = 1.0;

    CoefficientFunction b_mu = CoefficientFunction::constant(0.0);
    CoefficientFunction sigma_mu = CoefficientFunction::constant(0.0);
    double mu_0 = 0.01;

    CoefficientFunction b_Y = CoefficientFunction::constant(0.0);
    CoefficientFunction sigma_Y = CoefficientFunction::constant(0.0);
    double y_0 = 0.01;

    CoefficientFunction alpha_mu = CoefficientFunction::constant(0.0);
    CoefficientFunction alpha_Y = CoefficientFunction::constant(0.0);

    ChainSpec chain;
    MortalityFunction lambda;
    Claim claim = Claim::constant(1.0);
    double risk_aversion = 1.0;

    // Own-variable bindings of the catalog.
    double market_drift(double t, double y) const { return mu_S.eval(t, 0.0, y, StateVar::Y); }
    double market_vol(double t, double y) const { return sigma_S.eval(t, 0.0, y, StateVar::Y); }
    double mu_drift(double t, double mu, double y) const { return b_mu.eval(t, mu, y, StateVar::Mu); }
    double mu_vol(double t, double mu, double y) const { return sigma_mu.eval_truncated(t, mu, y, StateVar::Mu); }
    double y_drift(double t, double y) const { return b_Y.eval(t, 0.0, y, StateVar::Y); }
    double y_vol(double t, double y) const { return sigma_Y.eval_truncated(t, 0.0, y, StateVar::Y); }
    double premium_mu(double t, double mu, double y) const { return alpha_mu.eval(t, mu, y, StateVar::Mu); }
    double premium_y(double t, double mu, double y) const { return alpha_Y.eval(t, mu, y, StateVar::Y); }
};

struct CoefficientSet {
    double mu_S, sigma_S, b_mu, sigma_mu, b_Y, sigma_Y, lambda, alpha_mu, alpha_Y;
};

/// Strict pointwise evaluation; throws DOMAIN when a square-root coefficient
/// sees a negative argument.
CoefficientSet eval_coefficients(const ModelSpec& spec, double t, double mu, double y, int z);

/// Rectangle in (mu, y) covering the bulk of the state distribution.
struct StateDomain {
    double mu_lo, mu_hi, y_lo, y_hi;
};

/// Envelope of the noiseless trajectories (under both drift measures) widened
/// by width_sd stationary standard deviations. mu is kept >= 0.
StateDomain state_domain(const ModelSpec& spec, double width_sd = 6.0);

struct ValidationCheck {
    std::string name;
    bool passed;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    std::vector<std::string> warnings;

    bool ok() const;
    const ValidationCheck* first_failure() const;
};

/// Checks every model invariant on a sampled (t, mu, y, z) grid. Never throws
/// for a violated invariant; use throw_if_rejected to turn failures into errors.
ValidationReport validate_model(const ModelSpec& spec, const TimeGrid& grid, int samples_per_axis = 11);

/// Throws REJECTED(<first failing check>) unless the report is clean.
void throw_if_rejected(const ValidationReport& report);

}  // namespace endow
