#include "endow/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "endow/error.hpp"

namespace endow {

// ---------------------------------------------------------------- coefficients

CoefficientFunction CoefficientFunction::constant(double value) {
    return {Family::Constant, {value}};
}

CoefficientFunction CoefficientFunction::affine(double c0, double ct, double cmu, double cy) {
    return {Family::Affine, {c0, ct, cmu, cy}};
}

CoefficientFunction CoefficientFunction::mean_reversion(double rate, double target) {
    return {Family::MeanReversion, {rate, target}};
}

CoefficientFunction CoefficientFunction::reversion_to_y(double rate) {
    return {Family::ReversionToY, {rate}};
}

CoefficientFunction CoefficientFunction::sqrt(double scale, double shift) {
    return {Family::Sqrt, {scale, shift}};
}

double CoefficientFunction::eval_impl(double t, double mu, double y, StateVar own, bool truncate) const {
    const double x = own == StateVar::Mu ? mu : y;
    switch (family_) {
        case Family::Constant:
            return p_[0];
        case Family::Affine:
            return p_[0] + p_[1] * t + p_[2] * mu + p_[3] * y;
        case Family::MeanReversion:
            return p_[0] * (p_[1] - x);
        case Family::ReversionToY:
            return p_[0] * (y - x);
        case Family::Sqrt: {
            double r = x - p_[1];
            if (r < 0.0) {
                if (!truncate) {
                    std::ostringstream os;
                    os << "square-root coefficient evaluated at " << (own == StateVar::Mu ? "mu" : "y") << " = " << x;
                    throw Error(ErrorCode::Domain, own == StateVar::Mu ? "mu" : "y", os.str());
                }
                r = 0.0;
            }
            return p_[0] * std::sqrt(r);
        }
    }
    return 0.0;
}

double CoefficientFunction::eval(double t, double mu, double y, StateVar own) const {
    return eval_impl(t, mu, y, own, false);
}

double CoefficientFunction::eval_truncated(double t, double mu, double y, StateVar own) const {
    return eval_impl(t, mu, y, own, true);
}

bool CoefficientFunction::identically_zero() const {
    switch (family_) {
        case Family::Constant: return p_[0] == 0.0;
        case Family::Affine: return p_[0] == 0.0 && p_[1] == 0.0 && p_[2] == 0.0 && p_[3] == 0.0;
        case Family::MeanReversion:
        case Family::ReversionToY:
        case Family::Sqrt: return p_[0] == 0.0;
    }
    return false;
}

bool CoefficientFunction::depends_on(StateVar v, StateVar own) const {
    switch (family_) {
        case Family::Constant: return false;
        case Family::Affine: return v == StateVar::Mu ? p_[2] != 0.0 : p_[3] != 0.0;
        case Family::MeanReversion:
        case Family::Sqrt: return p_[0] != 0.0 && v == own;
        case Family::ReversionToY: return p_[0] != 0.0 && (v == own || v == StateVar::Y);
    }
    return true;
}

// ---------------------------------------------------------------- mortality

MortalityFunction::MortalityFunction(Family family, std::vector<double> values, double mu_weight)
    : family_(family), values_(std::move(values)), mu_weight_(mu_weight) {}

MortalityFunction& MortalityFunction::with_bounds(double lower, double upper, bool clip) {
    bounds_ = std::make_pair(lower, upper);
    clip_ = clip;
    return *this;
}

double MortalityFunction::raw(double /*t*/, double mu, int z) const {
    const double v = values_[static_cast<std::size_t>(z)];
    switch (family_) {
        case Family::StateConstant: return v;
        case Family::Multiplicative: return v * mu;
        case Family::Additive: return v + mu_weight_ * mu;
    }
    return v;
}

double MortalityFunction::operator()(double t, double mu, int z) const {
    const double r = raw(t, mu, z);
    if (bounds_ && clip_) return std::clamp(r, bounds_->first, bounds_->second);
    return r;
}

void MortalityFunction::row(double t, double mu, Eigen::VectorXd& out) const {
    out.resize(n_states());
    for (int z = 0; z < n_states(); ++z) out[z] = (*this)(t, mu, z);
}

bool MortalityFunction::depends_on_mu() const {
    if (family_ == Family::StateConstant) return false;
    if (family_ == Family::Additive) return mu_weight_ != 0.0;
    return std::any_of(values_.begin(), values_.end(), [](double v) { return v != 0.0; });
}

bool MortalityFunction::depends_on_state() const {
    return std::any_of(values_.begin(), values_.end(), [&](double v) { return v != values_.front(); });
}

// ---------------------------------------------------------------- claim

Claim Claim::constant(double k) {
    Claim c;
    c.family_ = Family::Constant;
    c.level_ = k;
    return c;
}

Claim Claim::capped_call(double strike, double cap) {
    Claim c;
    c.family_ = Family::CappedCall;
    c.level_ = cap;
    c.strike_ = strike;
    return c;
}

Claim Claim::survival_indexed(double k) {
    Claim c;
    c.family_ = Family::SurvivalIndexed;
    c.level_ = k;
    return c;
}

double Claim::payoff(double s1, double /*s2*/, double /*mu*/, double /*y*/, double survivor) const {
    switch (family_) {
        case Family::Constant: return level_;
        case Family::CappedCall: return std::min(std::max(s1 - strike_, 0.0), level_);
        case Family::SurvivalIndexed: return level_ * survivor;
    }
    return 0.0;
}

double Claim::bound() const { return std::abs(level_); }

// ---------------------------------------------------------------- evaluation

CoefficientSet eval_coefficients(const ModelSpec& spec, double t, double mu, double y, int z) {
    CoefficientSet c{};
    c.mu_S = spec.mu_S.eval(t, mu, y, StateVar::Y);
    c.sigma_S = spec.sigma_S.eval(t, mu, y, StateVar::Y);
    c.b_mu = spec.b_mu.eval(t, mu, y, StateVar::Mu);
    c.sigma_mu = spec.sigma_mu.eval(t, mu, y, StateVar::Mu);
    c.b_Y = spec.b_Y.eval(t, mu, y, StateVar::Y);
    c.sigma_Y = spec.sigma_Y.eval(t, mu, y, StateVar::Y);
    c.lambda = spec.lambda(t, mu, z);
    c.alpha_mu = spec.alpha_mu.eval(t, mu, y, StateVar::Mu);
    c.alpha_Y = spec.alpha_Y.eval(t, mu, y, StateVar::Y);
    return c;
}

// ---------------------------------------------------------------- domain

namespace {

double stationary_sd(double var_max, double kappa, double horizon) {
    if (kappa * horizon < 1e-6) return std::sqrt(var_max * horizon);
    return std::sqrt(var_max * (1.0 - std::exp(-2.0 * kappa * horizon)) / (2.0 * kappa));
}

}  // namespace

StateDomain state_domain(const ModelSpec& spec, double width_sd) {
    const double T = spec.horizon;
    const int steps = 1000;
    const double dt = T / steps;
    const double h = 1e-6;

    // Y: noiseless path under P and Q drifts.
    auto y_path = [&](bool risk_neutral, double& lo, double& hi, double& var_max, double& kappa) {
        double y = spec.y_0;
        double mu = spec.mu_0;
        lo = hi = y;
        for (int k = 0; k < steps; ++k) {
            const double t = k * dt;
            double drift = spec.y_drift(t, y);
            if (risk_neutral) drift += spec.premium_y(t, std::max(mu, 0.0), y);
            const double vol = spec.y_vol(t, y);
            var_max = std::max(var_max, vol * vol);
            const double slope = (spec.y_drift(t, y + h) - spec.y_drift(t, y - h)) / (2 * h);
            kappa = std::min(kappa, std::max(0.0, -slope));
            y += drift * dt;
            lo = std::min(lo, y);
            hi = std::max(hi, y);
        }
    };
    double ylo = 0, yhi = 0, yvar = 0, ykappa = 1e300;
    double ylo2 = 0, yhi2 = 0;
    y_path(false, ylo, yhi, yvar, ykappa);
    y_path(true, ylo2, yhi2, yvar, ykappa);
    ylo = std::min(ylo, ylo2);
    yhi = std::max(yhi, yhi2);
    const double ysd = stationary_sd(yvar, ykappa, T);
    StateDomain d{};
    d.y_lo = ylo - width_sd * ysd;
    d.y_hi = yhi + width_sd * ysd;
    if (spec.sigma_Y.family() == CoefficientFunction::Family::Sqrt)
        d.y_lo = std::max(d.y_lo, spec.sigma_Y.sqrt_shift());

    // mu: noiseless paths driven by the central and edge factor levels.
    double mlo = spec.mu_0, mhi = spec.mu_0, mvar = 0, mkappa = 1e300;
    const double ycands[3] = {std::numeric_limits<double>::quiet_NaN(), d.y_lo, d.y_hi};
    for (double yfix : ycands) {
        for (int rn = 0; rn < 2; ++rn) {
            double mu = spec.mu_0;
            double y = spec.y_0;
            for (int k = 0; k < steps; ++k) {
                const double t = k * dt;
                const double yy = std::isnan(yfix) ? y : yfix;
                double drift = spec.mu_drift(t, mu, yy);
                if (rn) drift += spec.premium_mu(t, mu, yy);
                const double vol = spec.mu_vol(t, mu, yy);
                mvar = std::max(mvar, vol * vol);
                const double slope = (spec.mu_drift(t, mu + h, yy) - spec.mu_drift(t, mu - h, yy)) / (2 * h);
                mkappa = std::min(mkappa, std::max(0.0, -slope));
                mu = std::max(mu + drift * dt, 0.0);
                y += spec.y_drift(t, y) * dt;
                mlo = std::min(mlo, mu);
                mhi = std::max(mhi, mu);
            }
        }
    }
    // A square-root diffusion's variance grows with the level; use the upper edge.
    if (spec.sigma_mu.family() == CoefficientFunction::Family::Sqrt) {
        for (double yy : {d.y_lo, d.y_hi, spec.y_0}) {
            const double vol = spec.mu_vol(0.0, mhi, yy);
            mvar = std::max(mvar, vol * vol);
        }
    }
    const double msd = stationary_sd(mvar, mkappa, T);
    d.mu_lo = std::max(0.0, mlo - width_sd * msd);
    d.mu_hi = mhi + width_sd * msd;

    // Keep a nonzero width even for frozen variables.
    auto pad = [](double& lo, double& hi, double floor_lo) {
        const double p = 0.02 * std::max(std::abs(lo), std::abs(hi)) + 1e-4;
        lo = std::max(lo - p, floor_lo);
        hi += p;
    };
    pad(d.mu_lo, d.mu_hi, d.mu_lo > 0.0 ? 0.0 : d.mu_lo);
    const double y_floor = spec.sigma_Y.family() == CoefficientFunction::Family::Sqrt ? spec.sigma_Y.sqrt_shift()
                                                                                       : -1e300;
    pad(d.y_lo, d.y_hi, y_floor);
    return d;
}

// ---------------------------------------------------------------- validation

bool ValidationReport::ok() const { return first_failure() == nullptr; }

const ValidationCheck* ValidationReport::first_failure() const {
    for (const auto& c : checks)
        if (!c.passed) return &c;
    return nullptr;
}

void throw_if_rejected(const ValidationReport& report) {
    if (const auto* f = report.first_failure()) throw Error(ErrorCode::Rejected, f->name, f->message);
}

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    return v;
}

std::string fmt_point(double t, double mu, double y) {
    std::ostringstream os;
    os << "(t=" << t << ", mu=" << mu << ", y=" << y << ")";
    return os.str();
}

}  // namespace

ValidationReport validate_model(const ModelSpec& spec, const TimeGrid& grid, int samples_per_axis) {
    ValidationReport rep;
    auto add = [&](const std::string& name, bool ok, const std::string& msg = {}) {
        rep.checks.push_back({name, ok, ok ? std::string() : msg});
    };

    add("horizon_matches_grid", std::abs(spec.horizon - grid.horizon()) <= 1e-12 * spec.horizon,
        "model horizon and time grid disagree");
    add("risk_aversion_positive", spec.risk_aversion > 0.0 && std::isfinite(spec.risk_aversion),
        "risk aversion must be > 0");
    add("s1_initial_positive", spec.s1_0 > 0.0, "initial risky asset price must be > 0");
    add("mu_initial_positive", spec.mu_0 > 0.0, "initial population intensity must be > 0");

    // Chain.
    const int n = spec.chain.n_states();
    const auto& Q = spec.chain.generator;
    {
        bool ok = n >= 1 && Q.rows() == n && Q.cols() == n;
        std::string msg = ok ? "" : "generator shape does not match the initial distribution";
        for (int i = 0; ok && i < n; ++i) {
            double row = 0.0;
            for (int j = 0; j < n; ++j) {
                if (i != j && Q(i, j) < 0.0) {
                    ok = false;
                    msg = "negative off-diagonal generator entry in row " + std::to_string(i);
                }
                row += Q(i, j);
            }
            if (ok && std::abs(row) > 1e-12) {
                ok = false;
                msg = "generator row " + std::to_string(i) + " does not sum to 0";
            }
        }
        add("chain_generator", ok, msg);
    }
    {
        bool ok = n >= 1 && (spec.chain.initial.array() >= 0.0).all() &&
                  std::abs(spec.chain.initial.sum() - 1.0) <= 1e-12;
        add("chain_initial_distribution", ok, "initial distribution must be nonnegative and sum to 1");
    }
    add("lambda_states", spec.lambda.n_states() == n, "mortality function needs one parameter per chain state");
    if (!rep.ok()) return rep;

    const StateDomain dom = state_domain(spec);
    const auto ts = linspace(0.0, spec.horizon, samples_per_axis);
    const auto mus = linspace(dom.mu_lo, dom.mu_hi, samples_per_axis);
    const auto ys = linspace(dom.y_lo, dom.y_hi, samples_per_axis);

    // Volatilities.
    std::string s_msg, m_msg, y_msg;
    for (double t : ts)
        for (double mu : mus)
            for (double y : ys) {
                const double sS = spec.sigma_S.eval_truncated(t, mu, y, StateVar::Y);
                if (s_msg.empty() && !(sS > 0.0 && std::isfinite(sS)))
                    s_msg = "sigma_S = " + std::to_string(sS) + " at " + fmt_point(t, mu, y);
                const double sm = spec.sigma_mu.eval_truncated(t, mu, y, StateVar::Mu);
                if (m_msg.empty() && !(sm >= 0.0 && std::isfinite(sm)))
                    m_msg = "sigma_mu = " + std::to_string(sm) + " at " + fmt_point(t, mu, y);
                const double sy = spec.sigma_Y.eval_truncated(t, mu, y, StateVar::Y);
                if (y_msg.empty() && !(sy >= 0.0 && std::isfinite(sy)))
                    y_msg = "sigma_Y = " + std::to_string(sy) + " at " + fmt_point(t, mu, y);
            }
    add("sigma_S_positive", s_msg.empty(), s_msg);
    add("sigma_mu_nonnegative", m_msg.empty(), m_msg);
    add("sigma_Y_nonnegative", y_msg.empty(), y_msg);

    // Mortality intensity.
    {
        double raw_lo = 1e300, raw_hi = -1e300;
        bool finite = true;
        for (double t : ts)
            for (double mu : mus)
                for (int z = 0; z < n; ++z) {
                    const double l = spec.lambda.raw(t, mu, z);
                    finite = finite && std::isfinite(l);
                    raw_lo = std::min(raw_lo, l);
                    raw_hi = std::max(raw_hi, l);
                }
        bool ok = finite;
        std::string msg = finite ? "" : "non-finite intensity sample";
        if (ok && spec.lambda.bounds()) {
            const auto [a, b] = *spec.lambda.bounds();
            if (!(a > 0.0 && a <= b)) {
                ok = false;
                msg = "declared bounds must satisfy 0 < a <= b";
            } else if (raw_lo < a || raw_hi > b) {
                std::ostringstream os;
                os << "intensity samples span [" << raw_lo << ", " << raw_hi << "] outside [" << a << ", " << b << "]";
                if (spec.lambda.clip()) {
                    rep.warnings.push_back(os.str() + "; clipped");
                } else {
                    ok = false;
                    msg = os.str();
                }
            }
        } else if (ok && !(raw_lo > 0.0)) {
            ok = false;
            std::ostringstream os;
            os << "intensity reaches " << raw_lo << " on the sampled domain; declare clipping bounds [a, b] with a > 0";
            msg = os.str();
        }
        add("lambda_bounded", ok, msg);
    }

    // Claim bound.
    {
        const double k = spec.claim.bound();
        bool ok = std::isfinite(k);
        std::string msg = ok ? "" : "claim bound is not finite";
        const double s1s[] = {0.0, 0.5 * spec.s1_0, spec.s1_0, 2.0 * spec.s1_0, 10.0 * spec.s1_0, 1e3 * spec.s1_0};
        const double surv[] = {1e-6, 0.5, 1.0};
        for (double s1 : s1s)
            for (double sv : surv)
                for (double mu : {dom.mu_lo, dom.mu_hi}) {
                    const double g = spec.claim.payoff(s1, sv, mu, spec.y_0, sv);
                    if (ok && !(std::abs(g) <= k * (1.0 + 1e-12))) {
                        ok = false;
                        msg = "payoff " + std::to_string(g) + " exceeds bound " + std::to_string(k);
                    }
                }
        add("claim_bounded", ok, msg);
    }

    // Square-root diffusions must not be pushed through their lower boundary.
    {
        bool ok = true;
        std::string msg;
        if (spec.sigma_Y.family() == CoefficientFunction::Family::Sqrt) {
            const double shift = spec.sigma_Y.sqrt_shift();
            if (spec.y_0 < shift) {
                ok = false;
                msg = "initial factor level below the square-root shift";
            }
            for (double t : ts)
                if (ok && spec.y_drift(t, shift) < 0.0) {
                    ok = false;
                    msg = "factor drift negative at the square-root boundary, t=" + std::to_string(t);
                }
        }
        if (spec.sigma_mu.family() == CoefficientFunction::Family::Sqrt) {
            const double shift = spec.sigma_mu.sqrt_shift();
            for (double t : ts)
                for (double y : ys)
                    if (ok && spec.mu_drift(t, shift, y) < 0.0) {
                        ok = false;
                        msg = "intensity drift negative at the square-root boundary " + fmt_point(t, shift, y);
                    }
        }
        add("cir_positivity", ok, msg);
    }
    return rep;
}

}  // namespace endow
