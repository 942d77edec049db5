#pragma once

// Model builders shared by the unit and acceptance tests.

#include <cmath>

#include "endow/model.hpp"

namespace endow::testing {

/// Constant coefficients: Sharpe ratio `premium` on the risky asset, constant
/// mu, state-independent lambda, constant claim k.
inline ModelSpec deterministic_spec(double alpha = 1.0, double k = 1.0, double lambda = 0.05, double premium = 0.3) {
    ModelSpec s;
    s.horizon = 1.0;
    s.sigma_S = CoefficientFunction::constant(0.2);
    s.mu_S = CoefficientFunction::constant(premium * 0.2);
    s.mu_0 = 0.01;
    s.y_0 = 0.01;
    s.chain.generator = Eigen::MatrixXd{{-0.5, 0.5}, {0.3, -0.3}};
    s.chain.initial = Eigen::Vector2d(0.5, 0.5);
    s.lambda = MortalityFunction(MortalityFunction::Family::StateConstant, {lambda, lambda});
    s.claim = Claim::constant(k);
    s.risk_aversion = alpha;
    return s;
}

/// CIR population intensity dmu = a(b - mu)dt + sigma sqrt(mu) dW under P;
/// alpha_mu shifts the drift under the pricing measure.
inline ModelSpec cir_spec(double a = 0.5, double b = 0.02, double sigma = 0.1, double mu0 = 0.015,
                          double horizon = 5.0, double alpha_mu = 0.0) {
    ModelSpec s = deterministic_spec();
    s.horizon = horizon;
    s.b_mu = CoefficientFunction::mean_reversion(a, b);
    s.sigma_mu = CoefficientFunction::sqrt(sigma);
    s.mu_0 = mu0;
    s.alpha_mu = CoefficientFunction::constant(alpha_mu);
    return s;
}

/// Zero-coupon price of the CIR survivor bond from its Riccati system, by RK4
/// on a fine grid (independent of the library's PDE solver). The pricing-measure
/// drift is a(b - mu) - alpha_mu sigma sqrt(mu) = a b - a mu - alpha_mu sigma sqrt(mu);
/// it stays affine only for alpha_mu == 0, which is what callers pass.
inline double cir_bond_riccati(double a, double b, double sigma, double mu, double tau, int steps = 20000) {
    // F = exp(A(tau) - B(tau) mu), B' = 1 - a B - sigma^2 B^2 / 2, A' = -a b B.
    double A = 0.0, B = 0.0;
    const double h = tau / steps;
    auto dB = [&](double x) { return 1.0 - a * x - 0.5 * sigma * sigma * x * x; };
    for (int i = 0; i < steps; ++i) {
        const double k1 = dB(B), k2 = dB(B + 0.5 * h * k1), k3 = dB(B + 0.5 * h * k2), k4 = dB(B + h * k3);
        const double b1 = B, b2 = B + 0.5 * h * k1, b3 = B + 0.5 * h * k2, b4 = B + h * k3;
        A += -a * b * h / 6 * (b1 + 2 * b2 + 2 * b3 + b4);
        B += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return std::exp(A - B * mu);
}

/// log(1 + (e^{alpha k} - 1) e^{-Lambda}) / alpha: price with a deterministic
/// hazard integral Lambda and no hedgeable mortality risk.
inline double deterministic_price(double alpha, double k, double Lambda) {
    return std::log1p(std::expm1(alpha * k) * std::exp(-Lambda)) / alpha;
}

}  // namespace endow::testing
