#pragma once

#include <optional>
#include <string>
#include <vector>

#include "endow/filter.hpp"
#include "endow/grid.hpp"
#include "endow/longevity.hpp"
#include "endow/model.hpp"
#include "endow/simulate.hpp"

namespace endow {

/// Log-value the insurer holds once the insured has died.
enum class PostDeathValue {
    PureInvestment,  ///< the pure-investment log-value (V^G = V^0 after death)
    Zero,            ///< literal zero (matches the above only without market premia)
};

/// How integrands are estimated from the next-step value.
enum class IntegrandEstimator {
    Centered,  ///< project (U_{i+1} - E_i U_{i+1}) dW / dt
    Plain,     ///< project U_{i+1} dW / dt
};

struct BsdeOptions {
    int basis_degree = 2;
    double ridge = 1e-8;
    double integrand_clip = 10.0;
    std::optional<double> value_bound;  ///< default: risk_aversion * k + 5
    IntegrandEstimator estimator = IntegrandEstimator::Centered;
    PostDeathValue post_death = PostDeathValue::PureInvestment;
    bool filter_feature = true;  ///< include hat pi(lambda) among the regressors
    int threads = 1;
};

struct NodeDiagnostics {
    double r2_value = 1.0;
    double r2_z1 = 1.0, r2_z2 = 1.0, r2_z3 = 1.0;
    double condition = 1.0;
    int n_basis = 1;
    std::size_t clipped_values = 0;
    std::size_t clipped_integrands = 0;
};

struct BsdeSolution {
    TimeGrid grid;
    std::size_t n_paths = 0;
    NodeField value;       ///< N+1 nodes
    NodeField z1, z2, z3;  ///< N nodes
    std::vector<NodeDiagnostics> diagnostics;  ///< N nodes
    double bound = 0.0;

    double mean(std::size_t node) const;
    double value_at_zero() const { return mean(0); }
};

/// Market coefficients seen by the drivers at one (node, path).
struct MarketPoint {
    double mu_S, sigma_S, bond_drift, c, d;
};

MarketPoint market_point(const ModelSpec& spec, const BondSurface& surface, const PathBundle& bundle, std::size_t node,
                         std::size_t path);

/// -|z|^2 + (mu_S/sigma_S + z1)^2 + (bond_drift + c z2 + d z3)^2 / (c^2 + d^2).
/// A bond with c = d = 0 contributes nothing when its drift is 0 and raises
/// ZERO_VOL otherwise.
double pure_generator(const MarketPoint& m, double z1, double z2, double z3);

/// Backward regression for the pure-investment log-value: terminal 0,
/// U_i = E_i U_{i+1} - 1/2 f(z_i) dt. `filters` only adds a regressor.
BsdeSolution solve_pure_investment_bsde(const ModelSpec& spec, const PathBundle& bundle, const BondSurface& surface,
                                        const FilterSet* filters, const BsdeOptions& options);

/// Backward regression for the claim log-value in the Brownian filtration:
/// terminal alpha xi, U_i = E_i U_{i+1} - 1/2 f(z_i) dt + (e^{D_i - U_i} - 1) pi_lambda_i dt,
/// with D the post-death log-value. The reaction term is implicit (Newton).
/// `pure` is required for PureInvestment.
BsdeSolution solve_claim_bsde(const ModelSpec& spec, const PathBundle& bundle, const FilterSet& filters,
                              const BondSurface& surface, const BsdeSolution* pure, const BsdeOptions& options);

/// Random-horizon claim value: U^G_i = U_i before death and D_i from death on;
/// the jump integrand is (D_i - U_i) 1{t_i <= tau}. `pure` == nullptr means D = 0.
struct RandomHorizonSolution {
    NodeField value;
    NodeField jump_integrand;
};

RandomHorizonSolution assemble_random_horizon(const BsdeSolution& claim, const PathBundle& bundle,
                                              const BsdeSolution* pure);

/// Deterministic-coefficient reference solutions on the grid nodes.
struct OracleSeries {
    std::vector<double> t, pure, claim;
};

/// Why the ODE reference does not apply to this model (nullopt when it does).
std::optional<std::string> oracle_unavailable(const ModelSpec& spec);

/// RK4 for dU0/dt = 1/2 f(t, 0) and dU/dt = 1/2 f(t, 0) - (e^{D - U} - 1) lambda(t),
/// U0(T) = 0, U(T) = alpha k, along the noiseless state path.
OracleSeries ode_oracle(const ModelSpec& spec, const TimeGrid& grid, PostDeathValue post_death, int substeps = 20);

/// Terminal payoffs xi per path.
std::vector<double> claim_payoffs(const ModelSpec& spec, const PathBundle& bundle);

}  // namespace endow
