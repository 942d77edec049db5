#pragma once

#include <ostream>
#include <vector>

#include "endow/bsde.hpp"
#include "endow/filter.hpp"
#include "endow/grid.hpp"
#include "endow/longevity.hpp"
#include "endow/model.hpp"
#include "endow/simulate.hpp"

namespace endow {

/// Cross-path summary of one node field.
struct NodeSummary {
    std::vector<double> mean, q05, q95;
};

NodeSummary summarize(const NodeField& field);

struct IndifferencePrice {
    NodeField price;  ///< (U_claim - U_pure) / alpha, zeroed from the death time on
    NodeSummary summary;
    double headline = 0.0;        ///< node-0 mean
    double headline_std_error = 0.0;  ///< from the per-path one-step reconstruction at node 0
    double min_price = 0.0, max_price = 0.0;
};

/// p_i = (U_claim - U_pure) / alpha on {tau > t_i}, 0 otherwise.
IndifferencePrice indifference_price(const ModelSpec& spec, const BsdeSolution& claim, const BsdeSolution& pure,
                                     const PathBundle& bundle, const FilterSet& filters, const BondSurface& surface,
                                     const BsdeOptions& options);

/// Mean over paths of xi * E[exp(-int lambda) | mu path]: the expected payout,
/// which the price approaches as alpha goes to 0.
double actuarial_price(const ModelSpec& spec, const PathBundle& bundle, const FilterSet& filters);

/// Feedback strategies (amounts in the risky asset and the bond) on N nodes.
struct StrategySeries {
    NodeField theta1, theta2;
    std::vector<double> admissibility;  ///< per path: int (theta1 sigma_S)^2 + theta2^2 (c^2 + d^2) dt
};

/// theta1 = mu_S/(alpha sigma_S^2) + z1/(alpha sigma_S),
/// theta2 = (bond_drift + c z2 + d z3) / (alpha (c^2 + d^2)).
/// A bond with c = d = 0 gets theta2 = 0 when the numerator vanishes and
/// raises ZERO_VOL otherwise.
StrategySeries optimal_strategy(const ModelSpec& spec, const BondSurface& surface, const PathBundle& bundle,
                                const NodeField& z1, const NodeField& z2, const NodeField& z3);

/// Strategy of the pure-investment problem.
StrategySeries optimal_strategy_pure(const ModelSpec& spec, const BondSurface& surface, const PathBundle& bundle,
                                     const BsdeSolution& pure);

/// Strategy of the problem with the claim: claim integrands before death, the
/// post-death problem's integrands afterwards (zero integrands when pure == nullptr).
StrategySeries optimal_strategy_claim(const ModelSpec& spec, const BondSurface& surface, const PathBundle& bundle,
                                      const BsdeSolution& claim, const BsdeSolution* pure);

struct WealthSeries {
    NodeField wealth;          ///< N+1 nodes
    NodeField gains;           ///< N steps
    double bookkeeping_error;  ///< max |X_N - x0 - sum of gains|
    double max_exp_moment;     ///< max over paths and nodes of exp(-2 alpha (X - x0))
};

/// Euler wealth from x0 under the strategy.
WealthSeries wealth_trajectory(const ModelSpec& spec, const BondSurface& surface, const PathBundle& bundle,
                               const StrategySeries& strategy, double x0 = 0.0);

struct MartingaleStats {
    std::vector<double> mean_increment, std_error;  ///< per step
    double fraction_insignificant = 0.0;            ///< |mean| <= 3 SE
    double fraction_positive = 0.0;                 ///< mean > 3 SE
    double fraction_negative = 0.0;                 ///< mean < -3 SE
    double mean_drift = 0.0;                        ///< average of mean increments
};

/// Increments of M_i = exp(-alpha (X_i - x0) + log_value_i) across paths, step by step.
MartingaleStats martingale_diagnostic(const NodeField& log_value, const NodeField& wealth, double alpha,
                                      double x0 = 0.0);

struct PriceReport {
    IndifferencePrice price;
    double actuarial = 0.0;
    double u0_pure = 0.0, u0_claim = 0.0;
    StrategySeries claim_strategy, pure_strategy;
    NodeSummary theta1, theta2;  ///< claim strategy summaries
    WealthSeries wealth;         ///< under the claim strategy
    MartingaleStats martingale;  ///< claim side, with the death splice
    double max_admissibility = 0.0;
};

PriceReport build_price_report(const ModelSpec& spec, const PathBundle& bundle, const FilterSet& filters,
                               const BondSurface& surface, const BsdeSolution& claim, const BsdeSolution& pure,
                               const BsdeOptions& options);

/// CSV `t,p_alpha_mean,p_alpha_q05,p_alpha_q95,theta1_mean,theta2_mean`, N+1 rows
/// (strategy columns are empty at T).
void write_term_structure_csv(const PriceReport& report, const TimeGrid& grid, std::ostream& out);

/// CSV `t,theta1_mean,theta1_q05,theta1_q95,theta2_mean,theta2_q05,theta2_q95,vartheta1_mean,vartheta2_mean`.
void write_strategy_csv(const PriceReport& report, const TimeGrid& grid, std::ostream& out);

}  // namespace endow
