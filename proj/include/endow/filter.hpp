#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "endow/grid.hpp"
#include "endow/model.hpp"
#include "endow/simulate.hpp"

namespace endow {

/// Per-state intensities at the start, midpoint and end of one step.
struct StepIntensity {
    Eigen::VectorXd start, mid, end;
};

/// One RK4 step of d rho/dt = rho Q - rho diag(lambda - 1). Row-vector
/// convention; tiny negative entries are clipped to 0.
Eigen::VectorXd propagate_unnormalized(const Eigen::VectorXd& rho, const Eigen::MatrixXd& Q,
                                       const StepIntensity& lambda, double dt);
Eigen::VectorXd propagate_unnormalized(const Eigen::VectorXd& rho, const Eigen::MatrixXd& Q,
                                       const Eigen::VectorXd& lambda_row, double dt);

/// One RK4 step of d w/dt = w Q - w diag(lambda): the weights whose total is
/// the conditional survival probability given the mu path.
Eigen::VectorXd propagate_survival_weights(const Eigen::VectorXd& w, const Eigen::MatrixXd& Q,
                                           const StepIntensity& lambda, double dt);

Eigen::VectorXd normalized_filter(const Eigen::VectorXd& rho);

/// Bayes update on observing the death.
Eigen::VectorXd jump_update(const Eigen::VectorXd& pi_minus, const Eigen::VectorXd& lambda_row);

/// One RK4 step of d pi/dt = pi Q.
Eigen::VectorXd post_jump_propagate(const Eigen::VectorXd& pi, const Eigen::MatrixXd& Q, double dt);

/// Pre-death projected intensity along one mu path.
struct ProjectedIntensity {
    std::vector<double> pi_lambda;  ///< per node
    std::vector<double> log_mass;   ///< log of the total survival weight per node
};

/// Projected intensity for path p of a bundle (defined on every node,
/// regardless of the realised death time).
ProjectedIntensity hat_pi_lambda(const ModelSpec& spec, const PathBundle& bundle, std::size_t p,
                                 int renormalize_every = 100);
/// Same for an explicit mu series on a grid.
ProjectedIntensity hat_pi_lambda(const ModelSpec& spec, const TimeGrid& grid, const std::vector<double>& mu_path,
                                 int renormalize_every = 100);

enum class Regime : std::uint8_t { PreDeath = 0, AtDeath = 1, PostDeath = 2 };
const char* to_string(Regime r);

/// Full filter of one path: Zakai weights spliced at the death time.
struct FilterPath {
    Eigen::MatrixXd rho;  ///< nodes x states, up to a positive per-node scale
    Eigen::MatrixXd pi;   ///< nodes x states
    std::vector<double> pi_lambda;      ///< sum_z pi(z) lambda(t_i, mu_i, z)
    std::vector<double> hat_pi_lambda;  ///< pre-death formula on all nodes
    std::vector<Regime> regime;
};

FilterPath filter_path(const ModelSpec& spec, const PathBundle& bundle, std::size_t p, int renormalize_every = 100);

/// Projected intensity and survival-weight mass for all paths.
struct FilterSet {
    NodeField pi_lambda;  ///< hat pi(lambda), node-major
    NodeField log_mass;   ///< log E[exp(-int lambda) | mu path]
    double min_pi_lambda = 0.0;
    double max_pi_lambda = 0.0;
};

FilterSet compute_filters(const ModelSpec& spec, const PathBundle& bundle, int threads = 1,
                          int renormalize_every = 100);

struct ParticleOptions {
    std::size_t n_particles = 100000;
    int batches = 20;
    std::uint64_t seed = 0;
};

struct ParticleEstimate {
    std::vector<double> mean;
    std::vector<double> std_error;
};

/// Bootstrap particle filter for the chain given survival up to each node of
/// path p (the observation that defines hat pi). Standard errors come from the
/// spread of independent batch estimates.
ParticleEstimate particle_filter_oracle(const ModelSpec& spec, const TimeGrid& grid,
                                        const std::vector<double>& mu_path, const ParticleOptions& options);

/// CSV `path,node,t,regime,pi_1..pi_n,pi_lambda`.
void write_filter_csv(const FilterPath& f, std::size_t path, const TimeGrid& grid, std::ostream& out);

}  // namespace endow
