#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <vector>

#include "endow/grid.hpp"
#include "endow/longevity.hpp"
#include "endow/model.hpp"

namespace endow {

struct SimulationOptions {
    std::size_t n_paths = 1000;
    std::uint64_t seed = 0;
    int threads = 1;
    double magnitude_cap = 1e6;
    bool antithetic_death_clock = false;
};

/// Simulated state paths, node-major. Brownian increments are stored for the
/// N steps; states for the N+1 nodes.
struct PathBundle {
    TimeGrid grid;
    std::size_t n_paths = 0;

    NodeField dW1, dW2, dW3;
    NodeField mu, y, log_s1, log_s2, survivor, hazard;
    std::vector<std::uint8_t> chain;  ///< true hidden state, node-major; oracle use only
    std::vector<double> clock;        ///< unit-exponential draw per path
    std::vector<double> tau;          ///< death time, +inf when censored

    PathBundle() = default;
    PathBundle(const TimeGrid& g, std::size_t paths);

    double s1(std::size_t i, std::size_t p) const;
    double s2(std::size_t i, std::size_t p) const;
    int state(std::size_t i, std::size_t p) const { return chain[i * n_paths + p]; }
    bool censored(std::size_t p) const { return !(tau[p] <= grid.horizon()); }
    /// H_i = 1{tau <= t_i}.
    int died_by(std::size_t i, std::size_t p) const { return tau[p] <= grid.t(static_cast<int>(i)) ? 1 : 0; }
    /// First node index with t_i >= tau (n_nodes when censored).
    std::size_t death_node(std::size_t p) const;
};

/// Euler paths of (mu, Y, S1, S2), the hidden chain, the cumulative hazard and
/// the death clock, then sample_death_time and survivor_index. Per-path
/// counter-based streams make the result independent of the thread count.
PathBundle simulate_paths(const ModelSpec& spec, const TimeGrid& grid, const BondSurface& surface,
                          const SimulationOptions& options);

/// tau = crossing time of the cumulative hazard through the clock, linear
/// between nodes; +inf when the hazard at T stays below the clock.
void sample_death_time(PathBundle& bundle);

/// survivor_i = exp(-trapezoid int_0^{t_i} mu ds).
void survivor_index(PathBundle& bundle);

/// CSV `path,node,t,mu,Y,S1,S2,Smu,Lambda,H` for the first max_paths paths.
void write_paths_csv(const PathBundle& bundle, std::ostream& out, std::size_t max_paths);

}  // namespace endow
