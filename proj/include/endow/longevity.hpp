#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "endow/model.hpp"

namespace endow {

struct PdeOptions {
    int n_mu = 64;   ///< intervals in mu
    int n_y = 32;    ///< intervals in y
    int n_t = 100;   ///< time steps over [0, T]
    double width_sd = 6.0;
    bool self_check = true;
    double self_check_tolerance = 1e-3;
    std::optional<StateDomain> domain;  ///< overrides the automatic domain
};

/// Bond price F(t, mu, y) = E^Q[exp(-int_t^T mu ds) | mu_t = mu, Y_t = y] on a
/// uniform (t, mu, y) grid, with the loadings and P-drift of the discounted
/// bond price S2 = exp(-int_0^t mu) F.
class BondSurface {
public:
    struct Point {
        double F, c, d, drift;
    };

    std::vector<double> t_axis, mu_axis, y_axis;
    std::vector<double> F, F_mu, F_y;
    std::vector<double> c, d, drift;
    /// Largest |F_fine - F_coarse| from the grid-halving self-check (NaN if skipped).
    double self_check_change = std::numeric_limits<double>::quiet_NaN();

    std::size_t index(std::size_t k, std::size_t i, std::size_t j) const {
        return (k * mu_axis.size() + i) * y_axis.size() + j;
    }
    std::size_t n_t() const { return t_axis.size(); }
    std::size_t n_mu() const { return mu_axis.size(); }
    std::size_t n_y() const { return y_axis.size(); }

    /// Linear in t, bilinear in (mu, y); coordinates are clamped to the grid.
    Point at(double t, double mu, double y) const;
    double price(double t, double mu, double y) const { return at(t, mu, y).F; }
    bool contains(double mu, double y) const;
};

/// Douglas ADI (theta = 1/2) for F_t + L F - mu F = 0, F(T) = 1. Fills F and
/// its first partials. Throws GRID_TOO_COARSE when the half-resolution solve
/// differs by more than the tolerance.
BondSurface solve_bond_pde(const ModelSpec& spec, const PdeOptions& options = {});

/// c = sigma_mu F_mu / F, d = sigma_Y F_y / F, kept signed.
void bond_volatilities(BondSurface& surface, const ModelSpec& spec);

/// drift = c alpha_mu + d alpha_Y.
void bond_drift(BondSurface& surface, const ModelSpec& spec);

/// solve_bond_pde followed by bond_volatilities and bond_drift.
BondSurface build_bond_surface(const ModelSpec& spec, const PdeOptions& options = {});

struct McEstimate {
    double mean;
    double std_error;
};

/// Plain Monte Carlo of exp(-int_t^T mu ds) under the risk-neutral drifts,
/// full-truncation Euler with ceil(steps_per_year (T - t)) steps.
McEstimate nested_mc_bond_price(const ModelSpec& spec, double t, double mu, double y, std::size_t n_inner,
                                std::uint64_t seed, int steps_per_year = 200, std::uint64_t point_id = 0);

/// CSV `t,mu,y,F,cB,dB,muB`, one row per grid node.
void write_surface_csv(const BondSurface& surface, std::ostream& out);

}  // namespace endow
