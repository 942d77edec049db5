#include "endow/bsde.hpp"

#include <algorithm>
#include <cmath>

#include "endow/error.hpp"
#include "endow/parallel.hpp"
#include "endow/regression.hpp"

namespace endow {

double BsdeSolution::mean(std::size_t node) const {
    const auto v = value.node(node);
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

MarketPoint market_point(const ModelSpec& spec, const BondSurface& surface, const PathBundle& b, std::size_t node,
                         std::size_t path) {
    const double t = b.grid.t(static_cast<int>(node));
    const double mu = b.mu(node, path);
    const double y = b.y(node, path);
    const BondSurface::Point bond = surface.at(t, mu, y);
    return {spec.mu_S.eval_truncated(t, mu, y, StateVar::Y), spec.sigma_S.eval_truncated(t, mu, y, StateVar::Y),
            bond.drift, bond.c, bond.d};
}

double pure_generator(const MarketPoint& m, double z1, double z2, double z3) {
    const double theta = m.mu_S / m.sigma_S;
    double f = -(z1 * z1 + z2 * z2 + z3 * z3) + (theta + z1) * (theta + z1);
    const double v = m.c * m.c + m.d * m.d;
    if (v > 0.0) {
        const double g = m.bond_drift + m.c * z2 + m.d * z3;
        f += g * g / v;
    } else if (m.bond_drift != 0.0) {
        throw Error(ErrorCode::ZeroVol, "bond", "bond has drift but no volatility");
    }
    return f;
}

std::vector<double> claim_payoffs(const ModelSpec& spec, const PathBundle& b) {
    const auto N = static_cast<std::size_t>(b.grid.n_steps());
    std::vector<double> xi(b.n_paths);
    for (std::size_t p = 0; p < b.n_paths; ++p)
        xi[p] = spec.claim.payoff(b.s1(N, p), b.s2(N, p), b.mu(N, p), b.y(N, p), b.survivor(N, p));
    return xi;
}

namespace {

struct Reaction {
    const FilterSet* filters;
    const NodeField* post_death;  // null: zero post-death value
};

BsdeSolution backward(const ModelSpec& spec, const PathBundle& b, const BondSurface& surface, const FilterSet* filters,
                      const std::vector<double>& terminal, const Reaction* reaction, const BsdeOptions& opt) {
    const std::size_t M = b.n_paths;
    const int N = b.grid.n_steps();
    const double dt = b.grid.dt();
    const double bound = opt.value_bound ? *opt.value_bound : spec.risk_aversion * spec.claim.bound() + 5.0;
    const double gamma = opt.integrand_clip;

    BsdeSolution sol;
    sol.grid = b.grid;
    sol.n_paths = M;
    sol.bound = bound;
    sol.value = NodeField(static_cast<std::size_t>(N + 1), M);
    sol.z1 = NodeField(static_cast<std::size_t>(N), M);
    sol.z2 = NodeField(static_cast<std::size_t>(N), M);
    sol.z3 = NodeField(static_cast<std::size_t>(N), M);
    sol.diagnostics.resize(static_cast<std::size_t>(N));
    std::copy(terminal.begin(), terminal.end(), sol.value.node(static_cast<std::size_t>(N)).begin());

    std::vector<double> expect(M), t1(M), t2(M), t3(M);
    const BasisOptions basis{opt.basis_degree, opt.ridge, opt.threads};
    const std::size_t C = chunk_count(M);

    for (int i = N - 1; i >= 0; --i) {
        const auto ii = static_cast<std::size_t>(i);
        std::vector<std::span<const double>> features{b.mu.node(ii), b.y.node(ii), b.log_s1.node(ii),
                                                      b.log_s2.node(ii)};
        if (filters && opt.filter_feature) features.push_back(filters->pi_lambda.node(ii));
        const LeastSquaresProjector proj(features, basis);
        const auto next = sol.value.node(ii + 1);
        const auto w1 = b.dW1.node(ii), w2 = b.dW2.node(ii), w3 = b.dW3.node(ii);
        auto z1 = sol.z1.node(ii), z2 = sol.z2.node(ii), z3 = sol.z3.node(ii);
        NodeDiagnostics& diag = sol.diagnostics[ii];
        diag.n_basis = proj.n_basis();
        diag.condition = proj.condition();

        std::vector<double> r2;
        if (opt.estimator == IntegrandEstimator::Centered) {
            diag.r2_value = proj.project({next}, {std::span<double>(expect)})[0];
            for (std::size_t p = 0; p < M; ++p) {
                const double dev = (next[p] - expect[p]) / dt;
                t1[p] = dev * w1[p];
                t2[p] = dev * w2[p];
                t3[p] = dev * w3[p];
            }
            r2 = proj.project({t1, t2, t3}, {z1, z2, z3});
        } else {
            for (std::size_t p = 0; p < M; ++p) {
                const double v = next[p] / dt;
                t1[p] = v * w1[p];
                t2[p] = v * w2[p];
                t3[p] = v * w3[p];
            }
            r2 = proj.project({next, t1, t2, t3}, {std::span<double>(expect), z1, z2, z3});
            diag.r2_value = r2[0];
            r2.erase(r2.begin());
        }
        diag.r2_z1 = r2[0];
        diag.r2_z2 = r2[1];
        diag.r2_z3 = r2[2];

        std::vector<std::size_t> clipped_z(C, 0), clipped_u(C, 0), bad(C, 0);
        auto value = sol.value.node(ii);
        for_each_chunk(M, opt.threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
            for (std::size_t p = begin; p < end; ++p) {
                double* zs[3] = {&z1[p], &z2[p], &z3[p]};
                for (double* z : zs) {
                    if (std::abs(*z) > gamma) {
                        *z = std::clamp(*z, -gamma, gamma);
                        ++clipped_z[c];
                    }
                }
                const MarketPoint mp = market_point(spec, surface, b, ii, p);
                double u = expect[p] - 0.5 * pure_generator(mp, z1[p], z2[p], z3[p]) * dt;
                if (reaction) {
                    // Implicit reaction u = a + (e^{d-u} - 1) l by Newton from u = a;
                    // a == d is a fixed point, so a zero claim reproduces D exactly.
                    const double d = reaction->post_death ? (*reaction->post_death)(ii, p) : 0.0;
                    const double l = reaction->filters->pi_lambda(ii, p) * dt;
                    const double a = u;
                    for (int it = 0; it < 8; ++it) {
                        const double e = std::exp(d - u);
                        const double step = (u - a - (e - 1.0) * l) / (1.0 + e * l);
                        u -= step;
                        if (!(std::abs(step) > 1e-15 * (1.0 + std::abs(u)))) break;
                    }
                }
                if (!std::isfinite(u) || std::abs(u) > 2.0 * bound) {
                    ++bad[c];
                    continue;
                }
                if (std::abs(u) > bound) {
                    u = std::clamp(u, -bound, bound);
                    ++clipped_u[c];
                }
                value[p] = u;
            }
        });
        for (std::size_t c = 0; c < C; ++c) {
            if (bad[c] > 0)
                throw Error(ErrorCode::Diverged, "node " + std::to_string(i),
                            "value left the bound " + std::to_string(bound));
            diag.clipped_integrands += clipped_z[c];
            diag.clipped_values += clipped_u[c];
        }
    }
    return sol;
}

}  // namespace

BsdeSolution solve_pure_investment_bsde(const ModelSpec& spec, const PathBundle& bundle, const BondSurface& surface,
                                        const FilterSet* filters, const BsdeOptions& options) {
    const std::vector<double> terminal(bundle.n_paths, 0.0);
    return backward(spec, bundle, surface, filters, terminal, nullptr, options);
}

BsdeSolution solve_claim_bsde(const ModelSpec& spec, const PathBundle& bundle, const FilterSet& filters,
                              const BondSurface& surface, const BsdeSolution* pure, const BsdeOptions& options) {
    std::vector<double> terminal = claim_payoffs(spec, bundle);
    for (double& v : terminal) v *= spec.risk_aversion;
    Reaction reaction{&filters, nullptr};
    if (options.post_death == PostDeathValue::PureInvestment) {
        if (!pure) throw Error(ErrorCode::Rejected, "post_death_value", "pure-investment solution required");
        reaction.post_death = &pure->value;
    }
    return backward(spec, bundle, surface, &filters, terminal, &reaction, options);
}

RandomHorizonSolution assemble_random_horizon(const BsdeSolution& claim, const PathBundle& b,
                                              const BsdeSolution* pure) {
    const std::size_t nodes = claim.value.n_nodes();
    RandomHorizonSolution out{NodeField(nodes, b.n_paths), NodeField(nodes, b.n_paths)};
    for (std::size_t i = 0; i < nodes; ++i) {
        const double t = b.grid.t(static_cast<int>(i));
        for (std::size_t p = 0; p < b.n_paths; ++p) {
            const double d = pure ? pure->value(i, p) : 0.0;
            const double u = claim.value(i, p);
            out.value(i, p) = t < b.tau[p] ? u : d;
            out.jump_integrand(i, p) = t <= b.tau[p] ? d - u : 0.0;
        }
    }
    return out;
}

// ---------------------------------------------------------------- ODE oracle

namespace {

struct Determinism {
    bool mu, y;
};

Determinism deterministic_states(const ModelSpec& s) {
    const bool y = s.sigma_Y.identically_zero();
    const bool mu = s.sigma_mu.identically_zero() && (!s.b_mu.depends_on(StateVar::Y, StateVar::Mu) || y);
    return {mu, y};
}

bool deterministic_along_path(const CoefficientFunction& f, StateVar own, Determinism d) {
    return (!f.depends_on(StateVar::Mu, own) || d.mu) && (!f.depends_on(StateVar::Y, own) || d.y);
}

// Squared bond Sharpe ratio along the noiseless path; see oracle_unavailable.
double bond_sharpe_sq(const ModelSpec& s, double t, double mu, double y) {
    const bool vol_mu = !s.sigma_mu.identically_zero();
    const bool vol_y = !s.sigma_Y.identically_zero();
    if (vol_mu && !vol_y) {
        const double a = s.premium_mu(t, mu, y);
        return a * a;
    }
    if (!vol_mu && vol_y && s.b_mu.depends_on(StateVar::Y, StateVar::Mu)) {
        const double a = s.premium_y(t, mu, y);
        return a * a;
    }
    return 0.0;
}

}  // namespace

std::optional<std::string> oracle_unavailable(const ModelSpec& s) {
    const Determinism d = deterministic_states(s);
    if (!s.claim.is_constant()) return "claim payoff is not constant";
    if (s.lambda.depends_on_state() && s.chain.n_states() > 1) return "mortality intensity depends on the hidden state";
    if (s.lambda.depends_on_mu() && !d.mu) return "mortality intensity depends on a random population intensity";
    if (!deterministic_along_path(s.mu_S, StateVar::Y, d) || !deterministic_along_path(s.sigma_S, StateVar::Y, d))
        return "risky-asset Sharpe ratio is random";
    if (!deterministic_along_path(s.alpha_mu, StateVar::Mu, d) || !deterministic_along_path(s.alpha_Y, StateVar::Y, d))
        return "risk premia are random";
    const bool vol_mu = !s.sigma_mu.identically_zero();
    const bool vol_y = !s.sigma_Y.identically_zero();
    if (vol_mu && vol_y && !(s.alpha_mu.identically_zero() && s.alpha_Y.identically_zero()))
        return "bond Sharpe ratio mixes two noise sources";
    return std::nullopt;
}

OracleSeries ode_oracle(const ModelSpec& s, const TimeGrid& grid, PostDeathValue post_death, int substeps) {
    if (auto why = oracle_unavailable(s)) throw Error(ErrorCode::Rejected, "oracle", *why);
    const int N = grid.n_steps();
    const int fine = N * std::max(1, substeps);
    const double h = s.horizon / fine;  // RK4 step; states are stored at half steps
    const int half = 2 * fine;
    const double hh = h / 2;

    // Noiseless state path on the half-step grid.
    std::vector<double> mu(static_cast<std::size_t>(half + 1)), y(static_cast<std::size_t>(half + 1));
    mu[0] = s.mu_0;
    y[0] = s.y_0;
    auto rhs = [&](double t, double m, double yy, double& dm, double& dy) {
        dm = s.mu_drift(t, std::max(m, 0.0), yy);
        dy = s.y_drift(t, yy);
    };
    for (int k = 0; k < half; ++k) {
        const double t = k * hh;
        const double m = mu[static_cast<std::size_t>(k)], yy = y[static_cast<std::size_t>(k)];
        double a1, b1, a2, b2, a3, b3, a4, b4;
        rhs(t, m, yy, a1, b1);
        rhs(t + hh / 2, m + hh / 2 * a1, yy + hh / 2 * b1, a2, b2);
        rhs(t + hh / 2, m + hh / 2 * a2, yy + hh / 2 * b2, a3, b3);
        rhs(t + hh, m + hh * a3, yy + hh * b3, a4, b4);
        mu[static_cast<std::size_t>(k + 1)] = std::max(m + hh / 6 * (a1 + 2 * a2 + 2 * a3 + a4), 0.0);
        y[static_cast<std::size_t>(k + 1)] = yy + hh / 6 * (b1 + 2 * b2 + 2 * b3 + b4);
    }

    auto market = [&](int k) {
        const double t = k * hh;
        const double m = mu[static_cast<std::size_t>(k)], yy = y[static_cast<std::size_t>(k)];
        const double th = s.market_drift(t, yy) / s.market_vol(t, yy);
        return th * th + bond_sharpe_sq(s, t, m, yy);
    };
    auto intensity = [&](int k) { return s.lambda(k * hh, mu[static_cast<std::size_t>(k)], 0); };
    const bool zero_after = post_death == PostDeathValue::Zero;

    // State (U0, U); derivative in forward time.
    auto deriv = [&](int k, double u0, double u, double& d0, double& d1) {
        const double f = market(k);
        d0 = 0.5 * f;
        const double d = zero_after ? 0.0 : u0;
        d1 = 0.5 * f - (std::exp(d - u) - 1.0) * intensity(k);
    };

    OracleSeries out;
    out.t.resize(static_cast<std::size_t>(N + 1));
    out.pure.resize(static_cast<std::size_t>(N + 1));
    out.claim.resize(static_cast<std::size_t>(N + 1));
    double u0 = 0.0, u = s.risk_aversion * s.claim.level();
    out.t[static_cast<std::size_t>(N)] = grid.t(N);
    out.pure[static_cast<std::size_t>(N)] = u0;
    out.claim[static_cast<std::size_t>(N)] = u;
    for (int j = fine; j > 0; --j) {
        const int k1 = 2 * j, km = 2 * j - 1, k0 = 2 * j - 2;  // half-step indices at t, t - h/2, t - h
        double a0, a1, b0, b1, c0, c1, e0, e1;
        deriv(k1, u0, u, a0, a1);
        deriv(km, u0 - h / 2 * a0, u - h / 2 * a1, b0, b1);
        deriv(km, u0 - h / 2 * b0, u - h / 2 * b1, c0, c1);
        deriv(k0, u0 - h * c0, u - h * c1, e0, e1);
        u0 -= h / 6 * (a0 + 2 * b0 + 2 * c0 + e0);
        u -= h / 6 * (a1 + 2 * b1 + 2 * c1 + e1);
        if ((j - 1) % std::max(1, substeps) == 0) {
            const int node = (j - 1) / std::max(1, substeps);
            out.t[static_cast<std::size_t>(node)] = grid.t(node);
            out.pure[static_cast<std::size_t>(node)] = u0;
            out.claim[static_cast<std::size_t>(node)] = u;
        }
    }
    return out;
}

}  // namespace endow
