#include "endow/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "endow/error.hpp"

namespace endow {

namespace {

double quantile_sorted(const std::vector<double>& v, double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double bond_variance(const MarketPoint& m) { return m.c * m.c + m.d * m.d; }

}  // namespace

NodeSummary summarize(const NodeField& field) {
    NodeSummary s;
    const std::size_t n = field.n_nodes();
    s.mean.resize(n);
    s.q05.resize(n);
    s.q95.resize(n);
    std::vector<double> buf;
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = field.node(i);
        buf.assign(row.begin(), row.end());
        double sum = 0.0;
        for (double v : buf) sum += v;
        s.mean[i] = sum / static_cast<double>(buf.size());
        std::sort(buf.begin(), buf.end());
        s.q05[i] = quantile_sorted(buf, 0.05);
        s.q95[i] = quantile_sorted(buf, 0.95);
    }
    return s;
}

IndifferencePrice indifference_price(const ModelSpec& spec, const BsdeSolution& claim, const BsdeSolution& pure,
                                     const PathBundle& b, const FilterSet& filters, const BondSurface& surface,
                                     const BsdeOptions& options) {
    const double alpha = spec.risk_aversion;
    const std::size_t nodes = claim.value.n_nodes();
    const std::size_t M = b.n_paths;
    IndifferencePrice out;
    out.price = NodeField(nodes, M);
    out.min_price = std::numeric_limits<double>::infinity();
    out.max_price = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes; ++i) {
        const double t = b.grid.t(static_cast<int>(i));
        for (std::size_t p = 0; p < M; ++p) {
            const double v = b.tau[p] > t ? (claim.value(i, p) - pure.value(i, p)) / alpha : 0.0;
            out.price(i, p) = v;
            out.min_price = std::min(out.min_price, v);
            out.max_price = std::max(out.max_price, v);
        }
    }
    out.summary = summarize(out.price);
    out.headline = out.summary.mean[0];

    // Spread of the node-0 step rebuilt path by path from the node-1 values.
    if (nodes > 1 && M > 1) {
        const double dt = b.grid.dt();
        double sum = 0.0, sum2 = 0.0;
        for (std::size_t p = 0; p < M; ++p) {
            const MarketPoint m = market_point(spec, surface, b, 0, p);
            const double u0 = pure.value(1, p) - 0.5 * pure_generator(m, pure.z1(0, p), pure.z2(0, p), pure.z3(0, p)) * dt;
            double u = claim.value(1, p) - 0.5 * pure_generator(m, claim.z1(0, p), claim.z2(0, p), claim.z3(0, p)) * dt;
            const double d = options.post_death == PostDeathValue::PureInvestment ? pure.value(0, p) : 0.0;
            u += (std::exp(d - claim.value(1, p)) - 1.0) * filters.pi_lambda(0, p) * dt;
            const double x = (u - u0) / alpha;
            sum += x;
            sum2 += x * x;
        }
        const double mean = sum / static_cast<double>(M);
        const double var = std::max(0.0, sum2 / static_cast<double>(M) - mean * mean);
        out.headline_std_error = std::sqrt(var / static_cast<double>(M - 1));
    }
    return out;
}

double actuarial_price(const ModelSpec& spec, const PathBundle& b, const FilterSet& filters) {
    const std::vector<double> xi = claim_payoffs(spec, b);
    const auto N = static_cast<std::size_t>(b.grid.n_steps());
    double s = 0.0;
    for (std::size_t p = 0; p < b.n_paths; ++p) s += xi[p] * std::exp(filters.log_mass(N, p));
    return s / static_cast<double>(b.n_paths);
}

StrategySeries optimal_strategy(const ModelSpec& spec, const BondSurface& surface, const PathBundle& b,
                                const NodeField& z1, const NodeField& z2, const NodeField& z3) {
    const double alpha = spec.risk_aversion;
    const auto N = static_cast<std::size_t>(b.grid.n_steps());
    const std::size_t M = b.n_paths;
    const double dt = b.grid.dt();
    StrategySeries s{NodeField(N, M), NodeField(N, M), std::vector<double>(M, 0.0)};
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t p = 0; p < M; ++p) {
            const MarketPoint m = market_point(spec, surface, b, i, p);
            const double th1 = m.mu_S / (alpha * m.sigma_S * m.sigma_S) + z1(i, p) / (alpha * m.sigma_S);
            const double v = bond_variance(m);
            const double num = m.bond_drift + m.c * z2(i, p) + m.d * z3(i, p);
            double th2 = 0.0;
            if (v > 0.0)
                th2 = num / (alpha * v);
            else if (num != 0.0)
                throw Error(ErrorCode::ZeroVol, "node " + std::to_string(i), "bond has no volatility");
            s.theta1(i, p) = th1;
            s.theta2(i, p) = th2;
            const double a = th1 * m.sigma_S;
            s.admissibility[p] += (a * a + th2 * th2 * v) * dt;
        }
    }
    return s;
}

StrategySeries optimal_strategy_pure(const ModelSpec& spec, const BondSurface& surface, const PathBundle& bundle,
                                     const BsdeSolution& pure) {
    return optimal_strategy(spec, surface, bundle, pure.z1, pure.z2, pure.z3);
}

StrategySeries optimal_strategy_claim(const ModelSpec& spec, const BondSurface& surface, const PathBundle& b,
                                      const BsdeSolution& claim, const BsdeSolution* pure) {
    const std::size_t N = claim.z1.n_nodes();
    NodeField z1(N, b.n_paths), z2(N, b.n_paths), z3(N, b.n_paths);
    for (std::size_t i = 0; i < N; ++i) {
        const double t = b.grid.t(static_cast<int>(i));
        for (std::size_t p = 0; p < b.n_paths; ++p) {
            if (t < b.tau[p]) {
                z1(i, p) = claim.z1(i, p);
                z2(i, p) = claim.z2(i, p);
                z3(i, p) = claim.z3(i, p);
            } else if (pure) {
                z1(i, p) = pure->z1(i, p);
                z2(i, p) = pure->z2(i, p);
                z3(i, p) = pure->z3(i, p);
            }
        }
    }
    return optimal_strategy(spec, surface, b, z1, z2, z3);
}

WealthSeries wealth_trajectory(const ModelSpec& spec, const BondSurface& surface, const PathBundle& b,
                               const StrategySeries& strategy, double x0) {
    const auto N = static_cast<std::size_t>(b.grid.n_steps());
    const std::size_t M = b.n_paths;
    const double dt = b.grid.dt();
    const double alpha = spec.risk_aversion;
    WealthSeries w{NodeField(N + 1, M, x0), NodeField(N, M), 0.0, 1.0};
    for (std::size_t p = 0; p < M; ++p) {
        double total = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const MarketPoint m = market_point(spec, surface, b, i, p);
            const double g = strategy.theta1(i, p) * (m.mu_S * dt + m.sigma_S * b.dW1(i, p)) +
                             strategy.theta2(i, p) * (m.bond_drift * dt + m.c * b.dW2(i, p) + m.d * b.dW3(i, p));
            w.gains(i, p) = g;
            total += g;
            w.wealth(i + 1, p) = w.wealth(i, p) + g;
            w.max_exp_moment = std::max(w.max_exp_moment, std::exp(-2.0 * alpha * (w.wealth(i + 1, p) - x0)));
        }
        w.bookkeeping_error = std::max(w.bookkeeping_error, std::abs(w.wealth(N, p) - x0 - total));
    }
    return w;
}

MartingaleStats martingale_diagnostic(const NodeField& log_value, const NodeField& wealth, double alpha, double x0) {
    const std::size_t steps = log_value.n_nodes() - 1;
    const std::size_t M = log_value.n_paths();
    MartingaleStats s;
    s.mean_increment.resize(steps);
    s.std_error.resize(steps);
    std::size_t insignificant = 0, positive = 0, negative = 0;
    auto level = [&](std::size_t i, std::size_t p) { return std::exp(-alpha * (wealth(i, p) - x0) + log_value(i, p)); };
    for (std::size_t i = 0; i < steps; ++i) {
        double sum = 0.0, sum2 = 0.0;
        for (std::size_t p = 0; p < M; ++p) {
            const double d = level(i + 1, p) - level(i, p);
            sum += d;
            sum2 += d * d;
        }
        const double mean = sum / static_cast<double>(M);
        const double var = M > 1 ? std::max(0.0, (sum2 - M * mean * mean) / static_cast<double>(M - 1)) : 0.0;
        const double se = std::sqrt(var / static_cast<double>(M));
        s.mean_increment[i] = mean;
        s.std_error[i] = se;
        s.mean_drift += mean;
        if (std::abs(mean) <= 3.0 * se)
            ++insignificant;
        else if (mean > 0.0)
            ++positive;
        else
            ++negative;
    }
    const double n = std::max<double>(1.0, static_cast<double>(steps));
    s.mean_drift /= n;
    s.fraction_insignificant = static_cast<double>(insignificant) / n;
    s.fraction_positive = static_cast<double>(positive) / n;
    s.fraction_negative = static_cast<double>(negative) / n;
    return s;
}

PriceReport build_price_report(const ModelSpec& spec, const PathBundle& b, const FilterSet& filters,
                               const BondSurface& surface, const BsdeSolution& claim, const BsdeSolution& pure,
                               const BsdeOptions& options) {
    PriceReport r;
    r.price = indifference_price(spec, claim, pure, b, filters, surface, options);
    r.actuarial = actuarial_price(spec, b, filters);
    r.u0_pure = pure.value_at_zero();
    r.u0_claim = claim.value_at_zero();
    const bool consistent = options.post_death == PostDeathValue::PureInvestment;
    r.pure_strategy = optimal_strategy_pure(spec, surface, b, pure);
    r.claim_strategy = optimal_strategy_claim(spec, surface, b, claim, consistent ? &pure : nullptr);
    r.theta1 = summarize(r.claim_strategy.theta1);
    r.theta2 = summarize(r.claim_strategy.theta2);
    for (double a : r.claim_strategy.admissibility) r.max_admissibility = std::max(r.max_admissibility, a);
    r.wealth = wealth_trajectory(spec, surface, b, r.claim_strategy);
    const RandomHorizonSolution g = assemble_random_horizon(claim, b, consistent ? &pure : nullptr);
    r.martingale = martingale_diagnostic(g.value, r.wealth.wealth, spec.risk_aversion);
    return r;
}

void write_term_structure_csv(const PriceReport& r, const TimeGrid& grid, std::ostream& out) {
    out << "t,p_alpha_mean,p_alpha_q05,p_alpha_q95,theta1_mean,theta2_mean\n";
    char buf[256];
    const auto& s = r.price.summary;
    for (int i = 0; i < grid.n_nodes(); ++i) {
        const auto ii = static_cast<std::size_t>(i);
        int n = std::snprintf(buf, sizeof buf, "%.10g,%.12g,%.12g,%.12g,", grid.t(i), s.mean[ii], s.q05[ii], s.q95[ii]);
        if (i < grid.n_steps())
            std::snprintf(buf + n, sizeof buf - static_cast<std::size_t>(n), "%.12g,%.12g\n", r.theta1.mean[ii],
                          r.theta2.mean[ii]);
        else
            std::snprintf(buf + n, sizeof buf - static_cast<std::size_t>(n), ",\n");
        out << buf;
    }
}

void write_strategy_csv(const PriceReport& r, const TimeGrid& grid, std::ostream& out) {
    out << "t,theta1_mean,theta1_q05,theta1_q95,theta2_mean,theta2_q05,theta2_q95,vartheta1_mean,vartheta2_mean\n";
    const NodeSummary p1 = summarize(r.pure_strategy.theta1);
    const NodeSummary p2 = summarize(r.pure_strategy.theta2);
    char buf[320];
    for (int i = 0; i < grid.n_steps(); ++i) {
        const auto ii = static_cast<std::size_t>(i);
        std::snprintf(buf, sizeof buf, "%.10g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", grid.t(i),
                      r.theta1.mean[ii], r.theta1.q05[ii], r.theta1.q95[ii], r.theta2.mean[ii], r.theta2.q05[ii],
                      r.theta2.q95[ii], p1.mean[ii], p2.mean[ii]);
        out << buf;
    }
}

}  // namespace endow
