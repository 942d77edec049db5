#include "endow/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "endow/error.hpp"
#include "endow/parallel.hpp"
#include "endow/rng.hpp"

namespace endow {

PathBundle::PathBundle(const TimeGrid& g, std::size_t paths)
    : grid(g),
      n_paths(paths),
      dW1(static_cast<std::size_t>(g.n_steps()), paths),
      dW2(static_cast<std::size_t>(g.n_steps()), paths),
      dW3(static_cast<std::size_t>(g.n_steps()), paths),
      mu(static_cast<std::size_t>(g.n_nodes()), paths),
      y(static_cast<std::size_t>(g.n_nodes()), paths),
      log_s1(static_cast<std::size_t>(g.n_nodes()), paths),
      log_s2(static_cast<std::size_t>(g.n_nodes()), paths),
      survivor(static_cast<std::size_t>(g.n_nodes()), paths, 1.0),
      hazard(static_cast<std::size_t>(g.n_nodes()), paths),
      chain(static_cast<std::size_t>(g.n_nodes()) * paths, 0),
      clock(paths, 1.0),
      tau(paths, std::numeric_limits<double>::infinity()) {}

double PathBundle::s1(std::size_t i, std::size_t p) const { return std::exp(log_s1(i, p)); }
double PathBundle::s2(std::size_t i, std::size_t p) const { return std::exp(log_s2(i, p)); }

std::size_t PathBundle::death_node(std::size_t p) const {
    const std::size_t n = static_cast<std::size_t>(grid.n_nodes());
    if (censored(p)) return n;
    for (std::size_t i = 0; i < n; ++i)
        if (tau[p] <= grid.t(static_cast<int>(i))) return i;
    return n;
}

namespace {

// Uniform on the open interval (0, 1).
inline double open_uniform(CounterRng& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
}

inline double exp_draw(CounterRng& rng, double rate) {
    if (rate <= 0.0) return std::numeric_limits<double>::infinity();
    return -std::log(open_uniform(rng)) / rate;
}

int sample_categorical(CounterRng& rng, const double* weights, int n, double total) {
    double u = open_uniform(rng) * total;
    for (int k = 0; k < n; ++k) {
        u -= weights[k];
        if (u < 0.0 && weights[k] > 0.0) return k;
    }
    for (int k = n - 1; k >= 0; --k)
        if (weights[k] > 0.0) return k;
    return 0;
}

void overflow(const char* what, std::size_t path, int node) {
    throw Error(ErrorCode::NumericOverflow, what,
                "path " + std::to_string(path) + " node " + std::to_string(node) + " exceeds the magnitude cap");
}

}  // namespace

PathBundle simulate_paths(const ModelSpec& spec, const TimeGrid& grid, const BondSurface& surface,
                          const SimulationOptions& options) {
    const std::size_t M = options.n_paths;
    PathBundle b(grid, M);
    const int N = grid.n_steps();
    const double dt = grid.dt();
    const double sq = std::sqrt(dt);
    const int n_states = spec.chain.n_states();
    const Eigen::MatrixXd& Q = spec.chain.generator;
    const double cap = options.magnitude_cap;
    const double log_cap = std::log(cap);
    const double s2_0 = surface.price(0.0, spec.mu_0, spec.y_0);

    std::vector<double> off_diag(static_cast<std::size_t>(n_states * n_states), 0.0);
    std::vector<double> exit_rate(static_cast<std::size_t>(n_states), 0.0);
    for (int i = 0; i < n_states; ++i)
        for (int j = 0; j < n_states; ++j)
            if (i != j) {
                off_diag[static_cast<std::size_t>(i * n_states + j)] = Q(i, j);
                exit_rate[static_cast<std::size_t>(i)] += Q(i, j);
            }
    std::vector<double> init(spec.chain.initial.data(), spec.chain.initial.data() + n_states);

    for_each_chunk(M, options.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        const std::size_t n = end - begin;
        std::vector<CounterRng> brown, chain_rng;
        std::vector<std::normal_distribution<double>> normal(n);
        brown.reserve(n);
        chain_rng.reserve(n);
        std::vector<double> mu_raw(n), next_jump(n);
        std::vector<int> state(n);

        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t p = begin + k;
            brown.emplace_back(options.seed, Stream::Brownian, p);
            chain_rng.emplace_back(options.seed, Stream::Chain, p);
            mu_raw[k] = spec.mu_0;
            b.mu(0, p) = spec.mu_0;
            b.y(0, p) = spec.y_0;
            b.log_s1(0, p) = std::log(spec.s1_0);
            b.log_s2(0, p) = std::log(s2_0);
            b.hazard(0, p) = 0.0;
            const int z0 = sample_categorical(chain_rng[k], init.data(), n_states, 1.0);
            state[k] = z0;
            b.chain[p] = static_cast<std::uint8_t>(z0);
            next_jump[k] = exp_draw(chain_rng[k], exit_rate[static_cast<std::size_t>(z0)]);

            if (options.antithetic_death_clock) {
                CounterRng clock_rng(options.seed, Stream::DeathClock, p / 2);
                const double u = open_uniform(clock_rng);
                b.clock[p] = -std::log(p % 2 == 0 ? u : 1.0 - u);
            } else {
                CounterRng clock_rng(options.seed, Stream::DeathClock, p);
                b.clock[p] = -std::log(open_uniform(clock_rng));
            }
        }

        for (int i = 0; i < N; ++i) {
            const double t = grid.t(i);
            const double t_next = grid.t(i + 1);
            for (std::size_t k = 0; k < n; ++k) {
                const std::size_t p = begin + k;
                const double w1 = sq * normal[k](brown[k]);
                const double w2 = sq * normal[k](brown[k]);
                const double w3 = sq * normal[k](brown[k]);
                b.dW1(i, p) = w1;
                b.dW2(i, p) = w2;
                b.dW3(i, p) = w3;

                const double m = b.mu(i, p);
                const double yv = b.y(i, p);
                const double mS = spec.mu_S.eval_truncated(t, m, yv, StateVar::Y);
                const double sS = spec.sigma_S.eval_truncated(t, m, yv, StateVar::Y);
                const BondSurface::Point bond = surface.at(t, m, yv);

                const double ls1 = b.log_s1(i, p) + (mS - 0.5 * sS * sS) * dt + sS * w1;
                const double ls2 = b.log_s2(i, p) + (bond.drift - 0.5 * (bond.c * bond.c + bond.d * bond.d)) * dt +
                                   bond.c * w2 + bond.d * w3;
                const double raw = mu_raw[k] + spec.mu_drift(t, m, yv) * dt + spec.mu_vol(t, m, yv) * w2;
                const double y_next = yv + spec.y_drift(t, yv) * dt + spec.y_vol(t, yv) * w3;
                if (!(std::abs(raw) <= cap)) overflow("mu", p, i + 1);
                if (!(std::abs(y_next) <= cap)) overflow("Y", p, i + 1);
                if (!(std::abs(ls1) <= log_cap)) overflow("S1", p, i + 1);
                if (!(std::abs(ls2) <= log_cap)) overflow("S2", p, i + 1);
                mu_raw[k] = raw;
                const double m_next = std::max(raw, 0.0);
                b.mu(i + 1, p) = m_next;
                b.y(i + 1, p) = y_next;
                b.log_s1(i + 1, p) = ls1;
                b.log_s2(i + 1, p) = ls2;

                // Hidden chain and hazard over [t, t_next], mu linear in between.
                auto mu_at = [&](double s) { return m + (m_next - m) * (s - t) / dt; };
                double s = t;
                double acc = 0.0;
                int z = state[k];
                while (next_jump[k] < t_next) {
                    const double e = next_jump[k];
                    acc += 0.5 * (spec.lambda(s, mu_at(s), z) + spec.lambda(e, mu_at(e), z)) * (e - s);
                    z = sample_categorical(chain_rng[k], &off_diag[static_cast<std::size_t>(z * n_states)], n_states,
                                           exit_rate[static_cast<std::size_t>(z)]);
                    s = e;
                    next_jump[k] = s + exp_draw(chain_rng[k], exit_rate[static_cast<std::size_t>(z)]);
                }
                acc += 0.5 * (spec.lambda(s, mu_at(s), z) + spec.lambda(t_next, m_next, z)) * (t_next - s);
                state[k] = z;
                b.chain[static_cast<std::size_t>(i + 1) * M + p] = static_cast<std::uint8_t>(z);
                b.hazard(i + 1, p) = b.hazard(i, p) + acc;
            }
        }
    });

    sample_death_time(b);
    survivor_index(b);
    return b;
}

void sample_death_time(PathBundle& b) {
    const int N = b.grid.n_steps();
    for (std::size_t p = 0; p < b.n_paths; ++p) {
        const double clock = b.clock[p];
        const double target = clock * (1.0 - 1e-12);
        b.tau[p] = std::numeric_limits<double>::infinity();
        for (int i = 1; i <= N; ++i) {
            const double h1 = b.hazard(static_cast<std::size_t>(i), p);
            if (h1 < target) continue;
            const double h0 = b.hazard(static_cast<std::size_t>(i - 1), p);
            const double frac = h1 > h0 ? std::clamp((clock - h0) / (h1 - h0), 0.0, 1.0) : 1.0;
            b.tau[p] = frac >= 1.0 - 1e-9 ? b.grid.t(i) : b.grid.t(i - 1) + frac * b.grid.dt();
            break;
        }
    }
}

void survivor_index(PathBundle& b) {
    const int N = b.grid.n_steps();
    const double dt = b.grid.dt();
    for (std::size_t p = 0; p < b.n_paths; ++p) {
        double integral = 0.0;
        b.survivor(0, p) = 1.0;
        for (int i = 0; i < N; ++i) {
            integral += 0.5 * (b.mu(static_cast<std::size_t>(i), p) + b.mu(static_cast<std::size_t>(i + 1), p)) * dt;
            b.survivor(static_cast<std::size_t>(i + 1), p) = std::exp(-integral);
        }
    }
}

void write_paths_csv(const PathBundle& b, std::ostream& out, std::size_t max_paths) {
    out << "path,node,t,mu,Y,S1,S2,Smu,Lambda,H\n";
    char buf[320];
    const std::size_t n = std::min(max_paths, b.n_paths);
    for (std::size_t p = 0; p < n; ++p)
        for (int i = 0; i < b.grid.n_nodes(); ++i) {
            const auto ii = static_cast<std::size_t>(i);
            std::snprintf(buf, sizeof buf, "%zu,%d,%.10g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%d\n", p, i, b.grid.t(i),
                          b.mu(ii, p), b.y(ii, p), b.s1(ii, p), b.s2(ii, p), b.survivor(ii, p), b.hazard(ii, p),
                          b.died_by(ii, p));
            out << buf;
        }
}

}  // namespace endow
