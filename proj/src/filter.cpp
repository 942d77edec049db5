#include "endow/filter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "endow/error.hpp"
#include "endow/parallel.hpp"
#include "endow/rng.hpp"

namespace endow {

namespace {

constexpr int kMaxStates = 64;

// Allocation-free RK4 step of dx/dt = x Q - x diag(lambda - shift); Q is
// row-major n x n. A zero pointer for the intensities means lambda = 0.
void rk4_weights(const double* x, double* out, const double* Q, const double* l0, const double* lm, const double* l1,
                 double shift, double dt, int n) {
    double k[4][kMaxStates];
    double tmp[kMaxStates];
    const double* lams[4] = {l0, lm, lm, l1};
    const double* src = x;
    for (int s = 0; s < 4; ++s) {
        if (s > 0) {
            const double h = s == 3 ? dt : 0.5 * dt;
            for (int j = 0; j < n; ++j) tmp[j] = x[j] + h * k[s - 1][j];
            src = tmp;
        }
        for (int j = 0; j < n; ++j) {
            double v = 0.0;
            for (int i = 0; i < n; ++i) v += src[i] * Q[i * n + j];
            const double lam = lams[s] ? lams[s][j] : 0.0;
            k[s][j] = v - src[j] * (lam - shift);
        }
    }
    bool any = false;
    for (int j = 0; j < n; ++j) {
        double v = x[j] + dt / 6.0 * (k[0][j] + 2.0 * k[1][j] + 2.0 * k[2][j] + k[3][j]);
        if (v < 0.0) v = 0.0;
        out[j] = v;
        any = any || v > 0.0;
    }
    if (!any) throw Error(ErrorCode::Degenerate, "filter_weights", "all filter weights vanished");
}

std::vector<double> row_major(const Eigen::MatrixXd& Q) {
    const int n = static_cast<int>(Q.rows());
    std::vector<double> q(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) q[static_cast<std::size_t>(i * n + j)] = Q(i, j);
    return q;
}

void check_states(int n) {
    if (n < 1 || n > kMaxStates)
        throw Error(ErrorCode::Rejected, "chain_states", "chain must have between 1 and 64 states");
}

inline void lambda_row(const MortalityFunction& lam, double t, double mu, int n, double* out) {
    for (int z = 0; z < n; ++z) out[z] = lam(t, mu, z);
}

Eigen::VectorXd step_eigen(const Eigen::VectorXd& x, const Eigen::MatrixXd& Q, const double* l0, const double* lm,
                           const double* l1, double shift, double dt) {
    const int n = static_cast<int>(x.size());
    check_states(n);
    const auto q = row_major(Q);
    Eigen::VectorXd out(n);
    rk4_weights(x.data(), out.data(), q.data(), l0, lm, l1, shift, dt, n);
    return out;
}

}  // namespace

Eigen::VectorXd propagate_unnormalized(const Eigen::VectorXd& rho, const Eigen::MatrixXd& Q,
                                       const StepIntensity& l, double dt) {
    return step_eigen(rho, Q, l.start.data(), l.mid.data(), l.end.data(), 1.0, dt);
}

Eigen::VectorXd propagate_unnormalized(const Eigen::VectorXd& rho, const Eigen::MatrixXd& Q,
                                       const Eigen::VectorXd& lambda_row, double dt) {
    return step_eigen(rho, Q, lambda_row.data(), lambda_row.data(), lambda_row.data(), 1.0, dt);
}

Eigen::VectorXd propagate_survival_weights(const Eigen::VectorXd& w, const Eigen::MatrixXd& Q,
                                           const StepIntensity& l, double dt) {
    return step_eigen(w, Q, l.start.data(), l.mid.data(), l.end.data(), 0.0, dt);
}

Eigen::VectorXd normalized_filter(const Eigen::VectorXd& rho) {
    const double total = rho.sum();
    if (!(total > 0.0)) throw Error(ErrorCode::Degenerate, "normalized_filter", "weights sum to zero");
    return rho / total;
}

Eigen::VectorXd jump_update(const Eigen::VectorXd& pi_minus, const Eigen::VectorXd& lambda_row) {
    Eigen::VectorXd out = pi_minus.cwiseProduct(lambda_row);
    const double total = out.sum();
    if (!(total > 0.0)) throw Error(ErrorCode::Degenerate, "jump_update", "zero intensity under the filter");
    return out / total;
}

Eigen::VectorXd post_jump_propagate(const Eigen::VectorXd& pi, const Eigen::MatrixXd& Q, double dt) {
    return step_eigen(pi, Q, nullptr, nullptr, nullptr, 0.0, dt);
}

ProjectedIntensity hat_pi_lambda(const ModelSpec& spec, const TimeGrid& grid, const std::vector<double>& mu_path,
                                 int renormalize_every) {
    const int n = spec.chain.n_states();
    check_states(n);
    const int N = grid.n_steps();
    const double dt = grid.dt();
    const auto q = row_major(spec.chain.generator);
    double w[kMaxStates], next[kMaxStates], l0[kMaxStates], lm[kMaxStates], l1[kMaxStates];
    for (int z = 0; z < n; ++z) w[z] = spec.chain.initial[z];

    ProjectedIntensity out;
    out.pi_lambda.resize(static_cast<std::size_t>(N + 1));
    out.log_mass.resize(static_cast<std::size_t>(N + 1));
    double log_scale = 0.0;
    lambda_row(spec.lambda, 0.0, mu_path[0], n, l0);
    for (int i = 0;; ++i) {
        double mass = 0.0, weighted = 0.0;
        for (int z = 0; z < n; ++z) {
            mass += w[z];
            weighted += w[z] * l0[z];
        }
        if (!(mass > 0.0)) throw Error(ErrorCode::Degenerate, "hat_pi_lambda", "survival weights vanished");
        out.pi_lambda[static_cast<std::size_t>(i)] = weighted / mass;
        out.log_mass[static_cast<std::size_t>(i)] = log_scale + std::log(mass);
        if (i == N) break;
        if (renormalize_every > 0 && i > 0 && i % renormalize_every == 0) {
            log_scale += std::log(mass);
            for (int z = 0; z < n; ++z) w[z] /= mass;
        }
        const double m0 = mu_path[static_cast<std::size_t>(i)];
        const double m1 = mu_path[static_cast<std::size_t>(i + 1)];
        const double t0 = grid.t(i), t1 = grid.t(i + 1);
        lambda_row(spec.lambda, 0.5 * (t0 + t1), 0.5 * (m0 + m1), n, lm);
        lambda_row(spec.lambda, t1, m1, n, l1);
        rk4_weights(w, next, q.data(), l0, lm, l1, 0.0, dt, n);
        std::copy(next, next + n, w);
        std::copy(l1, l1 + n, l0);
    }
    return out;
}

ProjectedIntensity hat_pi_lambda(const ModelSpec& spec, const PathBundle& b, std::size_t p, int renormalize_every) {
    std::vector<double> mu_path(static_cast<std::size_t>(b.grid.n_nodes()));
    for (std::size_t i = 0; i < mu_path.size(); ++i) mu_path[i] = b.mu(i, p);
    return hat_pi_lambda(spec, b.grid, mu_path, renormalize_every);
}

const char* to_string(Regime r) {
    switch (r) {
        case Regime::PreDeath: return "pre-death";
        case Regime::AtDeath: return "at-death";
        case Regime::PostDeath: return "post-death";
    }
    return "unknown";
}

FilterPath filter_path(const ModelSpec& spec, const PathBundle& b, std::size_t p, int renormalize_every) {
    const int n = spec.chain.n_states();
    check_states(n);
    const TimeGrid& grid = b.grid;
    const int N = grid.n_steps();
    const auto q = row_major(spec.chain.generator);
    const double tau = b.tau[p];
    const std::size_t death = b.death_node(p);

    FilterPath f;
    f.rho.resize(N + 1, n);
    f.pi.resize(N + 1, n);
    f.pi_lambda.resize(static_cast<std::size_t>(N + 1));
    f.regime.resize(static_cast<std::size_t>(N + 1));
    f.hat_pi_lambda = hat_pi_lambda(spec, b, p, renormalize_every).pi_lambda;

    double w[kMaxStates], next[kMaxStates], l0[kMaxStates], lm[kMaxStates], l1[kMaxStates];
    for (int z = 0; z < n; ++z) w[z] = spec.chain.initial[z];
    bool dead = false;
    for (int i = 0;; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        double mass = 0.0;
        for (int z = 0; z < n; ++z) mass += w[z];
        if (!(mass > 0.0)) throw Error(ErrorCode::Degenerate, "filter_path", "filter weights vanished");
        lambda_row(spec.lambda, grid.t(i), b.mu(ii, p), n, l0);
        double pl = 0.0;
        for (int z = 0; z < n; ++z) {
            f.rho(i, z) = w[z];
            f.pi(i, z) = w[z] / mass;
            pl += f.pi(i, z) * l0[z];
        }
        f.pi_lambda[ii] = pl;
        f.regime[ii] = ii < death ? Regime::PreDeath : (ii == death ? Regime::AtDeath : Regime::PostDeath);
        if (i == N) break;
        if (renormalize_every > 0 && i > 0 && i % renormalize_every == 0)
            for (int z = 0; z < n; ++z) w[z] /= mass;

        const double t0 = grid.t(i), t1 = grid.t(i + 1);
        const double m0 = b.mu(ii, p), m1 = b.mu(ii + 1, p);
        auto mu_at = [&](double s) { return m0 + (m1 - m0) * (s - t0) / (t1 - t0); };
        if (dead) {
            rk4_weights(w, next, q.data(), nullptr, nullptr, nullptr, 0.0, t1 - t0, n);
        } else if (tau <= t1) {
            // Survive to tau, observe the death, then evolve without observations.
            const double h = tau - t0;
            lambda_row(spec.lambda, t0 + 0.5 * h, mu_at(t0 + 0.5 * h), n, lm);
            lambda_row(spec.lambda, tau, mu_at(tau), n, l1);
            rk4_weights(w, next, q.data(), l0, lm, l1, 1.0, h, n);
            for (int z = 0; z < n; ++z) next[z] *= l1[z];
            std::copy(next, next + n, w);
            if (t1 - tau > 0.0) rk4_weights(w, next, q.data(), nullptr, nullptr, nullptr, 0.0, t1 - tau, n);
            dead = true;
        } else {
            lambda_row(spec.lambda, 0.5 * (t0 + t1), 0.5 * (m0 + m1), n, lm);
            lambda_row(spec.lambda, t1, m1, n, l1);
            rk4_weights(w, next, q.data(), l0, lm, l1, 1.0, t1 - t0, n);
        }
        std::copy(next, next + n, w);
    }
    return f;
}

FilterSet compute_filters(const ModelSpec& spec, const PathBundle& b, int threads, int renormalize_every) {
    const std::size_t nodes = static_cast<std::size_t>(b.grid.n_nodes());
    FilterSet fs;
    fs.pi_lambda = NodeField(nodes, b.n_paths);
    fs.log_mass = NodeField(nodes, b.n_paths);
    for_each_chunk(b.n_paths, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        std::vector<double> mu_path(nodes);
        for (std::size_t p = begin; p < end; ++p) {
            for (std::size_t i = 0; i < nodes; ++i) mu_path[i] = b.mu(i, p);
            const ProjectedIntensity h = hat_pi_lambda(spec, b.grid, mu_path, renormalize_every);
            for (std::size_t i = 0; i < nodes; ++i) {
                fs.pi_lambda(i, p) = h.pi_lambda[i];
                fs.log_mass(i, p) = h.log_mass[i];
            }
        }
    });
    const auto& raw = fs.pi_lambda.raw();
    if (!raw.empty()) {
        const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
        fs.min_pi_lambda = *lo;
        fs.max_pi_lambda = *hi;
    }
    return fs;
}

namespace {

inline double open_uniform(CounterRng& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53; }

}  // namespace

ParticleEstimate particle_filter_oracle(const ModelSpec& spec, const TimeGrid& grid,
                                        const std::vector<double>& mu_path, const ParticleOptions& opt) {
    const int n = spec.chain.n_states();
    check_states(n);
    const int N = grid.n_steps();
    const int B = std::max(1, opt.batches);
    const std::size_t per_batch = std::max<std::size_t>(1, opt.n_particles / static_cast<std::size_t>(B));
    const Eigen::MatrixXd& Q = spec.chain.generator;
    std::vector<double> exit_rate(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) exit_rate[static_cast<std::size_t>(i)] += Q(i, j);

    auto pick = [&](CounterRng& rng, int from) {
        double u = open_uniform(rng) * exit_rate[static_cast<std::size_t>(from)];
        int last = from;
        for (int j = 0; j < n; ++j) {
            if (j == from || Q(from, j) <= 0.0) continue;
            last = j;
            u -= Q(from, j);
            if (u < 0.0) return j;
        }
        return last;
    };

    std::vector<std::vector<double>> est(static_cast<std::size_t>(B), std::vector<double>(N + 1));
    for (int batch = 0; batch < B; ++batch) {
        CounterRng rng(opt.seed, Stream::Particles, static_cast<std::uint64_t>(batch));
        std::vector<int> z(per_batch), z_new(per_batch);
        std::vector<double> w(per_batch, 1.0);
        for (auto& s : z) {
            double u = open_uniform(rng);
            int k = 0;
            for (; k < n - 1; ++k) {
                u -= spec.chain.initial[k];
                if (u < 0.0) break;
            }
            s = k;
        }
        auto& e = est[static_cast<std::size_t>(batch)];
        for (int i = 0;; ++i) {
            const double t0 = grid.t(i);
            const double m0 = mu_path[static_cast<std::size_t>(i)];
            double sw = 0.0, swl = 0.0;
            for (std::size_t k = 0; k < per_batch; ++k) {
                sw += w[k];
                swl += w[k] * spec.lambda(t0, m0, z[k]);
            }
            e[static_cast<std::size_t>(i)] = swl / sw;
            if (i == N) break;

            // Systematic resampling when the effective sample size halves.
            double sw2 = 0.0;
            for (double v : w) sw2 += v * v;
            if (sw * sw / sw2 < 0.5 * static_cast<double>(per_batch)) {
                const double step = sw / static_cast<double>(per_batch);
                double u = open_uniform(rng) * step;
                double cum = 0.0;
                std::size_t src = 0;
                for (std::size_t k = 0; k < per_batch; ++k) {
                    const double target = u + step * static_cast<double>(k);
                    while (src + 1 < per_batch && cum + w[src] <= target) cum += w[src++];
                    z_new[k] = z[src];
                }
                z.swap(z_new);
                std::fill(w.begin(), w.end(), 1.0);
            }

            const double t1 = grid.t(i + 1);
            const double m1 = mu_path[static_cast<std::size_t>(i + 1)];
            auto mu_at = [&](double s) { return m0 + (m1 - m0) * (s - t0) / (t1 - t0); };
            for (std::size_t k = 0; k < per_batch; ++k) {
                int s_state = z[k];
                double s = t0, acc = 0.0;
                for (;;) {
                    const double rate = exit_rate[static_cast<std::size_t>(s_state)];
                    const double hold = rate > 0.0 ? -std::log(open_uniform(rng)) / rate
                                                   : std::numeric_limits<double>::infinity();
                    const double e_t = std::min(s + hold, t1);
                    acc += 0.5 * (spec.lambda(s, mu_at(s), s_state) + spec.lambda(e_t, mu_at(e_t), s_state)) * (e_t - s);
                    if (s + hold >= t1) break;
                    s = e_t;
                    s_state = pick(rng, s_state);
                }
                z[k] = s_state;
                w[k] *= std::exp(-acc);
            }
        }
    }

    ParticleEstimate out;
    out.mean.assign(static_cast<std::size_t>(N + 1), 0.0);
    out.std_error.assign(static_cast<std::size_t>(N + 1), 0.0);
    for (int i = 0; i <= N; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        double m = 0.0;
        for (const auto& e : est) m += e[ii];
        m /= B;
        double v = 0.0;
        for (const auto& e : est) v += (e[ii] - m) * (e[ii] - m);
        out.mean[ii] = m;
        out.std_error[ii] = B > 1 ? std::sqrt(v / (B - 1) / B) : 0.0;
    }
    return out;
}

void write_filter_csv(const FilterPath& f, std::size_t path, const TimeGrid& grid, std::ostream& out) {
    const int n = static_cast<int>(f.pi.cols());
    out << "path,node,t,regime";
    for (int z = 1; z <= n; ++z) out << ",pi_" << z;
    out << ",pi_lambda\n";
    char buf[64];
    for (int i = 0; i < static_cast<int>(f.pi.rows()); ++i) {
        std::snprintf(buf, sizeof buf, "%.10g", grid.t(i));
        out << path << ',' << i << ',' << buf << ',' << to_string(f.regime[static_cast<std::size_t>(i)]);
        for (int z = 0; z < n; ++z) {
            std::snprintf(buf, sizeof buf, ",%.12g", f.pi(i, z));
            out << buf;
        }
        std::snprintf(buf, sizeof buf, ",%.12g\n", f.pi_lambda[static_cast<std::size_t>(i)]);
        out << buf;
    }
}

}  // namespace endow
