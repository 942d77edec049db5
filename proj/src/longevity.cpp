#include "endow/longevity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "endow/error.hpp"
#include "endow/rng.hpp"

namespace endow {

namespace {

struct UniformAxis {
    double lo;
    double h;
    int n;  // intervals

    double at(int i) const { return lo + h * i; }
};

UniformAxis make_axis(double lo, double hi, int n) { return {lo, (hi - lo) / n, n}; }

// Locate x on a uniform axis: cell index and weight of the right node.
inline void locate(const std::vector<double>& axis, double x, std::size_t& i, double& w) {
    const std::size_t n = axis.size();
    if (n == 1) {
        i = 0;
        w = 0.0;
        return;
    }
    const double h = (axis.back() - axis.front()) / static_cast<double>(n - 1);
    double u = (x - axis.front()) / h;
    u = std::clamp(u, 0.0, static_cast<double>(n - 1));
    i = std::min(static_cast<std::size_t>(u), n - 2);
    w = u - static_cast<double>(i);
}

// Solves a tridiagonal system in place (rhs becomes the solution).
void thomas(std::vector<double>& lower, std::vector<double>& diag, std::vector<double>& upper,
            std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = lower[i] / diag[i - 1];
        diag[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

// One-dimensional operator b F' + 1/2 s^2 F'' - r F on a line, as a tridiagonal
// stencil. Outer nodes extrapolate linearly (F'' = 0).
inline void stencil(std::size_t i, std::size_t n_nodes, double h, double b, double s2, double r, double& lo,
                    double& mid, double& up) {
    if (i == 0) {
        lo = 0.0;
        mid = -b / h - r;
        up = b / h;
    } else if (i + 1 == n_nodes) {
        lo = -b / h;
        mid = b / h - r;
        up = 0.0;
    } else {
        lo = -b / (2 * h) + 0.5 * s2 / (h * h);
        mid = -s2 / (h * h) - r;
        up = b / (2 * h) + 0.5 * s2 / (h * h);
    }
}

BondSurface solve_on_domain(const ModelSpec& spec, const PdeOptions& opt, const StateDomain& dom) {
    if (opt.n_mu < 4 || opt.n_y < 2 || opt.n_t < 1)
        throw Error(ErrorCode::GridTooCoarse, "pde_grid", "need n_mu >= 4, n_y >= 2, n_t >= 1");
    const UniformAxis ax_mu = make_axis(dom.mu_lo, dom.mu_hi, opt.n_mu);
    const UniformAxis ax_y = make_axis(dom.y_lo, dom.y_hi, opt.n_y);
    const std::size_t nm = static_cast<std::size_t>(opt.n_mu) + 1;
    const std::size_t ny = static_cast<std::size_t>(opt.n_y) + 1;
    const std::size_t nt = static_cast<std::size_t>(opt.n_t) + 1;
    const double T = spec.horizon;
    const double dtau = T / opt.n_t;

    BondSurface s;
    s.t_axis.resize(nt);
    for (std::size_t k = 0; k < nt; ++k) s.t_axis[k] = k + 1 == nt ? T : T * static_cast<double>(k) / opt.n_t;
    s.mu_axis.resize(nm);
    for (std::size_t i = 0; i < nm; ++i) s.mu_axis[i] = ax_mu.at(static_cast<int>(i));
    s.y_axis.resize(ny);
    for (std::size_t j = 0; j < ny; ++j) s.y_axis[j] = ax_y.at(static_cast<int>(j));
    s.F.assign(nt * nm * ny, 1.0);

    const std::size_t m = nm * ny;
    auto at = [ny](std::size_t i, std::size_t j) { return i * ny + j; };
    std::vector<double> cur(m, 1.0), a1f(m), a2f(m), work(m);
    std::vector<double> b1(m), v1(m), b2(m), v2(m);
    std::vector<double> lo, mid, up, rhs;
    const double tiny = std::numeric_limits<double>::min();

    for (std::size_t step = nt - 1; step-- > 0;) {
        const double tm = (static_cast<double>(step) + 0.5) * dtau;
        for (std::size_t i = 0; i < nm; ++i) {
            const double mu = s.mu_axis[i];
            for (std::size_t j = 0; j < ny; ++j) {
                const double y = s.y_axis[j];
                const std::size_t q = at(i, j);
                b1[q] = spec.mu_drift(tm, mu, y) + spec.premium_mu(tm, mu, y);
                const double sm = spec.mu_vol(tm, mu, y);
                v1[q] = sm * sm;
                b2[q] = spec.y_drift(tm, y) + spec.premium_y(tm, mu, y);
                const double sy = spec.y_vol(tm, y);
                v2[q] = sy * sy;
            }
        }
        // Explicit operator applications.
        double l, c, u;
        for (std::size_t i = 0; i < nm; ++i) {
            for (std::size_t j = 0; j < ny; ++j) {
                const std::size_t q = at(i, j);
                stencil(i, nm, ax_mu.h, b1[q], v1[q], s.mu_axis[i], l, c, u);
                double v = c * cur[q];
                if (i > 0) v += l * cur[at(i - 1, j)];
                if (i + 1 < nm) v += u * cur[at(i + 1, j)];
                a1f[q] = v;
                stencil(j, ny, ax_y.h, b2[q], v2[q], 0.0, l, c, u);
                v = c * cur[q];
                if (j > 0) v += l * cur[at(i, j - 1)];
                if (j + 1 < ny) v += u * cur[at(i, j + 1)];
                a2f[q] = v;
            }
        }
        // Predictor.
        for (std::size_t q = 0; q < m; ++q) work[q] = cur[q] + dtau * (a1f[q] + a2f[q]);
        // mu-direction corrector.
        lo.resize(nm);
        mid.resize(nm);
        up.resize(nm);
        rhs.resize(nm);
        for (std::size_t j = 0; j < ny; ++j) {
            for (std::size_t i = 0; i < nm; ++i) {
                const std::size_t q = at(i, j);
                stencil(i, nm, ax_mu.h, b1[q], v1[q], s.mu_axis[i], l, c, u);
                lo[i] = -0.5 * dtau * l;
                mid[i] = 1.0 - 0.5 * dtau * c;
                up[i] = -0.5 * dtau * u;
                rhs[i] = work[q] - 0.5 * dtau * a1f[q];
            }
            thomas(lo, mid, up, rhs);
            for (std::size_t i = 0; i < nm; ++i) work[at(i, j)] = rhs[i];
        }
        // y-direction corrector.
        lo.resize(ny);
        mid.resize(ny);
        up.resize(ny);
        rhs.resize(ny);
        for (std::size_t i = 0; i < nm; ++i) {
            for (std::size_t j = 0; j < ny; ++j) {
                const std::size_t q = at(i, j);
                stencil(j, ny, ax_y.h, b2[q], v2[q], 0.0, l, c, u);
                lo[j] = -0.5 * dtau * l;
                mid[j] = 1.0 - 0.5 * dtau * c;
                up[j] = -0.5 * dtau * u;
                rhs[j] = work[q] - 0.5 * dtau * a2f[q];
            }
            thomas(lo, mid, up, rhs);
            for (std::size_t j = 0; j < ny; ++j) work[at(i, j)] = rhs[j];
        }
        for (std::size_t q = 0; q < m; ++q) {
            if (!std::isfinite(work[q])) throw Error(ErrorCode::NumericOverflow, "bond_pde", "non-finite bond price");
            cur[q] = std::clamp(work[q], tiny, 1.0);
        }
        std::copy(cur.begin(), cur.end(), s.F.begin() + static_cast<std::ptrdiff_t>(step * m));
    }

    // First partials: central inside, second-order one-sided at the edges.
    s.F_mu.assign(s.F.size(), 0.0);
    s.F_y.assign(s.F.size(), 0.0);
    for (std::size_t k = 0; k < nt; ++k) {
        for (std::size_t i = 0; i < nm; ++i) {
            for (std::size_t j = 0; j < ny; ++j) {
                const auto f = [&](std::size_t ii, std::size_t jj) { return s.F[s.index(k, ii, jj)]; };
                double dm;
                if (i == 0)
                    dm = (-3 * f(0, j) + 4 * f(1, j) - f(2, j)) / (2 * ax_mu.h);
                else if (i + 1 == nm)
                    dm = (3 * f(i, j) - 4 * f(i - 1, j) + f(i - 2, j)) / (2 * ax_mu.h);
                else
                    dm = (f(i + 1, j) - f(i - 1, j)) / (2 * ax_mu.h);
                double dy;
                if (ny < 3)
                    dy = (f(i, ny - 1) - f(i, 0)) / ax_y.h;
                else if (j == 0)
                    dy = (-3 * f(i, 0) + 4 * f(i, 1) - f(i, 2)) / (2 * ax_y.h);
                else if (j + 1 == ny)
                    dy = (3 * f(i, j) - 4 * f(i, j - 1) + f(i, j - 2)) / (2 * ax_y.h);
                else
                    dy = (f(i, j + 1) - f(i, j - 1)) / (2 * ax_y.h);
                s.F_mu[s.index(k, i, j)] = dm;
                s.F_y[s.index(k, i, j)] = dy;
            }
        }
    }
    s.c.assign(s.F.size(), 0.0);
    s.d.assign(s.F.size(), 0.0);
    s.drift.assign(s.F.size(), 0.0);
    return s;
}

}  // namespace

BondSurface::Point BondSurface::at(double t, double mu, double y) const {
    std::size_t k, i, j;
    double wt, wm, wy;
    locate(t_axis, t, k, wt);
    locate(mu_axis, mu, i, wm);
    locate(y_axis, y, j, wy);
    const std::size_t k1 = std::min(k + 1, n_t() - 1);
    const std::size_t i1 = std::min(i + 1, n_mu() - 1);
    const std::size_t j1 = std::min(j + 1, n_y() - 1);
    Point p{0.0, 0.0, 0.0, 0.0};
    const std::size_t ks[2] = {k, k1};
    const std::size_t is[2] = {i, i1};
    const std::size_t js[2] = {j, j1};
    const double wts[2] = {1.0 - wt, wt};
    const double wms[2] = {1.0 - wm, wm};
    const double wys[2] = {1.0 - wy, wy};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int e = 0; e < 2; ++e) {
                const double w = wts[a] * wms[b] * wys[e];
                if (w == 0.0) continue;
                const std::size_t q = index(ks[a], is[b], js[e]);
                p.F += w * F[q];
                p.c += w * c[q];
                p.d += w * d[q];
                p.drift += w * drift[q];
            }
    return p;
}

bool BondSurface::contains(double mu, double y) const {
    return mu >= mu_axis.front() && mu <= mu_axis.back() && y >= y_axis.front() && y <= y_axis.back();
}

BondSurface solve_bond_pde(const ModelSpec& spec, const PdeOptions& options) {
    const StateDomain dom = options.domain ? *options.domain : state_domain(spec, options.width_sd);
    BondSurface fine = solve_on_domain(spec, options, dom);
    if (options.self_check) {
        PdeOptions half = options;
        half.n_mu = std::max(4, options.n_mu / 2);
        half.n_y = std::max(2, options.n_y / 2);
        half.n_t = std::max(1, options.n_t / 2);
        const BondSurface coarse = solve_on_domain(spec, half, dom);
        double worst = 0.0;
        for (std::size_t i = 0; i < coarse.n_mu(); ++i)
            for (std::size_t j = 0; j < coarse.n_y(); ++j) {
                const double fc = coarse.F[coarse.index(0, i, j)];
                std::size_t ii, jj;
                double wm, wy;
                locate(fine.mu_axis, coarse.mu_axis[i], ii, wm);
                locate(fine.y_axis, coarse.y_axis[j], jj, wy);
                const std::size_t ii1 = std::min(ii + 1, fine.n_mu() - 1);
                const std::size_t jj1 = std::min(jj + 1, fine.n_y() - 1);
                const double ff = (1 - wm) * (1 - wy) * fine.F[fine.index(0, ii, jj)] +
                                  wm * (1 - wy) * fine.F[fine.index(0, ii1, jj)] +
                                  (1 - wm) * wy * fine.F[fine.index(0, ii, jj1)] +
                                  wm * wy * fine.F[fine.index(0, ii1, jj1)];
                worst = std::max(worst, std::abs(ff - fc));
            }
        fine.self_check_change = worst;
        if (worst > options.self_check_tolerance)
            throw Error(ErrorCode::GridTooCoarse, "bond_pde",
                        "grid halving changed F by " + std::to_string(worst));
    }
    return fine;
}

void bond_volatilities(BondSurface& s, const ModelSpec& spec) {
    s.c.assign(s.F.size(), 0.0);
    s.d.assign(s.F.size(), 0.0);
    for (std::size_t k = 0; k < s.n_t(); ++k)
        for (std::size_t i = 0; i < s.n_mu(); ++i)
            for (std::size_t j = 0; j < s.n_y(); ++j) {
                const std::size_t q = s.index(k, i, j);
                const double t = s.t_axis[k], mu = s.mu_axis[i], y = s.y_axis[j];
                s.c[q] = spec.mu_vol(t, mu, y) * s.F_mu[q] / s.F[q];
                s.d[q] = spec.y_vol(t, y) * s.F_y[q] / s.F[q];
            }
}

void bond_drift(BondSurface& s, const ModelSpec& spec) {
    s.drift.assign(s.F.size(), 0.0);
    for (std::size_t k = 0; k < s.n_t(); ++k)
        for (std::size_t i = 0; i < s.n_mu(); ++i)
            for (std::size_t j = 0; j < s.n_y(); ++j) {
                const std::size_t q = s.index(k, i, j);
                const double t = s.t_axis[k], mu = s.mu_axis[i], y = s.y_axis[j];
                s.drift[q] = s.c[q] * spec.premium_mu(t, mu, y) + s.d[q] * spec.premium_y(t, mu, y);
            }
}

BondSurface build_bond_surface(const ModelSpec& spec, const PdeOptions& options) {
    BondSurface s = solve_bond_pde(spec, options);
    bond_volatilities(s, spec);
    bond_drift(s, spec);
    return s;
}

McEstimate nested_mc_bond_price(const ModelSpec& spec, double t, double mu, double y, std::size_t n_inner,
                                std::uint64_t seed, int steps_per_year, std::uint64_t point_id) {
    const double remaining = spec.horizon - t;
    if (remaining <= 0.0 || n_inner == 0) return {1.0, 0.0};
    const int steps = std::max(1, static_cast<int>(std::ceil(steps_per_year * remaining)));
    const double dt = remaining / steps;
    const double sq = std::sqrt(dt);
    const std::uint64_t key = seed ^ mix64(point_id + 0x51ED27ULL);

    double mean = 0.0, m2 = 0.0;
    for (std::size_t p = 0; p < n_inner; ++p) {
        CounterRng rng(key, Stream::NestedBond, p);
        std::normal_distribution<double> normal;
        double m = mu, yy = y, integral = 0.0;
        for (int k = 0; k < steps; ++k) {
            const double s = t + k * dt;
            const double mp = std::max(m, 0.0);
            const double dm = (spec.mu_drift(s, mp, yy) + spec.premium_mu(s, mp, yy)) * dt +
                              spec.mu_vol(s, mp, yy) * sq * normal(rng);
            const double dy = (spec.y_drift(s, yy) + spec.premium_y(s, mp, yy)) * dt + spec.y_vol(s, yy) * sq * normal(rng);
            const double m_next = m + dm;
            integral += 0.5 * (mp + std::max(m_next, 0.0)) * dt;
            m = m_next;
            yy += dy;
        }
        const double v = std::exp(-integral);
        const double delta = v - mean;
        mean += delta / static_cast<double>(p + 1);
        m2 += delta * (v - mean);
    }
    const double n = static_cast<double>(n_inner);
    const double var = n > 1 ? m2 / (n - 1) : 0.0;
    return {mean, std::sqrt(var / n)};
}

void write_surface_csv(const BondSurface& s, std::ostream& out) {
    out << "t,mu,y,F,cB,dB,muB\n";
    char buf[256];
    for (std::size_t k = 0; k < s.n_t(); ++k)
        for (std::size_t i = 0; i < s.n_mu(); ++i)
            for (std::size_t j = 0; j < s.n_y(); ++j) {
                const std::size_t q = s.index(k, i, j);
                std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.12g,%.12g,%.12g,%.12g\n", s.t_axis[k],
                              s.mu_axis[i], s.y_axis[j], s.F[q], s.c[q], s.d[q], s.drift[q]);
                out << buf;
            }
}

}  // namespace endow
