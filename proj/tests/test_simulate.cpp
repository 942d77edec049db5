#include "doctest.h"

#include <cmath>
#include <sstream>

#include "endow/longevity.hpp"
#include "endow/simulate.hpp"
#include "support.hpp"

using namespace endow;

namespace {

PathBundle run(const ModelSpec& s, int steps, std::size_t paths, std::uint64_t seed, int threads = 1) {
    const TimeGrid grid(s.horizon, steps);
    PdeOptions pde;
    pde.n_mu = 32;
    pde.n_y = 8;
    pde.n_t = 50;
    pde.self_check = false;
    const BondSurface surface = build_bond_surface(s, pde);
    SimulationOptions o;
    o.n_paths = paths;
    o.seed = seed;
    o.threads = threads;
    return simulate_paths(s, grid, surface, o);
}

}  // namespace

TEST_CASE("Brownian increments have the step variance") {
    const PathBundle b = run(testing::deterministic_spec(), 10, 20000, 1);
    const double dt = b.grid.dt();
    for (const NodeField* f : {&b.dW1, &b.dW2, &b.dW3}) {
        double s = 0, s2 = 0;
        for (double v : f->raw()) {
            s += v;
            s2 += v * v;
        }
        const double n = static_cast<double>(f->raw().size());
        CHECK(std::abs(s / n) < 4 * std::sqrt(dt / n));
        CHECK(s2 / n == doctest::Approx(dt).epsilon(0.02));
    }
}

TEST_CASE("log-Euler risky asset is exact for constant coefficients") {
    const PathBundle b = run(testing::deterministic_spec(), 20, 100, 2);
    const double dt = b.grid.dt();
    for (std::size_t p = 0; p < 100; ++p)
        for (std::size_t i = 0; i < 20; ++i) {
            const double step = b.log_s1(i + 1, p) - b.log_s1(i, p);
            CHECK(step == doctest::Approx((0.06 - 0.02) * dt + 0.2 * b.dW1(i, p)).epsilon(1e-12));
        }
}

TEST_CASE("constant mortality gives deterministic survivor index and hazard") {
    const PathBundle b = run(testing::deterministic_spec(), 50, 200, 3);
    for (std::size_t p = 0; p < 200; ++p) {
        CHECK(b.survivor(50, p) == doctest::Approx(std::exp(-0.01)).epsilon(1e-12));
        CHECK(b.hazard(50, p) == doctest::Approx(0.05).epsilon(1e-12));
        CHECK(b.mu(25, p) == doctest::Approx(0.01));
    }
}

TEST_CASE("death times follow the Cox construction") {
    const std::size_t M = 40000;
    const PathBundle b = run(testing::deterministic_spec(), 20, M, 4);
    std::size_t alive = 0;
    for (std::size_t p = 0; p < M; ++p) {
        if (b.censored(p)) {
            ++alive;
            CHECK(b.death_node(p) == 21);
            continue;
        }
        // Hazard is linear in t here, so the crossing is tau = clock / 0.05.
        CHECK(b.tau[p] == doctest::Approx(b.clock[p] / 0.05).epsilon(1e-9));
        const std::size_t k = b.death_node(p);
        CHECK(b.grid.t(static_cast<int>(k)) >= b.tau[p]);
        CHECK(b.died_by(k, p) == 1);
        if (k > 0) CHECK(b.died_by(k - 1, p) == 0);
    }
    const double q = std::exp(-0.05);
    const double frac = static_cast<double>(alive) / M;
    CHECK(std::abs(frac - q) < 3 * std::sqrt(q * (1 - q) / M));
}

TEST_CASE("hidden chain stays in range and moves") {
    const PathBundle b = run(testing::deterministic_spec(), 50, 2000, 5);
    std::size_t switches = 0;
    for (std::size_t p = 0; p < 2000; ++p)
        for (std::size_t i = 0; i < 50; ++i) {
            CHECK(b.state(i, p) >= 0);
            CHECK(b.state(i, p) < 2);
            switches += b.state(i + 1, p) != b.state(i, p);
        }
    CHECK(switches > 100);
}

TEST_CASE("CIR intensity stays nonnegative and the bond is a martingale without premia") {
    const ModelSpec s = testing::cir_spec(0.5, 0.02, 0.1, 0.015, 2.0);
    const std::size_t M = 20000;
    const PathBundle b = run(s, 100, M, 6);
    double sum = 0, sum2 = 0;
    for (std::size_t p = 0; p < M; ++p) {
        for (std::size_t i = 0; i <= 100; ++i) CHECK(b.mu(i, p) >= 0.0);
        const double v = b.s2(100, p);
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / M;
    const double se = std::sqrt((sum2 / M - mean * mean) / (M - 1));
    CHECK(std::abs(mean - b.s2(0, 0)) < 3 * se + 1e-12);
}

TEST_CASE("paths do not depend on the worker count") {
    const ModelSpec s = testing::cir_spec();
    const PathBundle a = run(s, 30, 9000, 7, 1);
    const PathBundle c = run(s, 30, 9000, 7, 3);
    CHECK(a.mu.raw() == c.mu.raw());
    CHECK(a.log_s2.raw() == c.log_s2.raw());
    CHECK(a.tau == c.tau);
    CHECK(a.chain == c.chain);
}

TEST_CASE("different seeds give different paths") {
    const ModelSpec s = testing::deterministic_spec();
    CHECK(run(s, 5, 50, 1).dW1.raw() != run(s, 5, 50, 2).dW1.raw());
}

TEST_CASE("paths CSV has one row per node and path") {
    const PathBundle b = run(testing::deterministic_spec(), 4, 10, 8);
    std::ostringstream out;
    write_paths_csv(b, out, 3);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "path,node,t,mu,Y,S1,S2,Smu,Lambda,H");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 3 * 5);
}
