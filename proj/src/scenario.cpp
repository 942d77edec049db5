#include "endow/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <limits>

#include "endow/error.hpp"

namespace endow {

using nlohmann::json;

namespace {

template <class F>
auto timed(std::vector<StageTiming>& timings, const char* stage, F&& body) {
    const auto start = std::chrono::steady_clock::now();
    auto record = [&] {
        const std::chrono::duration<double> d = std::chrono::steady_clock::now() - start;
        timings.push_back({stage, d.count()});
    };
    try {
        if constexpr (std::is_void_v<decltype(body())>) {
            body();
            record();
        } else {
            auto out = body();
            record();
            return out;
        }
    } catch (const Error& e) {
        throw Error(e.code(), e.detail(), std::string("stage ") + stage + (e.message().empty() ? "" : ": " + e.message()));
    }
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, path.string(), "cannot open for writing");
    return out;
}

void close_out(std::ofstream& out, const std::filesystem::path& path) {
    out.close();
    if (!out) throw Error(ErrorCode::Io, path.string(), "write failed");
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

json diagnostics_summary(const BsdeSolution& s) {
    double min_r2 = 1.0, max_cond = 0.0;
    std::size_t clipped_values = 0, clipped_integrands = 0;
    for (const auto& d : s.diagnostics) {
        min_r2 = std::min({min_r2, d.r2_value});
        max_cond = std::max(max_cond, d.condition);
        clipped_values += d.clipped_values;
        clipped_integrands += d.clipped_integrands;
    }
    return {{"min_r2_value", min_r2},
            {"max_condition", max_cond},
            {"clipped_values", clipped_values},
            {"clipped_integrands", clipped_integrands},
            {"value_bound", s.bound}};
}

}  // namespace

PipelineResult run_pipeline(const ScenarioConfig& config) {
    PipelineResult r;
    r.config = config;
    const ModelSpec& spec = r.config.model;
    const NumericsConfig& n = r.config.numerics;
    const BsdeOptions bsde = r.config.bsde_options();

    timed(r.timings, "validate", [&] {
        r.grid = TimeGrid(spec.horizon, n.n_steps);
        r.validation = validate_model(spec, r.grid);
        throw_if_rejected(r.validation);
    });
    timed(r.timings, "bond", [&] { r.surface = build_bond_surface(spec, n.pde); });
    timed(r.timings, "simulate", [&] {
        SimulationOptions so;
        so.n_paths = n.n_paths;
        so.seed = n.seed;
        so.threads = n.threads;
        so.magnitude_cap = n.magnitude_cap;
        so.antithetic_death_clock = n.antithetic_death_clock;
        r.bundle = simulate_paths(spec, r.grid, r.surface, so);
    });
    timed(r.timings, "filter",
          [&] { r.filters = compute_filters(spec, r.bundle, n.threads, n.renormalize_every); });
    timed(r.timings, "bsde", [&] {
        r.pure = solve_pure_investment_bsde(spec, r.bundle, r.surface, &r.filters, bsde);
        r.claim = solve_claim_bsde(spec, r.bundle, r.filters, r.surface, &r.pure, bsde);
    });
    timed(r.timings, "price",
          [&] { r.report = build_price_report(spec, r.bundle, r.filters, r.surface, r.claim, r.pure, bsde); });
    timed(r.timings, "oracle", [&] {
        if (auto why = oracle_unavailable(spec))
            r.oracle_note = *why;
        else
            r.oracle = ode_oracle(spec, r.grid, r.config.post_death);
    });
    return r;
}

json RunManifest::to_json() const {
    json stages_json = json::array();
    for (const auto& s : stages) stages_json.push_back({{"stage", s.stage}, {"seconds", s.seconds}});
    return {{"config_hash", config_hash},
            {"version", version},
            {"stages", stages_json},
            {"files", files},
            {"headline",
             {{"p_alpha_0", p_alpha_0},
              {"p_alpha_0_std_error", p_alpha_0_std_error},
              {"U0_pure", u0_pure},
              {"U0_claim", u0_claim},
              {"actuarial_price", actuarial}}}};
}

RunManifest emit_plot_data(const PipelineResult& r, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::Io, dir.string(), ec.message());

    RunManifest m;
    m.config_hash = config_hash(r.config);
    m.stages = r.timings;
    const PriceReport& rep = r.report;
    m.p_alpha_0 = rep.price.headline;
    m.p_alpha_0_std_error = rep.price.headline_std_error;
    m.u0_pure = rep.u0_pure;
    m.u0_claim = rep.u0_claim;
    m.actuarial = rep.actuarial;
    const int N = r.grid.n_steps();
    const double k = r.config.model.claim.bound();

    auto write = [&](const std::string& name, auto&& body) {
        const auto path = dir / name;
        auto out = open_out(path);
        body(out);
        close_out(out, path);
        m.files.push_back(name);
    };

    write("price_report.json", [&](std::ostream& out) {
        std::size_t after_death_nonzero = 0;
        for (std::size_t i = 0; i < rep.price.price.n_nodes(); ++i)
            for (std::size_t p = 0; p < r.bundle.n_paths; ++p)
                if (r.bundle.tau[p] <= r.grid.t(static_cast<int>(i)) && rep.price.price(i, p) != 0.0) ++after_death_nonzero;
        std::size_t deaths = 0;
        for (std::size_t p = 0; p < r.bundle.n_paths; ++p) deaths += r.bundle.censored(p) ? 0 : 1;
        json doc = {
            {"p_alpha_0", rep.price.headline},
            {"p_alpha_0_std_error", rep.price.headline_std_error},
            {"U0_pure", rep.u0_pure},
            {"U0_claim", rep.u0_claim},
            {"actuarial_price", rep.actuarial},
            {"claim_bound", k},
            {"risk_aversion", r.config.model.risk_aversion},
            {"n_paths", r.bundle.n_paths},
            {"n_steps", N},
            {"deaths_before_horizon", deaths},
            {"invariants",
             {{"headline_in_range", rep.price.headline >= 0.0 && rep.price.headline <= k},
              {"min_price", rep.price.min_price},
              {"max_price", rep.price.max_price},
              {"nonzero_after_death", after_death_nonzero}}},
            {"strategy",
             {{"theta1_0", rep.theta1.mean.empty() ? 0.0 : rep.theta1.mean[0]},
              {"theta2_0", rep.theta2.mean.empty() ? 0.0 : rep.theta2.mean[0]},
              {"max_admissibility_integral", rep.max_admissibility},
              {"max_exp_moment", rep.wealth.max_exp_moment},
              {"wealth_bookkeeping_error", rep.wealth.bookkeeping_error}}},
            {"martingale",
             {{"mean_drift", rep.martingale.mean_drift},
              {"fraction_insignificant", rep.martingale.fraction_insignificant},
              {"fraction_positive", rep.martingale.fraction_positive},
              {"fraction_negative", rep.martingale.fraction_negative}}},
            {"bond", {{"F0", r.surface.price(0.0, r.config.model.mu_0, r.config.model.y_0)},
                      {"self_check_change", std::isnan(r.surface.self_check_change) ? json(nullptr)
                                                                                    : json(r.surface.self_check_change)}}},
            {"filter", {{"min_pi_lambda", r.filters.min_pi_lambda}, {"max_pi_lambda", r.filters.max_pi_lambda}}},
            {"bsde", {{"pure", diagnostics_summary(r.pure)}, {"claim", diagnostics_summary(r.claim)}}},
            {"warnings", r.validation.warnings},
            {"oracle", r.oracle ? json{{"U0_pure", r.oracle->pure[0]},
                                       {"U0_claim", r.oracle->claim[0]},
                                       {"p_alpha_0", (r.oracle->claim[0] - r.oracle->pure[0]) /
                                                         r.config.model.risk_aversion}}
                                : json{{"unavailable", r.oracle_note}}},
        };
        out << doc.dump(2) << '\n';
    });

    write("price_term_structure.csv", [&](std::ostream& out) { write_term_structure_csv(rep, r.grid, out); });
    write("strategy_profile.csv", [&](std::ostream& out) { write_strategy_csv(rep, r.grid, out); });

    write("bsde_diagnostics.csv", [&](std::ostream& out) {
        out << "node,t,U0_mean,Uhat_mean,R2_value,R2_z1,R2_z2,R2_z3,cond\n";
        for (int i = 0; i <= N; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            out << i << ',' << fmt(r.grid.t(i)) << ',' << fmt(r.pure.mean(ii)) << ',' << fmt(r.claim.mean(ii));
            if (i < N) {
                const NodeDiagnostics& d = r.claim.diagnostics[ii];
                out << ',' << fmt(d.r2_value) << ',' << fmt(d.r2_z1) << ',' << fmt(d.r2_z2) << ',' << fmt(d.r2_z3)
                    << ',' << fmt(d.condition) << '\n';
            } else {
                out << ",,,,,\n";
            }
        }
    });

    if (r.oracle) {
        write("oracle_overlay.csv", [&](std::ostream& out) {
            out << "t,U0_solver,U0_oracle,Uhat_solver,Uhat_oracle\n";
            for (int i = 0; i <= N; ++i) {
                const auto ii = static_cast<std::size_t>(i);
                out << fmt(r.grid.t(i)) << ',' << fmt(r.pure.mean(ii)) << ',' << fmt(r.oracle->pure[ii]) << ','
                    << fmt(r.claim.mean(ii)) << ',' << fmt(r.oracle->claim[ii]) << '\n';
            }
        });
    }

    const OutputConfig& o = r.config.outputs;
    const std::size_t shown = std::min(o.max_dump_paths, r.bundle.n_paths);
    if (o.dump_paths) {
        write("paths.csv", [&](std::ostream& out) { write_paths_csv(r.bundle, out, shown); });
        write("bond_surface.csv", [&](std::ostream& out) { write_surface_csv(r.surface, out); });
    }
    if (o.dump_filter) {
        for (std::size_t idx : o.filter_paths) {
            if (idx >= r.bundle.n_paths)
                throw Error(ErrorCode::Schema, "/outputs/filter_paths", "path index " + std::to_string(idx) + " out of range");
            const FilterPath f = filter_path(r.config.model, r.bundle, idx, r.config.numerics.renormalize_every);
            write("filter_path_" + std::to_string(idx) + ".csv",
                  [&](std::ostream& out) { write_filter_csv(f, idx, r.grid, out); });
        }
    }
    if (o.dump_bsde) {
        write("bsde_paths.csv", [&](std::ostream& out) {
            out << "path,node,t,U0,Uhat,p_alpha,z1,z2,z3,gamma1,gamma2,gamma3,theta1,theta2,wealth\n";
            for (std::size_t p = 0; p < shown; ++p)
                for (int i = 0; i <= N; ++i) {
                    const auto ii = static_cast<std::size_t>(i);
                    out << p << ',' << i << ',' << fmt(r.grid.t(i)) << ',' << fmt(r.pure.value(ii, p)) << ','
                        << fmt(r.claim.value(ii, p)) << ',' << fmt(rep.price.price(ii, p));
                    if (i < N)
                        out << ',' << fmt(r.pure.z1(ii, p)) << ',' << fmt(r.pure.z2(ii, p)) << ','
                            << fmt(r.pure.z3(ii, p)) << ',' << fmt(r.claim.z1(ii, p)) << ',' << fmt(r.claim.z2(ii, p))
                            << ',' << fmt(r.claim.z3(ii, p)) << ',' << fmt(rep.claim_strategy.theta1(ii, p)) << ','
                            << fmt(rep.claim_strategy.theta2(ii, p));
                    else
                        out << ",,,,,,,,";
                    out << ',' << fmt(rep.wealth.wealth(ii, p)) << '\n';
                }
        });
    }
    return m;
}

RunManifest run_scenario(const ScenarioConfig& config) {
    const PipelineResult r = run_pipeline(config);
    const std::filesystem::path dir = config.outputs.directory;
    RunManifest m = emit_plot_data(r, dir);
    const auto path = dir / "manifest.json";
    auto out = open_out(path);
    out << m.to_json().dump(2) << '\n';
    close_out(out, path);
    return m;
}

json run_oracles(const ScenarioConfig& config) {
    const ModelSpec& spec = config.model;
    const TimeGrid grid(spec.horizon, config.numerics.n_steps);
    throw_if_rejected(validate_model(spec, grid));
    json doc = {{"config_hash", config_hash(config)}};
    const BondSurface surface = build_bond_surface(spec, config.numerics.pde);
    doc["bond_price_0"] = surface.price(0.0, spec.mu_0, spec.y_0);
    if (auto why = oracle_unavailable(spec)) {
        doc["ode"] = {{"unavailable", *why}};
        return doc;
    }
    const OracleSeries o = ode_oracle(spec, grid, config.post_death);
    doc["ode"] = {{"U0_pure", o.pure[0]},
                  {"U0_claim", o.claim[0]},
                  {"p_alpha_0", (o.claim[0] - o.pure[0]) / spec.risk_aversion}};
    return doc;
}

}  // namespace endow
