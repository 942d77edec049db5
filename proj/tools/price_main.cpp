// Command-line front end: price run | validate | oracle.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "endow/config.hpp"
#include "endow/error.hpp"
#include "endow/scenario.hpp"

namespace {

using namespace endow;

struct RunArgs {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::size_t> paths;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> dump;
    std::optional<int> threads;
};

int report_error(const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (const auto* s = dynamic_cast<const SchemaError*>(&e))
        for (std::size_t i = 1; i < s->issues().size(); ++i)
            std::cerr << "error: SCHEMA(" << s->issues()[i].first << "): " << s->issues()[i].second << '\n';
    return exit_code_for(e.code());
}

int cmd_run(const RunArgs& a) {
    ScenarioConfig c = load_config(a.config);
    if (a.out) c.outputs.directory = *a.out;
    if (a.paths) c.numerics.n_paths = *a.paths;
    if (a.seed) c.numerics.seed = *a.seed;
    if (a.threads) c.numerics.threads = *a.threads;
    if (a.dump) apply_dump_list(c.outputs, *a.dump);
    const RunManifest m = run_scenario(c);
    std::printf("p_alpha_0     %.8f  (se %.2e)\n", m.p_alpha_0, m.p_alpha_0_std_error);
    std::printf("U0_pure       %.8f\n", m.u0_pure);
    std::printf("U0_claim      %.8f\n", m.u0_claim);
    std::printf("actuarial     %.8f\n", m.actuarial);
    std::printf("outputs       %s (%zu files, config %s)\n", c.outputs.directory.c_str(), m.files.size() + 1,
                m.config_hash.c_str());
    return 0;
}

int cmd_validate(const std::string& path) {
    const ScenarioConfig c = load_config(path);
    const TimeGrid grid(c.model.horizon, c.numerics.n_steps);
    const ValidationReport r = validate_model(c.model, grid);
    for (const auto& check : r.checks)
        std::printf("%-28s %s%s%s\n", check.name.c_str(), check.passed ? "ok" : "FAILED",
                    check.message.empty() ? "" : "  ", check.message.c_str());
    for (const auto& w : r.warnings) std::printf("warning: %s\n", w.c_str());
    std::printf("config hash %s\n", config_hash(c).c_str());
    if (!r.ok()) {
        throw_if_rejected(r);
    }
    return 0;
}

int cmd_oracle(const std::string& path) {
    const ScenarioConfig c = load_config(path);
    std::cout << run_oracles(c).dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Utility indifference pricer for survival-contingent claims"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run the full pipeline and write outputs");
    run_cmd->add_option("config", run.config, "Scenario configuration (JSON)")->required();
    run_cmd->add_option("--out", run.out, "Output directory");
    run_cmd->add_option("--paths", run.paths, "Number of Monte Carlo paths")->check(CLI::PositiveNumber);
    run_cmd->add_option("--seed", run.seed, "Random seed");
    run_cmd->add_option("--dump", run.dump, "Comma-separated dumps: paths,filter,bsde");
    run_cmd->add_option("--threads", run.threads, "Worker threads")->check(CLI::PositiveNumber);

    std::string validate_path;
    auto* validate_cmd = app.add_subcommand("validate", "Check a configuration and its model invariants");
    validate_cmd->add_option("config", validate_path, "Scenario configuration (JSON)")->required();

    std::string oracle_path;
    auto* oracle_cmd = app.add_subcommand("oracle", "Evaluate only the deterministic references");
    oracle_cmd->add_option("config", oracle_path, "Scenario configuration (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run_cmd) return cmd_run(run);
        if (*validate_cmd) return cmd_validate(validate_path);
        if (*oracle_cmd) return cmd_oracle(oracle_path);
    } catch (const Error& e) {
        return report_error(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
