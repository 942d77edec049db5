#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "endow/bsde.hpp"
#include "endow/config.hpp"
#include "endow/filter.hpp"
#include "endow/longevity.hpp"
#include "endow/pricing.hpp"
#include "endow/simulate.hpp"

namespace endow {

inline constexpr const char* kArtifactVersion = "0.1.0";

struct StageTiming {
    std::string stage;
    double seconds;
};

/// Everything the pipeline computes, kept in memory.
struct PipelineResult {
    ScenarioConfig config;
    TimeGrid grid;
    ValidationReport validation;
    BondSurface surface;
    PathBundle bundle;
    FilterSet filters;
    BsdeSolution pure, claim;
    PriceReport report;
    std::optional<OracleSeries> oracle;
    std::string oracle_note;  ///< why the ODE reference was skipped
    std::vector<StageTiming> timings;
};

/// validate, bond PDE, simulate, filter, BSDEs, price, oracle. Errors are
/// rethrown with the failing stage prefixed to the message.
PipelineResult run_pipeline(const ScenarioConfig& config);

struct RunManifest {
    std::string config_hash;
    std::string version = kArtifactVersion;
    std::vector<StageTiming> stages;
    std::vector<std::string> files;  ///< relative to the output directory
    double p_alpha_0 = 0.0, p_alpha_0_std_error = 0.0;
    double u0_pure = 0.0, u0_claim = 0.0, actuarial = 0.0;

    nlohmann::json to_json() const;
};

/// Writes the report, term structure, strategy profile, diagnostics, overlay
/// and requested dumps into `dir`; returns a manifest listing them.
RunManifest emit_plot_data(const PipelineResult& result, const std::filesystem::path& dir);

/// run_pipeline, emit_plot_data into config.outputs.directory, then manifest.json.
RunManifest run_scenario(const ScenarioConfig& config);

/// ODE reference only (plus the bond price at the initial state); no Monte Carlo.
nlohmann::json run_oracles(const ScenarioConfig& config);

}  // namespace endow
