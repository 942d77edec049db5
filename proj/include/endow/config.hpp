#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "endow/bsde.hpp"
#include "endow/error.hpp"
#include "endow/longevity.hpp"
#include "endow/model.hpp"

namespace endow {

struct NumericsConfig {
    int n_steps = 100;
    std::size_t n_paths = 10000;
    std::uint64_t seed = 0;
    int basis_degree = 2;
    double ridge = 1e-8;
    double integrand_clip = 10.0;
    std::optional<double> value_bound;
    IntegrandEstimator estimator = IntegrandEstimator::Centered;
    int threads = 1;
    double magnitude_cap = 1e6;
    bool antithetic_death_clock = false;
    int renormalize_every = 100;
    PdeOptions pde;
};

struct OutputConfig {
    std::string directory = "out";
    bool dump_paths = false;
    bool dump_filter = false;
    bool dump_bsde = false;
    std::vector<std::size_t> filter_paths{0};
    std::size_t max_dump_paths = 100;
};

struct ScenarioConfig {
    ModelSpec model;
    PostDeathValue post_death = PostDeathValue::PureInvestment;
    NumericsConfig numerics;
    OutputConfig outputs;

    BsdeOptions bsde_options() const;
};

/// Every schema violation found in one document, each as (JSON pointer, message).
/// The error's own detail and message are those of the first issue.
class SchemaError : public Error {
public:
    explicit SchemaError(std::vector<std::pair<std::string, std::string>> issues);
    const std::vector<std::pair<std::string, std::string>>& issues() const noexcept { return issues_; }

private:
    std::vector<std::pair<std::string, std::string>> issues_;
};

/// Strict parse: unknown keys, wrong types, missing required fields and
/// out-of-range values are all reported.
ScenarioConfig parse_config(const nlohmann::json& document);
ScenarioConfig parse_config_text(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Canonical document with every default filled in; parse_config(to_json(c)) == c.
nlohmann::json to_json(const ScenarioConfig& config);

/// FNV-1a 64 of the canonical document's compact dump, as 16 hex digits.
std::string config_hash(const ScenarioConfig& config);

/// Parses a comma-separated dump list (paths, filter, bsde) into the outputs block.
void apply_dump_list(OutputConfig& outputs, const std::string& list);

}  // namespace endow
