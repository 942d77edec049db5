#include "endow/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace endow {

using nlohmann::json;

SchemaError::SchemaError(std::vector<std::pair<std::string, std::string>> issues)
    : Error(ErrorCode::Schema, issues.empty() ? "/" : issues.front().first,
            issues.empty() ? "invalid document" : issues.front().second),
      issues_(std::move(issues)) {}

BsdeOptions ScenarioConfig::bsde_options() const {
    BsdeOptions o;
    o.basis_degree = numerics.basis_degree;
    o.ridge = numerics.ridge;
    o.integrand_clip = numerics.integrand_clip;
    o.value_bound = numerics.value_bound;
    o.estimator = numerics.estimator;
    o.post_death = post_death;
    o.threads = numerics.threads;
    return o;
}

namespace {

bool is_count(const json& v) { return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0); }

class Reader {
public:
    std::vector<std::pair<std::string, std::string>> issues;

    void fail(const std::string& path, const std::string& message) { issues.emplace_back(path, message); }

    // True when `j` is an object; reports keys outside `allowed`.
    bool object(const json& j, const std::string& path, const std::set<std::string>& allowed) {
        if (!j.is_object()) {
            fail(path.empty() ? "/" : path, "must be an object");
            return false;
        }
        for (const auto& [key, value] : j.items())
            if (!allowed.count(key)) fail(path + "/" + key, "unknown key");
        return true;
    }

    const json* child(const json& obj, const std::string& path, const char* key, bool required) {
        auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) fail(path + "/" + key, "required");
            return nullptr;
        }
        return &*it;
    }

    bool number(const json& obj, const std::string& path, const char* key, double& out, bool required = false) {
        const json* v = child(obj, path, key, required);
        if (!v) return false;
        if (!v->is_number() || !std::isfinite(v->get<double>())) {
            fail(path + "/" + key, "must be a finite number");
            return false;
        }
        out = v->get<double>();
        return true;
    }

    bool integer(const json& obj, const std::string& path, const char* key, long long& out, bool required = false) {
        const json* v = child(obj, path, key, required);
        if (!v) return false;
        if (!v->is_number_integer()) {
            fail(path + "/" + key, "must be an integer");
            return false;
        }
        out = v->get<long long>();
        return true;
    }

    bool boolean(const json& obj, const std::string& path, const char* key, bool& out) {
        const json* v = child(obj, path, key, false);
        if (!v) return false;
        if (!v->is_boolean()) {
            fail(path + "/" + key, "must be a boolean");
            return false;
        }
        out = v->get<bool>();
        return true;
    }

    bool string(const json& obj, const std::string& path, const char* key, std::string& out, bool required = false) {
        const json* v = child(obj, path, key, required);
        if (!v) return false;
        if (!v->is_string()) {
            fail(path + "/" + key, "must be a string");
            return false;
        }
        out = v->get<std::string>();
        return true;
    }

    bool vector(const json& obj, const std::string& path, const char* key, std::vector<double>& out,
                bool required = false) {
        const json* v = child(obj, path, key, required);
        if (!v) return false;
        if (!v->is_array() || v->empty()) {
            fail(path + "/" + key, "must be a non-empty array of numbers");
            return false;
        }
        out.clear();
        for (std::size_t i = 0; i < v->size(); ++i) {
            const json& e = (*v)[i];
            if (!e.is_number() || !std::isfinite(e.get<double>())) {
                fail(path + "/" + key + "/" + std::to_string(i), "must be a finite number");
                return false;
            }
            out.push_back(e.get<double>());
        }
        return true;
    }

    void positive_int(const json& obj, const std::string& path, const char* key, int& out) {
        long long v = out;
        if (integer(obj, path, key, v)) {
            if (v < 1 || v > std::numeric_limits<int>::max())
                fail(path + "/" + key, "must be ≥ 1");
            else
                out = static_cast<int>(v);
        }
    }

    void positive_number(const json& obj, const std::string& path, const char* key, double& out) {
        double v = out;
        if (number(obj, path, key, v)) {
            if (!(v > 0.0))
                fail(path + "/" + key, "must be > 0");
            else
                out = v;
        }
    }

    CoefficientFunction coefficient(const json& obj, const std::string& path, const char* key,
                                    const CoefficientFunction& fallback, bool required = false) {
        const json* v = child(obj, path, key, required);
        if (!v) return fallback;
        const std::string p = path + "/" + key;
        if (v->is_number()) return CoefficientFunction::constant(v->get<double>());
        if (!v->is_object()) {
            fail(p, "must be a number or a coefficient object");
            return fallback;
        }
        std::string family;
        if (!string(*v, p, "family", family, true)) return fallback;
        double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
        if (family == "constant") {
            object(*v, p, {"family", "value"});
            number(*v, p, "value", a, true);
            return CoefficientFunction::constant(a);
        }
        if (family == "affine") {
            object(*v, p, {"family", "c0", "ct", "cmu", "cy"});
            number(*v, p, "c0", a);
            number(*v, p, "ct", b);
            number(*v, p, "cmu", c);
            number(*v, p, "cy", d);
            return CoefficientFunction::affine(a, b, c, d);
        }
        if (family == "mean_reversion") {
            object(*v, p, {"family", "rate", "target"});
            number(*v, p, "rate", a, true);
            number(*v, p, "target", b, true);
            return CoefficientFunction::mean_reversion(a, b);
        }
        if (family == "reversion_to_y") {
            object(*v, p, {"family", "rate"});
            number(*v, p, "rate", a, true);
            return CoefficientFunction::reversion_to_y(a);
        }
        if (family == "sqrt") {
            object(*v, p, {"family", "scale", "shift"});
            number(*v, p, "scale", a, true);
            number(*v, p, "shift", b);
            return CoefficientFunction::sqrt(a, b);
        }
        fail(p + "/family", "unknown family '" + family + "'");
        return fallback;
    }
};

json coefficient_json(const CoefficientFunction& f) {
    const auto& q = f.params();
    switch (f.family()) {
        case CoefficientFunction::Family::Constant: return {{"family", "constant"}, {"value", q[0]}};
        case CoefficientFunction::Family::Affine:
            return {{"family", "affine"}, {"c0", q[0]}, {"ct", q[1]}, {"cmu", q[2]}, {"cy", q[3]}};
        case CoefficientFunction::Family::MeanReversion:
            return {{"family", "mean_reversion"}, {"rate", q[0]}, {"target", q[1]}};
        case CoefficientFunction::Family::ReversionToY: return {{"family", "reversion_to_y"}, {"rate", q[0]}};
        case CoefficientFunction::Family::Sqrt: return {{"family", "sqrt"}, {"scale", q[0]}, {"shift", q[1]}};
    }
    return {};
}

void parse_model(Reader& r, const json& doc, ScenarioConfig& c) {
    const std::string path = "/model";
    const json* m = r.child(doc, "", "model", true);
    if (!m || !r.object(*m, path, {"horizon", "market", "mortality", "factor", "risk_premia", "lambda",
                                   "risk_aversion"}))
        return;
    ModelSpec& s = c.model;
    r.positive_number(*m, path, "horizon", s.horizon);
    r.positive_number(*m, path, "risk_aversion", s.risk_aversion);

    if (const json* b = r.child(*m, path, "market", false); b && r.object(*b, path + "/market", {"mu_S", "sigma_S", "s1_0"})) {
        s.mu_S = r.coefficient(*b, path + "/market", "mu_S", s.mu_S);
        s.sigma_S = r.coefficient(*b, path + "/market", "sigma_S", s.sigma_S);
        r.number(*b, path + "/market", "s1_0", s.s1_0);
    }
    if (const json* b = r.child(*m, path, "mortality", false);
        b && r.object(*b, path + "/mortality", {"b_mu", "sigma_mu", "mu_0"})) {
        s.b_mu = r.coefficient(*b, path + "/mortality", "b_mu", s.b_mu);
        s.sigma_mu = r.coefficient(*b, path + "/mortality", "sigma_mu", s.sigma_mu);
        r.number(*b, path + "/mortality", "mu_0", s.mu_0);
    }
    if (const json* b = r.child(*m, path, "factor", false); b && r.object(*b, path + "/factor", {"b_Y", "sigma_Y", "y_0"})) {
        s.b_Y = r.coefficient(*b, path + "/factor", "b_Y", s.b_Y);
        s.sigma_Y = r.coefficient(*b, path + "/factor", "sigma_Y", s.sigma_Y);
        r.number(*b, path + "/factor", "y_0", s.y_0);
    }
    if (const json* b = r.child(*m, path, "risk_premia", false);
        b && r.object(*b, path + "/risk_premia", {"alpha_mu", "alpha_Y"})) {
        s.alpha_mu = r.coefficient(*b, path + "/risk_premia", "alpha_mu", s.alpha_mu);
        s.alpha_Y = r.coefficient(*b, path + "/risk_premia", "alpha_Y", s.alpha_Y);
    }

    const std::string lp = path + "/lambda";
    const json* l = r.child(*m, path, "lambda", true);
    if (!l || !r.object(*l, lp, {"family", "values", "multipliers", "base", "mu_weight", "bounds", "clip"})) return;
    std::string family;
    if (!r.string(*l, lp, "family", family, true)) return;
    std::vector<double> values;
    double weight = 1.0;
    MortalityFunction::Family fam;
    auto reject = [&](const char* key) {
        if (l->contains(key)) r.fail(lp + "/" + key, "not used by family '" + family + "'");
    };
    if (family == "state_constant") {
        fam = MortalityFunction::Family::StateConstant;
        r.vector(*l, lp, "values", values, true);
        reject("multipliers");
        reject("base");
        reject("mu_weight");
    } else if (family == "multiplicative") {
        fam = MortalityFunction::Family::Multiplicative;
        r.vector(*l, lp, "multipliers", values, true);
        reject("values");
        reject("base");
        reject("mu_weight");
    } else if (family == "additive") {
        fam = MortalityFunction::Family::Additive;
        r.vector(*l, lp, "base", values, true);
        r.number(*l, lp, "mu_weight", weight);
        reject("values");
        reject("multipliers");
    } else {
        r.fail(lp + "/family", "unknown family '" + family + "'");
        return;
    }
    if (values.empty()) return;
    s.lambda = MortalityFunction(fam, values, weight);
    bool clip = true;
    r.boolean(*l, lp, "clip", clip);
    std::vector<double> bounds;
    if (r.vector(*l, lp, "bounds", bounds)) {
        if (bounds.size() != 2 || !(bounds[0] <= bounds[1]))
            r.fail(lp + "/bounds", "must be [lower, upper] with lower ≤ upper");
        else
            s.lambda.with_bounds(bounds[0], bounds[1], clip);
    } else if (l->contains("clip")) {
        r.fail(lp + "/clip", "requires bounds");
    }
}

void parse_chain(Reader& r, const json& doc, ScenarioConfig& c) {
    const std::string path = "/chain";
    const json* ch = r.child(doc, "", "chain", false);
    if (!ch || !r.object(*ch, path, {"generator", "initial_dist"})) return;
    std::vector<double> init;
    if (!r.vector(*ch, path, "initial_dist", init, true)) return;
    const auto n = static_cast<Eigen::Index>(init.size());
    Eigen::MatrixXd Q(n, n);
    const json* g = r.child(*ch, path, "generator", true);
    if (!g) return;
    if (!g->is_array() || static_cast<Eigen::Index>(g->size()) != n) {
        r.fail(path + "/generator", "must be a square array matching initial_dist");
        return;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const json& row = (*g)[static_cast<std::size_t>(i)];
        const std::string rp = path + "/generator/" + std::to_string(i);
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
            r.fail(rp, "must be an array of " + std::to_string(n) + " numbers");
            return;
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            const json& e = row[static_cast<std::size_t>(j)];
            if (!e.is_number()) {
                r.fail(rp + "/" + std::to_string(j), "must be a finite number");
                return;
            }
            Q(i, j) = e.get<double>();
        }
    }
    c.model.chain.generator = Q;
    c.model.chain.initial = Eigen::Map<Eigen::VectorXd>(init.data(), n);
}

void parse_claim(Reader& r, const json& doc, ScenarioConfig& c) {
    const std::string path = "/claim";
    const json* cl = r.child(doc, "", "claim", true);
    if (!cl || !r.object(*cl, path, {"family", "k", "strike", "cap", "post_death_value"})) return;
    std::string family, post;
    if (r.string(*cl, path, "post_death_value", post)) {
        if (post == "pure_investment")
            c.post_death = PostDeathValue::PureInvestment;
        else if (post == "zero")
            c.post_death = PostDeathValue::Zero;
        else
            r.fail(path + "/post_death_value", "must be 'pure_investment' or 'zero'");
    }
    if (!r.string(*cl, path, "family", family, true)) return;
    double k = 1.0, strike = 0.0, cap = 1.0;
    auto reject = [&](const char* key) {
        if (cl->contains(key)) r.fail(path + "/" + key, "not used by family '" + family + "'");
    };
    if (family == "constant" || family == "survival_indexed") {
        r.number(*cl, path, "k", k, true);
        reject("strike");
        reject("cap");
        c.model.claim = family == "constant" ? Claim::constant(k) : Claim::survival_indexed(k);
    } else if (family == "call") {
        r.number(*cl, path, "strike", strike, true);
        r.number(*cl, path, "cap", cap, true);
        reject("k");
        c.model.claim = Claim::capped_call(strike, cap);
    } else {
        r.fail(path + "/family", "unknown family '" + family + "'");
    }
}

void parse_numerics(Reader& r, const json& doc, ScenarioConfig& c) {
    const std::string path = "/numerics";
    const json* n = r.child(doc, "", "numerics", true);
    if (!n || !r.object(*n, path, {"n_steps", "n_paths", "seed", "basis_degree", "ridge", "integrand_clip",
                                   "value_bound", "integrand_estimator", "threads", "magnitude_cap",
                                   "antithetic_death_clock", "renormalize_every", "pde"}))
        return;
    NumericsConfig& x = c.numerics;
    r.positive_int(*n, path, "n_steps", x.n_steps);
    long long paths = 0;
    if (r.integer(*n, path, "n_paths", paths)) {
        if (paths < 1)
            r.fail(path + "/n_paths", "must be ≥ 1");
        else
            x.n_paths = static_cast<std::size_t>(paths);
    }
    if (const json* s = r.child(*n, path, "seed", true)) {
        if (is_count(*s))
            x.seed = s->get<std::uint64_t>();
        else
            r.fail(path + "/seed", "must be a non-negative integer");
    }
    long long degree = x.basis_degree;
    if (r.integer(*n, path, "basis_degree", degree)) {
        if (degree < 1 || degree > 2)
            r.fail(path + "/basis_degree", "must be 1 or 2");
        else
            x.basis_degree = static_cast<int>(degree);
    }
    double ridge = x.ridge;
    if (r.number(*n, path, "ridge", ridge)) {
        if (ridge < 0.0)
            r.fail(path + "/ridge", "must be ≥ 0");
        else
            x.ridge = ridge;
    }
    r.positive_number(*n, path, "integrand_clip", x.integrand_clip);
    double bound = 0.0;
    if (const json* v = n->contains("value_bound") ? &(*n)["value_bound"] : nullptr; v && !v->is_null()) {
        if (r.number(*n, path, "value_bound", bound)) {
            if (!(bound > 0.0))
                r.fail(path + "/value_bound", "must be > 0");
            else
                x.value_bound = bound;
        }
    }
    std::string est;
    if (r.string(*n, path, "integrand_estimator", est)) {
        if (est == "centered")
            x.estimator = IntegrandEstimator::Centered;
        else if (est == "plain")
            x.estimator = IntegrandEstimator::Plain;
        else
            r.fail(path + "/integrand_estimator", "must be 'centered' or 'plain'");
    }
    r.positive_int(*n, path, "threads", x.threads);
    r.positive_number(*n, path, "magnitude_cap", x.magnitude_cap);
    r.boolean(*n, path, "antithetic_death_clock", x.antithetic_death_clock);
    r.positive_int(*n, path, "renormalize_every", x.renormalize_every);

    const std::string pp = path + "/pde";
    if (const json* p = r.child(*n, path, "pde", false);
        p && r.object(*p, pp, {"n_mu", "n_y", "n_t", "width_sd", "self_check", "tolerance"})) {
        r.positive_int(*p, pp, "n_mu", x.pde.n_mu);
        r.positive_int(*p, pp, "n_y", x.pde.n_y);
        r.positive_int(*p, pp, "n_t", x.pde.n_t);
        if (x.pde.n_mu < 4) r.fail(pp + "/n_mu", "must be ≥ 4");
        if (x.pde.n_y < 2) r.fail(pp + "/n_y", "must be ≥ 2");
        r.positive_number(*p, pp, "width_sd", x.pde.width_sd);
        r.boolean(*p, pp, "self_check", x.pde.self_check);
        r.positive_number(*p, pp, "tolerance", x.pde.self_check_tolerance);
    }
}

void parse_outputs(Reader& r, const json& doc, ScenarioConfig& c) {
    const std::string path = "/outputs";
    const json* o = r.child(doc, "", "outputs", false);
    if (!o || !r.object(*o, path, {"directory", "dumps", "filter_paths", "max_dump_paths"})) return;
    OutputConfig& x = c.outputs;
    r.string(*o, path, "directory", x.directory);
    if (const json* d = r.child(*o, path, "dumps", false)) {
        if (!d->is_array()) {
            r.fail(path + "/dumps", "must be an array of strings");
        } else {
            for (std::size_t i = 0; i < d->size(); ++i) {
                const json& e = (*d)[i];
                const std::string s = e.is_string() ? e.get<std::string>() : "";
                if (s == "paths")
                    x.dump_paths = true;
                else if (s == "filter")
                    x.dump_filter = true;
                else if (s == "bsde")
                    x.dump_bsde = true;
                else
                    r.fail(path + "/dumps/" + std::to_string(i), "must be one of paths, filter, bsde");
            }
        }
    }
    if (const json* f = r.child(*o, path, "filter_paths", false)) {
        if (!f->is_array()) {
            r.fail(path + "/filter_paths", "must be an array of path indices");
        } else {
            x.filter_paths.clear();
            for (std::size_t i = 0; i < f->size(); ++i) {
                if (is_count((*f)[i]))
                    x.filter_paths.push_back((*f)[i].get<std::size_t>());
                else
                    r.fail(path + "/filter_paths/" + std::to_string(i), "must be a non-negative integer");
            }
        }
    }
    long long m = 0;
    if (r.integer(*o, path, "max_dump_paths", m)) {
        if (m < 1)
            r.fail(path + "/max_dump_paths", "must be ≥ 1");
        else
            x.max_dump_paths = static_cast<std::size_t>(m);
    }
}

}  // namespace

ScenarioConfig parse_config(const json& doc) {
    Reader r;
    ScenarioConfig c;
    if (r.object(doc, "", {"model", "chain", "claim", "numerics", "outputs"})) {
        parse_model(r, doc, c);
        parse_chain(r, doc, c);
        parse_claim(r, doc, c);
        parse_numerics(r, doc, c);
        parse_outputs(r, doc, c);
    }
    if (!r.issues.empty()) throw SchemaError(std::move(r.issues));
    return c;
}

ScenarioConfig parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError({{"/", std::string("malformed JSON: ") + e.what()}});
    }
    return parse_config(doc);
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, path.string(), "cannot open configuration");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

json to_json(const ScenarioConfig& c) {
    const ModelSpec& s = c.model;
    json lambda;
    const auto& values = s.lambda.values();
    switch (s.lambda.family()) {
        case MortalityFunction::Family::StateConstant:
            lambda = {{"family", "state_constant"}, {"values", values}};
            break;
        case MortalityFunction::Family::Multiplicative:
            lambda = {{"family", "multiplicative"}, {"multipliers", values}};
            break;
        case MortalityFunction::Family::Additive:
            lambda = {{"family", "additive"}, {"base", values}, {"mu_weight", s.lambda.mu_weight()}};
            break;
    }
    if (s.lambda.bounds()) {
        lambda["bounds"] = {s.lambda.bounds()->first, s.lambda.bounds()->second};
        lambda["clip"] = s.lambda.clip();
    }

    json generator = json::array();
    for (Eigen::Index i = 0; i < s.chain.generator.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < s.chain.generator.cols(); ++j) row.push_back(s.chain.generator(i, j));
        generator.push_back(row);
    }
    std::vector<double> init(s.chain.initial.data(), s.chain.initial.data() + s.chain.initial.size());

    json claim;
    switch (s.claim.family()) {
        case Claim::Family::Constant: claim = {{"family", "constant"}, {"k", s.claim.level()}}; break;
        case Claim::Family::CappedCall:
            claim = {{"family", "call"}, {"strike", s.claim.strike()}, {"cap", s.claim.level()}};
            break;
        case Claim::Family::SurvivalIndexed: claim = {{"family", "survival_indexed"}, {"k", s.claim.level()}}; break;
    }
    claim["post_death_value"] = c.post_death == PostDeathValue::Zero ? "zero" : "pure_investment";

    const NumericsConfig& n = c.numerics;
    json dumps = json::array();
    if (c.outputs.dump_paths) dumps.push_back("paths");
    if (c.outputs.dump_filter) dumps.push_back("filter");
    if (c.outputs.dump_bsde) dumps.push_back("bsde");

    return {
        {"model",
         {{"horizon", s.horizon},
          {"market", {{"mu_S", coefficient_json(s.mu_S)}, {"sigma_S", coefficient_json(s.sigma_S)}, {"s1_0", s.s1_0}}},
          {"mortality",
           {{"b_mu", coefficient_json(s.b_mu)}, {"sigma_mu", coefficient_json(s.sigma_mu)}, {"mu_0", s.mu_0}}},
          {"factor", {{"b_Y", coefficient_json(s.b_Y)}, {"sigma_Y", coefficient_json(s.sigma_Y)}, {"y_0", s.y_0}}},
          {"risk_premia", {{"alpha_mu", coefficient_json(s.alpha_mu)}, {"alpha_Y", coefficient_json(s.alpha_Y)}}},
          {"lambda", lambda},
          {"risk_aversion", s.risk_aversion}}},
        {"chain", {{"generator", generator}, {"initial_dist", init}}},
        {"claim", claim},
        {"numerics",
         {{"n_steps", n.n_steps},
          {"n_paths", n.n_paths},
          {"seed", n.seed},
          {"basis_degree", n.basis_degree},
          {"ridge", n.ridge},
          {"integrand_clip", n.integrand_clip},
          {"value_bound", n.value_bound ? json(*n.value_bound) : json(nullptr)},
          {"integrand_estimator", n.estimator == IntegrandEstimator::Plain ? "plain" : "centered"},
          {"threads", n.threads},
          {"magnitude_cap", n.magnitude_cap},
          {"antithetic_death_clock", n.antithetic_death_clock},
          {"renormalize_every", n.renormalize_every},
          {"pde",
           {{"n_mu", n.pde.n_mu},
            {"n_y", n.pde.n_y},
            {"n_t", n.pde.n_t},
            {"width_sd", n.pde.width_sd},
            {"self_check", n.pde.self_check},
            {"tolerance", n.pde.self_check_tolerance}}}}},
        {"outputs",
         {{"directory", c.outputs.directory},
          {"dumps", dumps},
          {"filter_paths", c.outputs.filter_paths},
          {"max_dump_paths", c.outputs.max_dump_paths}}},
    };
}

std::string config_hash(const ScenarioConfig& c) {
    const std::string text = to_json(c).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void apply_dump_list(OutputConfig& outputs, const std::string& list) {
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "paths")
            outputs.dump_paths = true;
        else if (item == "filter")
            outputs.dump_filter = true;
        else if (item == "bsde")
            outputs.dump_bsde = true;
        else if (!item.empty())
            throw SchemaError({{"/outputs/dumps", "unknown dump '" + item + "'"}});
    }
}

}  // namespace endow
