#include "skewdiff/config.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"
#include "skewdiff/error.hpp"

namespace skewdiff {

using nlohmann::json;

namespace {

struct Entry {
    const char* name;
    const char* summary;
};

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries{
        {"cir-baseline", "p = 1/2 skew scheme vs. the CIR mean and the exact noncentral chi-squared law"},
        {"besq-law", "squared Bessel terminal law vs. the noncentral chi-squared CDF (KS distance)"},
        {"stationary-skew", "long-run histogram vs. the skewed invariant density, jump ratio at the barrier"},
        {"localtime-ratios", "upper/lower local time over symmetric local time vs. 2p and 2(1-p)"},
        {"relloc-identity", "2 sqrt(R) dl(sqrt(R) - lambda) = dl(R - lambda^2) residuals"},
        {"girsanov-consistency", "reweighted moving-frame paths vs. direct square-root paths"},
        {"pde-cross-check", "transmission-condition PDE vs. Monte Carlo expectations"},
        {"skew-occupation", "fraction of paths above the barrier vs. the skew Brownian motion law"},
        {"dsr-demo", "double square-root model: local-time ratios and moment self-consistency"},
        {"regime-check", "parameter gates and monotonicity of the reference density"},
    };
    return entries;
}

[[noreturn]] void invalid(const std::string& where, const std::string& what) {
    fail(Errc::config_invalid, where + ": " + what);
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) invalid(where, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) invalid(where, "expected a finite number");
    return v;
}

std::uint64_t unsigned_int(const json& j, const std::string& where) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer()) {
        const auto v = j.get<std::int64_t>();
        if (v < 0) invalid(where, "expected a nonnegative integer");
        return static_cast<std::uint64_t>(v);
    }
    if (j.is_number_float()) {
        const double v = j.get<double>();
        if (v >= 0.0 && v == std::floor(v) && v < 1.8e19) return static_cast<std::uint64_t>(v);
    }
    invalid(where, "expected a nonnegative integer");
}

std::string string(const json& j, const std::string& where) {
    if (!j.is_string()) invalid(where, "expected a string");
    return j.get<std::string>();
}

void expect_object(const json& j, const std::string& where) {
    if (!j.is_object()) invalid(where, "expected an object");
}

template <class Handler>
void for_keys(const json& obj, const std::string& where, std::initializer_list<const char*> known, Handler&& h) {
    expect_object(obj, where);
    for (const auto& [key, value] : obj.items()) {
        const bool ok = std::any_of(known.begin(), known.end(), [&](const char* k) { return key == k; });
        if (!ok) invalid(where + "." + key, "unknown key");
        h(key, value, where + "." + key);
    }
}

const char* drift_name(DriftMode m) { return m == DriftMode::explicit_euler ? "explicit" : "implicit_sqrt_term"; }
const char* zero_name(ZeroHandling z) { return z == ZeroHandling::reflect_abs ? "reflect_abs" : "truncate_at_zero"; }
const char* skew_name(SkewMode s) { return s == SkewMode::band ? "band" : "bridge"; }
const char* interface_name(InterfaceMode m) {
    switch (m) {
        case InterfaceMode::flux_balance: return "flux_balance";
        case InterfaceMode::one_sided: return "one_sided";
        case InterfaceMode::none: return "none";
    }
    return "?";
}

void parse_pde(const json& j, const std::string& where, PdeGrid& g) {
    for_keys(j, where, {"x_max", "n_x", "n_t", "interface"}, [&](const std::string& key, const json& v, const std::string& at) {
        if (key == "x_max") g.x_max = number(v, at);
        else if (key == "n_x") g.n_x = unsigned_int(v, at);
        else if (key == "n_t") g.n_t = unsigned_int(v, at);
        else {
            const std::string s = string(v, at);
            if (s == "flux_balance") g.interface_mode = InterfaceMode::flux_balance;
            else if (s == "one_sided") g.interface_mode = InterfaceMode::one_sided;
            else if (s == "none") g.interface_mode = InterfaceMode::none;
            else invalid(at, "expected one of flux_balance, one_sided, none");
        }
    });
}

void parse_options(const json& j, const std::string& where, ExperimentOptions& o) {
    for_keys(j, where,
             {"step_levels", "burn_in_fraction", "thin", "bins", "level", "rel_tol", "abs_tol", "x0_list", "pde",
              "refinement_factor_max", "random_curves", "export_paths", "runtime_limit_s"},
             [&](const std::string& key, const json& v, const std::string& at) {
                 if (key == "step_levels" || key == "x0_list") {
                     if (!v.is_array()) invalid(at, "expected an array");
                     if (key == "step_levels") o.step_levels.clear();
                     else o.x0_list.clear();
                     for (std::size_t i = 0; i < v.size(); ++i) {
                         const std::string item = at + "[" + std::to_string(i) + "]";
                         if (key == "step_levels") o.step_levels.push_back(unsigned_int(v[i], item));
                         else o.x0_list.push_back(number(v[i], item));
                     }
                 } else if (key == "burn_in_fraction") o.burn_in_fraction = number(v, at);
                 else if (key == "thin") o.thin = unsigned_int(v, at);
                 else if (key == "bins") o.bins = unsigned_int(v, at);
                 else if (key == "level") o.level = number(v, at);
                 else if (key == "rel_tol") o.rel_tol = number(v, at);
                 else if (key == "abs_tol") o.abs_tol = number(v, at);
                 else if (key == "pde") parse_pde(v, at, o.pde);
                 else if (key == "refinement_factor_max") o.refinement_factor_max = number(v, at);
                 else if (key == "random_curves") o.random_curves = unsigned_int(v, at);
                 else if (key == "export_paths") o.export_paths = unsigned_int(v, at);
                 else o.runtime_limit_s = number(v, at);
             });
}

RawParams params_of(double sigma, double delta, double b, double p) {
    RawParams r;
    r.sigma = sigma;
    r.delta = delta;
    r.b = b;
    r.p = p;
    return r;
}

CurveSpec constant_curve(double v) {
    CurveSpec c;
    c.kind = "constant";
    c.args["value"] = v;
    return c;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& e : registry()) out.emplace_back(e.name);
        return out;
    }();
    return names;
}

std::string experiment_summary(const std::string& name) {
    for (const auto& e : registry())
        if (name == e.name) return e.summary;
    return {};
}

ExperimentConfig default_config(const std::string& name) {
    ExperimentConfig c;
    c.experiment = name;
    c.scheme.skew_mode = SkewMode::bridge;
    c.scheme.drift_mode = DriftMode::implicit_sqrt_term;
    ExperimentOptions& o = c.options;
    if (name == "cir-baseline") {
        c.params = params_of(2, 3, 1, 0.5);
        c.curve = constant_curve(1.0);
        c.grid = {1.0, 1024};
        c.n_paths = 100000;
        o.abs_tol = 0.03;
    } else if (name == "besq-law") {
        c.params = params_of(2, 2, 0, 0.5);
        c.curve = constant_curve(0.0);
        c.grid = {1.0, 4096};
        c.n_paths = 10000;
        o.abs_tol = 0.03;
    } else if (name == "stationary-skew") {
        c.params = params_of(2, 2, 1, 0.75);
        c.curve = constant_curve(1.0);
        c.grid = {5000.0, 5000u * 256u};
        c.n_paths = 1;
    } else if (name == "localtime-ratios" || name == "relloc-identity") {
        c.params = params_of(2, 2, 1, 0.75);
        c.curve = constant_curve(1.0);
        c.grid = {10.0, 163840};
        c.n_paths = 200;
        o.step_levels = {40960, 163840};
    } else if (name == "girsanov-consistency") {
        c.params = params_of(2, 2, 1, 0.7);
        c.curve.kind = "linear";
        c.curve.args = {{"value", 1.0}, {"slope", 0.1}};
        c.grid = {1.0, 256};
        c.n_paths = 100000;
    } else if (name == "pde-cross-check") {
        c.params = params_of(2, 2, 1, 0.7);
        c.curve = constant_curve(1.0);
        c.grid = {1.0, 1024};
        c.n_paths = 100000;
        o.x0_list = {0.5, 1.0, 2.0};
        o.abs_tol = 0.01;
        o.pde.n_x = 401;
        o.pde.n_t = 8000;
    } else if (name == "skew-occupation") {
        c.params = params_of(2, 1, 0, 0.75);
        c.curve = constant_curve(1.0);
        c.grid = {0.01, 100};
        c.n_paths = 100000;
        o.abs_tol = 0.02;
    } else if (name == "dsr-demo") {
        c.params = params_of(2, 2, 0, 0.7);
        c.params.dsr_c = 1.0;
        c.curve = constant_curve(1.0);
        c.grid = {10.0, 40960};
        c.n_paths = 100;
    } else if (name == "regime-check") {
        c.params = params_of(2, 1, 0, 0.7);
        c.curve.kind = "sinusoidal";
        c.curve.args = {{"value", 1.0}, {"amplitude", 0.5}, {"frequency", 1.0}};
        c.grid = {5.0, 100};
        c.n_paths = 0;
    } else {
        fail(Errc::config_invalid, "$.experiment: unknown experiment '" + name + "'");
    }
    return c;
}

ExperimentConfig parse_config(const std::string& json_text, std::optional<std::uint64_t> seed_override,
                              const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        invalid("$", std::string("not valid JSON (") + e.what() + ")");
    }
    expect_object(doc, "$");
    if (!doc.contains("experiment")) invalid("$.experiment", "missing required key");
    const std::string name = string(doc["experiment"], "$.experiment");
    if (experiment_summary(name).empty()) invalid("$.experiment", "unknown experiment '" + name + "'");
    ExperimentConfig c = default_config(name);

    for_keys(doc, "$",
             {"schema_version", "experiment", "seed", "params", "curve", "grid", "n_paths", "scheme", "start",
              "threads", "output_dir", "dump_paths", "options"},
             [&](const std::string& key, const json& v, const std::string& at) {
                 if (key == "schema_version") {
                     if (unsigned_int(v, at) != kConfigSchemaVersion)
                         invalid(at, "unsupported schema version (expected 1)");
                 } else if (key == "experiment") {
                 } else if (key == "seed") c.seed = unsigned_int(v, at);
                 else if (key == "params") {
                     for_keys(v, at, {"sigma", "delta", "b", "p", "dsr_c"},
                              [&](const std::string& k, const json& x, const std::string& a) {
                                  if (k == "sigma") c.params.sigma = number(x, a);
                                  else if (k == "delta") c.params.delta = number(x, a);
                                  else if (k == "b") c.params.b = number(x, a);
                                  else if (k == "p") c.params.p = number(x, a);
                                  else if (x.is_null()) c.params.dsr_c.reset();
                                  else c.params.dsr_c = number(x, a);
                              });
                 } else if (key == "curve") {
                     expect_object(v, at);
                     CurveSpec spec;
                     if (!v.contains("kind")) invalid(at + ".kind", "missing required key");
                     for (const auto& [k, x] : v.items()) {
                         const std::string a = at + "." + k;
                         if (k == "kind") spec.kind = string(x, a);
                         else if (k == "path") {
                             std::filesystem::path p = string(x, a);
                             spec.path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
                         } else spec.args[k] = number(x, a);
                     }
                     if (spec.kind == "csv" && spec.path.empty()) invalid(at + ".path", "csv curve needs a path");
                     if (spec.kind == "csv" && !std::filesystem::exists(spec.path))
                         invalid(at + ".path", "file " + spec.path.string() + " does not exist");
                     c.curve = spec;
                 } else if (key == "grid") {
                     for_keys(v, at, {"T", "n_steps"}, [&](const std::string& k, const json& x, const std::string& a) {
                         if (k == "T") c.grid.T = number(x, a);
                         else c.grid.n_steps = unsigned_int(x, a);
                     });
                 } else if (key == "n_paths") c.n_paths = unsigned_int(v, at);
                 else if (key == "scheme") {
                     for_keys(v, at, {"band_width", "drift_mode", "zero_handling", "skew_mode"},
                              [&](const std::string& k, const json& x, const std::string& a) {
                                  if (k == "band_width") c.scheme.band_width = number(x, a);
                                  else {
                                      const std::string s = string(x, a);
                                      if (k == "drift_mode") {
                                          if (s == "explicit") c.scheme.drift_mode = DriftMode::explicit_euler;
                                          else if (s == "implicit_sqrt_term") c.scheme.drift_mode = DriftMode::implicit_sqrt_term;
                                          else invalid(a, "expected explicit or implicit_sqrt_term");
                                      } else if (k == "zero_handling") {
                                          if (s == "reflect_abs") c.scheme.zero_handling = ZeroHandling::reflect_abs;
                                          else if (s == "truncate_at_zero") c.scheme.zero_handling = ZeroHandling::truncate_at_zero;
                                          else invalid(a, "expected reflect_abs or truncate_at_zero");
                                      } else {
                                          if (s == "band") c.scheme.skew_mode = SkewMode::band;
                                          else if (s == "bridge") c.scheme.skew_mode = SkewMode::bridge;
                                          else invalid(a, "expected band or bridge");
                                      }
                                  }
                              });
                 } else if (key == "start") c.start = number(v, at);
                 else if (key == "threads") {
                     const auto t = unsigned_int(v, at);
                     if (t == 0 || t > 4096) invalid(at, "expected 1..4096");
                     c.threads = static_cast<unsigned>(t);
                 } else if (key == "output_dir") {
                     std::filesystem::path p = string(v, at);
                     c.output_dir = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
                 } else if (key == "dump_paths") c.dump_paths = unsigned_int(v, at);
                 else parse_options(v, at, c.options);
             });

    if (seed_override) c.seed = seed_override;
    if (!c.seed) invalid("$.seed", "missing required key (no wall-clock default)");
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& file, std::optional<std::uint64_t> seed_override) {
    std::ifstream in(file);
    if (!in) fail(Errc::config_invalid, "cannot read config file " + file.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), seed_override, file.parent_path());
}

void validate_config(const ExperimentConfig& c) {
    try {
        if (!c.seed) invalid("$.seed", "missing required key (no wall-clock default)");
        validate_params(c.params);
        check_grid(c.grid);
        check_scheme(c.scheme);
        require(c.start >= 0.0, Errc::config_invalid, "$.start: must be >= 0");
        make_curve(c.curve, c.grid.T);
        const ExperimentOptions& o = c.options;
        require(o.burn_in_fraction >= 0.0 && o.burn_in_fraction < 1.0, Errc::config_invalid,
                "$.options.burn_in_fraction: must lie in [0,1)");
        require(o.thin > 0, Errc::config_invalid, "$.options.thin: must be positive");
        require(o.level > 0.0 && o.level < 1.0, Errc::config_invalid, "$.options.level: must lie in (0,1)");
        for (std::size_t s : o.step_levels)
            require(s > 0, Errc::config_invalid, "$.options.step_levels: entries must be positive");
        const bool mc = c.experiment != "regime-check";
        require(!mc || c.n_paths > 0, Errc::config_invalid, "$.n_paths: must be positive");
    } catch (const Error& e) {
        if (e.code() == Errc::config_invalid) throw;
        throw Error(Errc::config_invalid, std::string(errc_name(e.code())) + ": " + e.what());
    }
}

std::string config_to_json(const ExperimentConfig& c) {
    json j;
    j["schema_version"] = kConfigSchemaVersion;
    j["experiment"] = c.experiment;
    if (c.seed) j["seed"] = *c.seed;
    j["params"] = {{"sigma", c.params.sigma}, {"delta", c.params.delta}, {"b", c.params.b}, {"p", c.params.p},
                   {"dsr_c", c.params.dsr_c ? json(*c.params.dsr_c) : json(nullptr)}};
    json curve = {{"kind", c.curve.kind}};
    for (const auto& [k, v] : c.curve.args) curve[k] = v;
    if (!c.curve.path.empty()) curve["path"] = c.curve.path.string();
    j["curve"] = curve;
    j["grid"] = {{"T", c.grid.T}, {"n_steps", c.grid.n_steps}};
    j["n_paths"] = c.n_paths;
    j["scheme"] = {{"band_width", c.scheme.band_width},
                   {"drift_mode", drift_name(c.scheme.drift_mode)},
                   {"zero_handling", zero_name(c.scheme.zero_handling)},
                   {"skew_mode", skew_name(c.scheme.skew_mode)}};
    j["start"] = c.start;
    j["dump_paths"] = c.dump_paths;
    const ExperimentOptions& o = c.options;
    j["options"] = {{"step_levels", o.step_levels},
                    {"burn_in_fraction", o.burn_in_fraction},
                    {"thin", o.thin},
                    {"bins", o.bins},
                    {"level", o.level},
                    {"rel_tol", o.rel_tol},
                    {"abs_tol", o.abs_tol},
                    {"x0_list", o.x0_list},
                    {"pde",
                     {{"x_max", o.pde.x_max},
                      {"n_x", o.pde.n_x},
                      {"n_t", o.pde.n_t},
                      {"interface", interface_name(o.pde.interface_mode)}}},
                    {"refinement_factor_max", o.refinement_factor_max},
                    {"random_curves", o.random_curves},
                    {"export_paths", o.export_paths},
                    {"runtime_limit_s", o.runtime_limit_s}};
    return j.dump(2);
}

}  // namespace skewdiff
