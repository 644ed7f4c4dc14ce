#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "skewdiff/analytics.hpp"
#include "skewdiff/config.hpp"
#include "skewdiff/curve.hpp"
#include "skewdiff/error.hpp"
#include "skewdiff/experiments.hpp"
#include "skewdiff/girsanov.hpp"
#include "skewdiff/local_time.hpp"
#include "skewdiff/model.hpp"
#include "skewdiff/path.hpp"
#include "skewdiff/pde.hpp"
#include "skewdiff/report.hpp"

namespace py = pybind11;
using namespace skewdiff;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

py::object json_loads(const std::string& text) { return py::module_::import("json").attr("loads")(text); }

std::string json_dumps(const py::object& obj) { return py::module_::import("json").attr("dumps")(obj).cast<std::string>(); }

ExperimentConfig config_from(const py::object& config, std::optional<std::uint64_t> seed) {
    if (py::isinstance<py::str>(config)) return parse_config(config.cast<std::string>(), seed);
    return parse_config(json_dumps(config), seed);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Skew-reflected CIR / squared Bessel simulation core";

    static py::exception<Error> error_type(m, "SkewdiffError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            const auto type = py::reinterpret_borrow<py::object>(error_type.ptr());
            py::object exc = type(std::string(errc_name(e.code())) + ": " + e.what());
            exc.attr("code") = std::string(errc_name(e.code()));
            PyErr_SetObject(error_type.ptr(), exc.ptr());
        }
    });

    // model
    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init([](double sigma, double delta, double b, double p, std::optional<double> dsr_c) {
                 return validate_params({sigma, delta, b, p, dsr_c});
             }),
             py::arg("sigma") = 2.0, py::arg("delta") = 2.0, py::arg("b") = 0.0, py::arg("p") = 0.5,
             py::arg("dsr_c") = py::none())
        .def_property_readonly("sigma", &ModelParams::sigma)
        .def_property_readonly("delta", &ModelParams::delta)
        .def_property_readonly("b", &ModelParams::b)
        .def_property_readonly("p", &ModelParams::p)
        .def_property_readonly("dsr_c", &ModelParams::dsr_c)
        .def_property_readonly("mean_reversion_level", &ModelParams::mean_reversion_level)
        .def("__repr__", [](const ModelParams& p) {
            return "ModelParams(sigma=" + std::to_string(p.sigma()) + ", delta=" + std::to_string(p.delta()) +
                   ", b=" + std::to_string(p.b()) + ", p=" + std::to_string(p.p()) + ")";
        });

    py::class_<StationaryDensity>(m, "StationaryDensity")
        .def(py::init<const ModelParams&, double>(), py::arg("params"), py::arg("c"))
        .def("__call__", &StationaryDensity::operator())
        .def("cdf", &StationaryDensity::cdf)
        .def("quantile", &StationaryDensity::quantile)
        .def_property_readonly("normalizer", &StationaryDensity::normalizer);

    py::class_<MonotonicityWitness>(m, "MonotonicityWitness")
        .def_readonly("s", &MonotonicityWitness::s)
        .def_readonly("t", &MonotonicityWitness::t)
        .def_readonly("x", &MonotonicityWitness::x)
        .def_readonly("rho_s", &MonotonicityWitness::rho_s)
        .def_readonly("rho_t", &MonotonicityWitness::rho_t);
    py::class_<RegimeReport>(m, "RegimeReport")
        .def_readonly("valid", &RegimeReport::valid)
        .def_readonly("monotone_ok", &RegimeReport::monotone_ok)
        .def_readonly("failures", &RegimeReport::failures)
        .def_readonly("messages", &RegimeReport::messages);
    m.def("check_monotonicity", &check_monotonicity, py::arg("params"), py::arg("curve"), py::arg("t_grid"),
          py::arg("x_grid"));
    m.def("reference_density", &reference_density, py::arg("params"), py::arg("curve"), py::arg("t"), py::arg("x"));

    // curve
    py::class_<Curve>(m, "Curve")
        .def("lam", &Curve::lambda, py::arg("t"))
        .def("lam_deriv", &Curve::lambda_deriv, py::arg("t"))
        .def("beta", &Curve::beta, py::arg("t"))
        .def("gamma", &Curve::gamma, py::arg("t"))
        .def_property_readonly("t_max", &Curve::t_max)
        .def_property_readonly("description", &Curve::description);
    m.def(
        "make_curve",
        [](const std::string& kind, double t_max, const std::map<std::string, double>& args,
           std::optional<std::filesystem::path> path) {
            CurveSpec spec;
            spec.kind = kind;
            spec.args = args;
            if (path) spec.path = *path;
            return make_curve(spec, t_max);
        },
        py::arg("kind"), py::arg("t_max"), py::arg("args") = std::map<std::string, double>{},
        py::arg("path") = py::none());
    m.def(
        "curve_from_function",
        [](ScalarFn lambda, double t_max, std::optional<ScalarFn> deriv) {
            return decompose_curve(std::move(lambda), std::move(deriv), t_max, 0.0, "python");
        },
        py::arg("lam"), py::arg("t_max"), py::arg("deriv") = py::none());

    // paths
    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init([](double T, std::size_t n_steps) { return GridSpec{T, n_steps}; }), py::arg("T"),
             py::arg("n_steps"))
        .def_readwrite("T", &GridSpec::T)
        .def_readwrite("n_steps", &GridSpec::n_steps)
        .def_property_readonly("dt", &GridSpec::dt);

    py::enum_<SkewMode>(m, "SkewMode").value("band", SkewMode::band).value("bridge", SkewMode::bridge);
    py::enum_<DriftMode>(m, "DriftMode")
        .value("explicit_euler", DriftMode::explicit_euler)
        .value("implicit_sqrt_term", DriftMode::implicit_sqrt_term);
    py::enum_<ZeroHandling>(m, "ZeroHandling")
        .value("reflect_abs", ZeroHandling::reflect_abs)
        .value("truncate_at_zero", ZeroHandling::truncate_at_zero);
    py::class_<SchemeConfig>(m, "SchemeConfig")
        .def(py::init([](SkewMode skew, DriftMode drift, ZeroHandling zero, double band_width) {
                 SchemeConfig s;
                 s.skew_mode = skew;
                 s.drift_mode = drift;
                 s.zero_handling = zero;
                 s.band_width = band_width;
                 return s;
             }),
             py::arg("skew_mode") = SkewMode::band, py::arg("drift_mode") = DriftMode::explicit_euler,
             py::arg("zero_handling") = ZeroHandling::reflect_abs, py::arg("band_width") = 3.0)
        .def_readwrite("skew_mode", &SchemeConfig::skew_mode)
        .def_readwrite("drift_mode", &SchemeConfig::drift_mode)
        .def_readwrite("zero_handling", &SchemeConfig::zero_handling)
        .def_readwrite("band_width", &SchemeConfig::band_width);

    py::class_<Path>(m, "Path")
        .def_property_readonly("values", [](const Path& p) { return to_array(p.values); })
        .def_property_readonly("gauss", [](const Path& p) { return to_array(p.gauss); })
        .def_property_readonly("times",
                               [](const Path& p) {
                                   std::vector<double> t(p.values.size());
                                   for (std::size_t k = 0; k < t.size(); ++k) t[k] = p.grid.time(k);
                                   return to_array(t);
                               })
        .def_property_readonly("frame", [](const Path& p) { return std::string(frame_name(p.frame)); })
        .def_readonly("grid", &Path::grid)
        .def_readonly("seed", &Path::seed)
        .def_readonly("zero_violations", &Path::zero_violations)
        .def_property_readonly("reflections",
                               [](const Path& p) {
                                   py::list out;
                                   for (const auto& r : p.reflections)
                                       out.append(py::make_tuple(r.step, static_cast<int>(r.side), r.overshoot));
                                   return out;
                               })
        .def_property_readonly("terminal", &Path::terminal);

    m.def("simulate_y_path", &simulate_y_path, py::arg("params"), py::arg("curve"), py::arg("y0"), py::arg("grid"),
          py::arg("scheme") = SchemeConfig{}, py::arg("seed") = 1);
    m.def("simulate_x_path", &simulate_x_path, py::arg("params"), py::arg("curve"), py::arg("x0"), py::arg("grid"),
          py::arg("scheme") = SchemeConfig{}, py::arg("seed") = 1);
    m.def("simulate_dsr_path", &simulate_dsr_path, py::arg("params"), py::arg("curve"), py::arg("z0"),
          py::arg("grid"), py::arg("scheme") = SchemeConfig{}, py::arg("seed") = 1);
    m.def("square_path", &square_path, py::arg("y_path"));
    m.def("simulate_cir_exact_path", &simulate_cir_exact_path, py::arg("params"), py::arg("z0"), py::arg("grid"),
          py::arg("seed") = 1);

    // local time
    py::enum_<LocalTimeMethod>(m, "LocalTimeMethod")
        .value("occupation", LocalTimeMethod::occupation)
        .value("tanaka_residual", LocalTimeMethod::tanaka_residual);
    py::class_<LocalTimeEstimate>(m, "LocalTimeEstimate")
        .def_property_readonly("times", [](const LocalTimeEstimate& e) { return to_array(e.times); })
        .def_property_readonly("upper", [](const LocalTimeEstimate& e) { return to_array(e.upper); })
        .def_property_readonly("lower", [](const LocalTimeEstimate& e) { return to_array(e.lower); })
        .def_property_readonly("symmetric", [](const LocalTimeEstimate& e) { return to_array(e.symmetric); })
        .def_readonly("eps", &LocalTimeEstimate::eps)
        .def_readonly("method", &LocalTimeEstimate::method);
    m.def("default_eps", &default_eps, py::arg("path"));
    m.def("occupation_both", &occupation_both, py::arg("path"), py::arg("barrier"), py::arg("eps"));
    m.def("tanaka_residual", &tanaka_residual, py::arg("path"), py::arg("barrier"));
    m.def(
        "relation_ratios",
        [](const LocalTimeEstimate& est, double p) {
            const RatioPair r = relation_ratios(est, p);
            return py::make_tuple(r.r_up, r.r_low);
        },
        py::arg("estimate"), py::arg("p"));
    py::class_<RellocReport>(m, "RellocReport")
        .def_readonly("a", &RellocReport::a)
        .def_readonly("b", &RellocReport::b)
        .def_readonly("residual", &RellocReport::residual);
    m.def("check_relloc", &check_relloc, py::arg("r_path"), py::arg("y_path"), py::arg("curve"), py::arg("eps"));

    // girsanov
    py::class_<GirsanovWeight>(m, "GirsanovWeight")
        .def_readonly("stochastic_term", &GirsanovWeight::stochastic_term)
        .def_readonly("compensator_term", &GirsanovWeight::compensator_term)
        .def_readonly("log_weight", &GirsanovWeight::log_weight)
        .def_property_readonly("weight", &GirsanovWeight::weight);
    m.def(
        "girsanov_weight",
        [](const Path& x, const Curve& curve, const ModelParams& params, double T) {
            return girsanov_weight(x, curve, params, T);
        },
        py::arg("x_path"), py::arg("curve"), py::arg("params"), py::arg("T"));
    m.def(
        "shifted_brownian",
        [](const Path& x, const Curve& curve, const ModelParams& params) {
            return to_array(shifted_brownian(x, curve, params));
        },
        py::arg("x_path"), py::arg("curve"), py::arg("params"));

    // pde
    py::enum_<InterfaceMode>(m, "InterfaceMode")
        .value("flux_balance", InterfaceMode::flux_balance)
        .value("one_sided", InterfaceMode::one_sided)
        .value("none", InterfaceMode::none);
    py::class_<PdeGrid>(m, "PdeGrid")
        .def(py::init([](double x_max, std::size_t n_x, std::size_t n_t, InterfaceMode mode) {
                 PdeGrid g;
                 g.x_max = x_max;
                 g.n_x = n_x;
                 g.n_t = n_t;
                 g.interface_mode = mode;
                 return g;
             }),
             py::arg("x_max") = 20.0, py::arg("n_x") = 801, py::arg("n_t") = 2000,
             py::arg("interface_mode") = InterfaceMode::flux_balance)
        .def_readwrite("x_max", &PdeGrid::x_max)
        .def_readwrite("n_x", &PdeGrid::n_x)
        .def_readwrite("n_t", &PdeGrid::n_t)
        .def_readwrite("interface_mode", &PdeGrid::interface_mode);
    py::class_<PdeSolution>(m, "PdeSolution")
        .def_property_readonly("x", [](const PdeSolution& s) { return to_array(s.x); })
        .def_property_readonly("u0", [](const PdeSolution& s) { return to_array(s.u0); })
        .def_readonly("max_principle_ok", &PdeSolution::max_principle_ok)
        .def("value_at", &PdeSolution::value_at, py::arg("x"));
    m.def("solve_backward", &solve_backward, py::arg("params"), py::arg("barrier2"), py::arg("payoff"), py::arg("T"),
          py::arg("grid") = PdeGrid{});

    // analytics
    m.def(
        "cir_moments",
        [](const ModelParams& params, double z0, double t) {
            const Moments mo = cir_moments(params, z0, t);
            return py::make_tuple(mo.mean, mo.variance);
        },
        py::arg("params"), py::arg("z0"), py::arg("t"));
    m.def("noncentral_chisq_cdf", &noncentral_chisq_cdf, py::arg("dof"), py::arg("nc"), py::arg("x"));
    m.def("noncentral_chisq_pdf", &noncentral_chisq_pdf, py::arg("dof"), py::arg("nc"), py::arg("x"));
    m.def("cir_transition_cdf", &cir_transition_cdf, py::arg("params"), py::arg("z0"), py::arg("t"), py::arg("x"));
    m.def("skew_bm_transition", &skew_bm_transition, py::arg("p"), py::arg("t"), py::arg("x0"), py::arg("x"));
    m.def("skew_bm_prob_above", &skew_bm_prob_above, py::arg("p"), py::arg("t"), py::arg("x0"));
    py::class_<TestResult>(m, "TestResult")
        .def_readonly("statistic", &TestResult::statistic)
        .def_readonly("p_value", &TestResult::p_value)
        .def_readonly("n", &TestResult::n)
        .def_readonly("passed", &TestResult::pass);
    m.def("ks_test", &ks_test, py::arg("samples"), py::arg("cdf"), py::arg("level") = 0.01);
    m.def("ks_two_sample", &ks_two_sample, py::arg("a"), py::arg("b"), py::arg("level") = 0.01);
    py::class_<StationaryTestResult>(m, "StationaryTestResult")
        .def_readonly("chi2", &StationaryTestResult::chi2)
        .def_readonly("bins", &StationaryTestResult::bins)
        .def_readonly("scale", &StationaryTestResult::scale)
        .def_readonly("dof", &StationaryTestResult::dof)
        .def_readonly("naive_p_value", &StationaryTestResult::naive_p_value)
        .def_readonly("jump_ratio", &StationaryTestResult::jump_ratio)
        .def_readonly("jump_target", &StationaryTestResult::jump_target);
    m.def(
        "stationary_test",
        [](const std::vector<double>& samples, const ModelParams& params, double c, std::size_t bins, double level,
           bool correct_autocorrelation) {
            StationaryTestOptions o;
            o.bins = bins;
            o.level = level;
            o.correct_autocorrelation = correct_autocorrelation;
            return stationary_test(samples, params, c, o);
        },
        py::arg("samples"), py::arg("params"), py::arg("c"), py::arg("bins") = 40, py::arg("level") = 0.01,
        py::arg("correct_autocorrelation") = true);
    m.def("burn_and_thin", &burn_and_thin, py::arg("samples"), py::arg("burn_in"), py::arg("thin"));

    // experiments
    m.def("experiment_names", &experiment_names);
    m.def("experiment_summary", &experiment_summary, py::arg("name"));
    m.def(
        "default_config", [](const std::string& name) { return json_loads(config_to_json(default_config(name))); },
        py::arg("name"));
    m.def(
        "validate_config",
        [](const py::object& config) {
            auto c = config_from(config, std::nullopt);
            validate_config(c);
            return json_loads(config_to_json(c));
        },
        py::arg("config"));
    m.def(
        "run_experiment",
        [](const py::object& config, std::optional<std::uint64_t> seed, unsigned threads,
           std::optional<std::filesystem::path> out_dir) {
            const ExperimentConfig c = config_from(config, seed);
            RunOptions o;
            o.threads = threads;
            o.write_files = out_dir.has_value();
            o.out_dir = out_dir;
            ExperimentReport report;
            {
                py::gil_scoped_release release;
                report = run_experiment(c, o);
            }
            py::dict out = json_loads(report_to_json(report));
            out["metrics_json"] = metrics_to_json(report);
            return out;
        },
        py::arg("config"), py::arg("seed") = py::none(), py::arg("threads") = 0, py::arg("out_dir") = py::none(),
        "Runs an experiment from a config dict or JSON string and returns the report as a dict.");
}
