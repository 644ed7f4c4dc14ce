#include "skewdiff/curve.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "skewdiff/error.hpp"

namespace skewdiff {

namespace {

std::string format_args(const std::map<std::string, double>& args) {
    std::ostringstream os;
    bool first = true;
    for (const auto& [key, value] : args) {
        if (!first) os << ",";
        os << key << "=" << value;
        first = false;
    }
    return os.str();
}

double arg_or(const CurveSpec& spec, const std::string& key, double fallback) {
    auto it = spec.args.find(key);
    return it == spec.args.end() ? fallback : it->second;
}

void check_args(const CurveSpec& spec, std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : spec.args) {
        bool known = std::any_of(allowed.begin(), allowed.end(),
                                 [&](const char* name) { return key == name; });
        require(known, Errc::config_invalid,
                "curve '" + spec.kind + "' has no parameter '" + key + "'");
        require(std::isfinite(value), Errc::config_invalid,
                "curve parameter '" + key + "' is not finite");
    }
}

}  // namespace

double Curve::interpolate(const std::vector<double>& table, double t) const {
    if (t <= 0.0) return table.front();
    const double pos = t / step_;
    const auto last = table.size() - 1;
    if (pos >= static_cast<double>(last)) return table.back();
    const auto i = static_cast<std::size_t>(pos);
    const double w = pos - static_cast<double>(i);
    return table[i] + w * (table[i + 1] - table[i]);
}

double Curve::lambda(double t) const { return lambda_(t); }
double Curve::lambda_deriv(double t) const { return deriv_(t); }
double Curve::beta(double t) const { return interpolate(beta_, t); }
double Curve::gamma(double t) const { return interpolate(gamma_, t); }
double Curve::gamma_deriv(double t) const { return std::max(deriv_(t), 0.0); }
double Curve::beta_deriv(double t) const { return std::min(deriv_(t), 0.0); }

Curve decompose_curve(ScalarFn lambda_fn, std::optional<ScalarFn> lambda_deriv,
                      double t_max, double quad_step, std::string description) {
    require(static_cast<bool>(lambda_fn), Errc::precondition, "curve needs a lambda function");
    require(std::isfinite(t_max) && t_max > 0.0, Errc::precondition,
            "curve horizon t_max must be positive");
    if (!(quad_step > 0.0)) quad_step = 1e-4 * t_max;
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(t_max / quad_step - 1e-9)));
    const double h = t_max / static_cast<double>(n);

    Curve curve;
    curve.t_max_ = t_max;
    curve.step_ = h;
    curve.description_ = std::move(description);
    curve.lambda_ = lambda_fn;
    if (lambda_deriv && *lambda_deriv) {
        curve.deriv_ = std::move(*lambda_deriv);
    } else {
        // centered differences, one-sided at the ends of [0, t_max]
        curve.deriv_ = [f = lambda_fn, h, t_max](double t) {
            const double lo = std::max(0.0, t - h);
            const double hi = std::min(t_max, t + h);
            return (f(hi) - f(lo)) / (hi - lo);
        };
    }

    std::vector<double> deriv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) * h;
        const double value = lambda_fn(t);
        require(std::isfinite(value), Errc::non_integrable_derivative,
                "lambda is not finite at t = " + std::to_string(t));
        require(value >= 0.0, Errc::negative_curve,
                "lambda(" + std::to_string(t) + ") = " + std::to_string(value) + " < 0");
        deriv[i] = curve.deriv_(t);
        require(std::isfinite(deriv[i]), Errc::non_integrable_derivative,
                "lambda' is not finite at t = " + std::to_string(t));
        curve.sup_abs_deriv_ = std::max(curve.sup_abs_deriv_, std::abs(deriv[i]));
    }

    curve.beta_.assign(n + 1, 0.0);
    curve.gamma_.assign(n + 1, 0.0);
    curve.beta_[0] = lambda_fn(0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double up = 0.5 * h * (std::max(deriv[i], 0.0) + std::max(deriv[i + 1], 0.0));
        const double down = 0.5 * h * (std::max(-deriv[i], 0.0) + std::max(-deriv[i + 1], 0.0));
        curve.gamma_[i + 1] = curve.gamma_[i] + up;
        curve.beta_[i + 1] = curve.beta_[i] - down;
    }
    require(std::isfinite(curve.gamma_.back()) && std::isfinite(curve.beta_.back()),
            Errc::non_integrable_derivative, "quadrature of lambda' overflowed");
    return curve;
}

Curve make_curve(const CurveSpec& spec, double t_max, double quad_step) {
    const std::string& kind = spec.kind;
    if (kind == "constant") {
        check_args(spec, {"value"});
        const double v = arg_or(spec, "value", 1.0);
        return decompose_curve([v](double) { return v; }, ScalarFn([](double) { return 0.0; }),
                               t_max, quad_step, "constant(" + format_args(spec.args) + ")");
    }
    if (kind == "linear") {
        check_args(spec, {"value", "slope"});
        const double v = arg_or(spec, "value", 1.0);
        const double s = arg_or(spec, "slope", 1.0);
        return decompose_curve([v, s](double t) { return v + s * t; },
                               ScalarFn([s](double) { return s; }), t_max, quad_step,
                               "linear(" + format_args(spec.args) + ")");
    }
    if (kind == "exp-decay") {
        check_args(spec, {"value", "rate"});
        const double v = arg_or(spec, "value", 1.0);
        const double r = arg_or(spec, "rate", 1.0);
        return decompose_curve([v, r](double t) { return v * std::exp(-r * t); },
                               ScalarFn([v, r](double t) { return -r * v * std::exp(-r * t); }),
                               t_max, quad_step, "exp-decay(" + format_args(spec.args) + ")");
    }
    if (kind == "sinusoidal") {
        check_args(spec, {"value", "amplitude", "frequency"});
        const double v = arg_or(spec, "value", 1.0);
        const double a = arg_or(spec, "amplitude", 0.5);
        const double w = arg_or(spec, "frequency", 1.0);
        return decompose_curve([v, a, w](double t) { return v + a * std::sin(w * t); },
                               ScalarFn([a, w](double t) { return a * w * std::cos(w * t); }),
                               t_max, quad_step, "sinusoidal(" + format_args(spec.args) + ")");
    }
    if (kind == "csv") {
        require(!spec.path.empty(), Errc::config_invalid, "csv curve needs a path");
        return load_csv_curve(spec.path, t_max, quad_step);
    }
    fail(Errc::config_invalid, "unknown curve kind '" + kind +
                                   "' (expected constant, linear, exp-decay, sinusoidal, csv)");
}

Curve load_csv_curve(const std::filesystem::path& file, double t_max, double quad_step) {
    std::ifstream in(file);
    require(static_cast<bool>(in), Errc::io, "cannot open curve file " + file.string());
    std::vector<double> ts, ls;
    std::string line;
    while (std::getline(in, line)) {
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double t = 0.0, l = 0.0;
        if (!(row >> t >> l)) continue;
        ts.push_back(t);
        ls.push_back(l);
    }
    require(ts.size() >= 2, Errc::config_invalid,
            "curve file " + file.string() + " needs at least two (t, lambda) rows");
    require(ts.front() == 0.0, Errc::config_invalid, "curve file must start at t = 0");
    const double h = ts[1] - ts[0];
    require(h > 0.0, Errc::config_invalid, "curve file times must increase");
    for (std::size_t i = 1; i < ts.size(); ++i) {
        const double expected = static_cast<double>(i) * h;
        require(std::abs(ts[i] - expected) <= 1e-9 * std::max(1.0, expected), Errc::config_invalid,
                "curve file grid is not uniform at row " + std::to_string(i));
    }
    require(ts.back() >= t_max * (1.0 - 1e-12), Errc::config_invalid,
            "curve file ends at t = " + std::to_string(ts.back()) + " before the horizon " +
                std::to_string(t_max));
    auto samples = std::make_shared<const std::vector<double>>(std::move(ls));
    const std::size_t last = samples->size() - 1;
    auto locate = [h, last](double t) {
        const double pos = std::clamp(t / h, 0.0, static_cast<double>(last));
        const auto i = std::min(static_cast<std::size_t>(pos), last - 1);
        return std::pair{i, pos - static_cast<double>(i)};
    };
    ScalarFn lambda = [samples, locate](double t) {
        auto [i, w] = locate(t);
        return (*samples)[i] + w * ((*samples)[i + 1] - (*samples)[i]);
    };
    return decompose_curve(std::move(lambda), std::nullopt, t_max, quad_step,
                           "csv(" + file.string() + ")");
}

}  // namespace skewdiff
