#pragma once

#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "skewdiff/curve.hpp"
#include "skewdiff/model.hpp"
#include "skewdiff/path.hpp"

namespace testutil {

inline skewdiff::ModelParams params(double sigma, double delta, double b, double p,
                                    std::optional<double> c = std::nullopt) {
    return skewdiff::validate_params({sigma, delta, b, p, c});
}

inline skewdiff::Curve constant(double value, double t_max) {
    skewdiff::CurveSpec spec;
    spec.args["value"] = value;
    return skewdiff::make_curve(spec, t_max);
}

inline skewdiff::Curve linear(double value, double slope, double t_max) {
    skewdiff::CurveSpec spec;
    spec.kind = "linear";
    spec.args = {{"value", value}, {"slope", slope}};
    return skewdiff::make_curve(spec, t_max);
}

inline skewdiff::SchemeConfig bridge() {
    skewdiff::SchemeConfig s;
    s.skew_mode = skewdiff::SkewMode::bridge;
    s.drift_mode = skewdiff::DriftMode::implicit_sqrt_term;
    return s;
}

struct Stats {
    double mean;
    double se;
};

inline Stats stats(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, std::sqrt(ss / (n - 1.0) / n)};
}

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, std::size_t n) {
    const double h = (b - a) / static_cast<double>(n);
    double s = f(a) + f(b);
    for (std::size_t i = 1; i < n; ++i) s += f(a + h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

/// Hand-built path on [0, T] with the given values.
inline skewdiff::Path make_path(std::vector<double> values, double T, skewdiff::Frame frame = skewdiff::Frame::Y,
                                double sigma = 2.0) {
    skewdiff::Path p;
    p.grid = {T, values.size() - 1};
    p.frame = frame;
    p.sigma = sigma;
    p.values = std::move(values);
    p.gauss.assign(p.values.size() - 1, 0.0);
    return p;
}

}  // namespace testutil
