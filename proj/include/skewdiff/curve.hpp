#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace skewdiff {

using ScalarFn = std::function<double(double)>;

/// Barrier curve lambda(t) >= 0 on [0, t_max] together with its monotone
/// split lambda = beta + gamma, beta nonincreasing, gamma nondecreasing,
/// beta(0) = lambda(0), gamma(0) = 0.
///
/// beta and gamma are tabulated on the quadrature grid and interpolated
/// linearly; lambda and lambda' are evaluated from the stored callables.
/// Immutable after construction.
class Curve {
public:
    double lambda(double t) const;
    double lambda_deriv(double t) const;
    double beta(double t) const;
    double gamma(double t) const;
    /// (lambda')^+ , the density of gamma.
    double gamma_deriv(double t) const;
    /// -(lambda')^- , the density of beta.
    double beta_deriv(double t) const;

    double t_max() const noexcept { return t_max_; }
    double quad_step() const noexcept { return step_; }
    /// Largest |lambda'| seen on the quadrature grid.
    double sup_abs_deriv() const noexcept { return sup_abs_deriv_; }
    const std::vector<double>& beta_table() const noexcept { return beta_; }
    const std::vector<double>& gamma_table() const noexcept { return gamma_; }

    /// Human-readable origin, e.g. "constant(value=1)".
    const std::string& description() const noexcept { return description_; }

private:
    friend Curve decompose_curve(ScalarFn, std::optional<ScalarFn>, double,
                                 double, std::string);

    double interpolate(const std::vector<double>& table, double t) const;

    ScalarFn lambda_;
    ScalarFn deriv_;
    std::vector<double> beta_;
    std::vector<double> gamma_;
    double t_max_ = 0.0;
    double step_ = 0.0;
    double sup_abs_deriv_ = 0.0;
    std::string description_;
};

/// Splits lambda into its decreasing and increasing parts by composite
/// trapezoid quadrature of (lambda')^- and (lambda')^+ on a grid of width
/// about `quad_step`. Without an analytic derivative, centered differences
/// with step `quad_step` are used. `quad_step <= 0` selects 1e-4 * t_max.
///
/// Throws Errc::negative_curve if lambda < 0 at a grid point and
/// Errc::non_integrable_derivative if the quadrature is not finite.
Curve decompose_curve(ScalarFn lambda_fn, std::optional<ScalarFn> lambda_deriv,
                      double t_max, double quad_step = 0.0,
                      std::string description = "custom");

/// Named curve family with numeric parameters.
///   constant:    value
///   linear:      value + slope * t
///   exp-decay:   value * exp(-rate * t)
///   sinusoidal:  value + amplitude * sin(frequency * t)
///   csv:         two-column (t, lambda) file on a uniform grid, `path`
struct CurveSpec {
    std::string kind = "constant";
    std::map<std::string, double> args;
    std::filesystem::path path;
};

Curve make_curve(const CurveSpec& spec, double t_max, double quad_step = 0.0);

/// Linear interpolant of a two-column CSV (t, lambda) sampled on a uniform
/// grid starting at t = 0. Header rows that do not parse as numbers are
/// skipped.
Curve load_csv_curve(const std::filesystem::path& file, double t_max,
                     double quad_step = 0.0);

}  // namespace skewdiff
