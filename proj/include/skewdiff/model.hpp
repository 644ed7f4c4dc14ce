#pragma once

#include <optional>
#include <string>
#include <vector>

#include "skewdiff/curve.hpp"

namespace skewdiff {

/// Candidate parameters before validation.
struct RawParams {
    double sigma = 2.0;
    double delta = 2.0;
    double b = 0.0;
    double p = 0.5;
    std::optional<double> dsr_c;
};

/// Validated (sigma, delta, b, p) with sigma > 0, delta >= 1, b >= 0,
/// 0 < p < 1, and the optional drift coefficient c of the double
/// square-root model. Only `validate_params` creates these.
class ModelParams {
public:
    double sigma() const noexcept { return sigma_; }
    double delta() const noexcept { return delta_; }
    double b() const noexcept { return b_; }
    double p() const noexcept { return p_; }
    const std::optional<double>& dsr_c() const noexcept { return dsr_c_; }

    /// Exact comparison; the reflection at zero is switched on only for
    /// delta == 1.
    bool delta_is_one() const noexcept { return delta_ == 1.0; }

    /// delta / b, finite only for b > 0.
    std::optional<double> mean_reversion_level() const noexcept;

    RawParams raw() const noexcept { return {sigma_, delta_, b_, p_, dsr_c_}; }

private:
    friend ModelParams validate_params(const RawParams& raw);
    double sigma_ = 2.0;
    double delta_ = 2.0;
    double b_ = 0.0;
    double p_ = 0.5;
    std::optional<double> dsr_c_;
};

/// Throws Error with exactly one of sigma_nonpositive, delta_below_one,
/// b_negative, p_out_of_range, dsr_c_negative (checked in that order).
ModelParams validate_params(const RawParams& raw);

/// rho(t, x) = ((1-p) 1[-gamma <= x < beta] + p 1[x >= beta])
///             * |x + gamma|^(delta-1) * exp(-b x^2 / 2), zero for x < -gamma(t).
double reference_density(const ModelParams& params, const Curve& curve,
                         double t, double x);

struct MonotonicityWitness {
    double s;
    double t;
    double x;
    double rho_s;
    double rho_t;
};

struct RegimeReport {
    bool valid = false;
    bool monotone_ok = false;
    std::vector<MonotonicityWitness> failures;
    std::vector<std::string> messages;
};

inline constexpr double kMonotonicityTol = 1e-12;

/// Checks rho(s, x) <= rho(t, x) * (1 + 1e-12) for every s <= t in `t_grid`
/// and x in `x_grid` with x >= -gamma(s). Violations are listed, not thrown.
RegimeReport check_monotonicity(const ModelParams& params, const Curve& curve,
                                const std::vector<double>& t_grid,
                                const std::vector<double>& x_grid);

/// Normalized invariant density of R for a constant barrier lambda^2 = c:
/// x^(delta/2-1) exp(-b x/2) ((1-p) 1[x<c] + p 1[x>=c]) / Z.
/// Z is computed once by adaptive quadrature (relative tolerance 1e-10).
class StationaryDensity {
public:
    StationaryDensity(const ModelParams& params, double c);

    double operator()(double x) const;
    /// Unnormalized density.
    double shape(double x) const;
    double normalizer() const noexcept { return z_; }
    double barrier() const noexcept { return c_; }
    /// Closed form in terms of regularized incomplete gamma functions.
    double cdf(double x) const;
    double quantile(double u) const;

private:
    double delta_, b_, p_, c_, z_;
};

/// Throws Errc::not_normalizable for b == 0.
double stationary_density_constant_barrier(const ModelParams& params, double c,
                                           double x);

}  // namespace skewdiff
