#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "skewdiff/curve.hpp"
#include "skewdiff/model.hpp"
#include "skewdiff/path.hpp"

namespace skewdiff {

/// Drift removed by the change of measure: the Girsanov kernel is
/// theta(t) = (8 gamma'(t) + sigma^2 * k(t)) / (4 sigma) with k = b gamma
/// (mean-reverting model) or k = c (double square-root model, b = 0).
enum class GirsanovVariant : std::uint8_t { mean_reverting, dsr };

struct GirsanovWeight {
    /// -sum_j theta(t_j) sqrt(dt) g_j
    double stochastic_term = 0.0;
    /// -(1/2) int_0^T theta^2 ds by the trapezoid rule
    double compensator_term = 0.0;
    double log_weight = 0.0;

    double weight() const;
};

double girsanov_theta(const ModelParams& params, const Curve& curve, double t,
                      GirsanovVariant variant = GirsanovVariant::mean_reverting);

/// Density dQ/dP on F_T for an X-frame path; T must be a grid time.
/// Throws Errc::wrong_frame and Errc::missing_draws.
GirsanovWeight girsanov_weight(const Path& x_path, const Curve& curve, const ModelParams& params,
                               double T, GirsanovVariant variant = GirsanovVariant::mean_reverting);

/// W_k = B_k + int_0^{t_k} theta ds, with B_k = sqrt(dt) sum_{j<k} g_j.
/// The drift integral uses the trapezoid rule.
std::vector<double> shifted_brownian(const Path& x_path, const Curve& curve,
                                     const ModelParams& params,
                                     GirsanovVariant variant = GirsanovVariant::mean_reverting);

struct ReweightedEstimate {
    /// sum w f / sum w
    double estimate = 0.0;
    /// delta-method standard error of `estimate`
    double std_error = 0.0;
    /// mean(w f)
    double unnormalized = 0.0;
    double unnormalized_se = 0.0;
    /// mean(w); equals 1 in expectation
    double mean_weight = 0.0;
    double mean_weight_se = 0.0;
    /// (sum w)^2 / sum w^2
    double ess = 0.0;
    std::size_t n = 0;
};

inline constexpr double kMinEffectiveSampleSize = 10.0;

/// Importance-sampling reductions from per-path log-weights and payoff
/// values. Throws Errc::degenerate_weights when ESS < 10 and
/// Errc::precondition on non-finite values.
ReweightedEstimate reweighted_from_samples(const std::vector<double>& log_weights,
                                           const std::vector<double>& values);

/// Estimates E_Q[f(Y_T)] = E_P[w f(X_T + gamma(T))] over a batch of X paths.
ReweightedEstimate reweighted_expectation(const std::function<double(double)>& payoff,
                                          const std::vector<Path>& x_paths, const Curve& curve,
                                          const ModelParams& params, double T,
                                          GirsanovVariant variant = GirsanovVariant::mean_reverting);

}  // namespace skewdiff
