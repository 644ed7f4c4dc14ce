#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "skewdiff/model.hpp"

namespace skewdiff {

struct Moments {
    double mean;
    double variance;
};

/// Mean and variance of the unreflected CIR/BESQ process
/// dR = sigma sqrt(R) dW + (sigma^2/4)(delta - b R) dt started at z0.
Moments cir_moments(const ModelParams& params, double z0, double t);

/// P(chi'^2(dof, nc) <= x), Poisson mixture of central chi-squares summed
/// outward from the Poisson mode until the bound on the remaining mass is
/// below 1e-10. Throws Errc::series_not_converged.
double noncentral_chisq_cdf(double dof, double nc, double x);

/// P(R_t <= x) for the unreflected CIR/BESQ process started at z0: a scaled
/// noncentral chi-squared law with delta degrees of freedom.
double cir_transition_cdf(const ModelParams& params, double z0, double t, double x);

/// Density of the same law, same series.
double noncentral_chisq_pdf(double dof, double nc, double x);

/// Transition density of skew Brownian motion (variance t per unit time,
/// skew p at 0): phi_t(x - x0) + (2p - 1) sgn(x) phi_t(|x| + |x0|).
double skew_bm_transition(double p, double t, double x0, double x);

/// P(X_t > 0 | X_0 = x0) for the same process.
double skew_bm_prob_above(double p, double t, double x0);

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
    double level = 0.01;
    bool pass = false;
};

/// Asymptotic Kolmogorov survival function P(K > lambda).
double kolmogorov_survival(double lambda);

/// One-sample two-sided Kolmogorov-Smirnov test. Throws
/// Errc::too_few_samples for n < 10.
TestResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf,
                   double level = 0.01);

/// Two-sample Kolmogorov-Smirnov test.
TestResult ks_two_sample(std::vector<double> a, std::vector<double> b, double level = 0.01);

struct HistogramRow {
    double x;
    double empirical;
    double target;
};

struct StationaryTestResult {
    /// chi-squared goodness of fit on equal-probability bins
    TestResult chi2;
    std::size_t bins = 0;
    /// Rao-Scott scale a and degrees of freedom nu: the Pearson statistic is
    /// referred to a chi2(nu); without the correction a = 1, nu = bins - 1
    double scale = 1.0;
    double dof = 0.0;
    /// p-value of the uncorrected statistic
    double naive_p_value = 0.0;
    /// (n_above / G_above) / (n_below / G_below) in the windows [c, c+h) and
    /// [c-h, c), where G is the integral of the unskewed shape.
    double jump_ratio = 0.0;
    double jump_target = 1.0;
    /// bin midpoints with empirical and target densities
    std::vector<HistogramRow> histogram;
};

struct StationaryTestOptions {
    std::size_t bins = 40;
    double level = 0.01;
    /// jump-ratio window; <= 0 selects h = c
    double window = 0.0;
    /// calibrate for serial correlation of consecutive samples
    bool correct_autocorrelation = true;
    /// Bartlett lag of the long-run covariance; 0 selects the default rule
    std::size_t long_run_lags = 0;
};

/// Tests samples (already burnt-in and thinned, in time order) against the
/// invariant density of the constant-barrier model. Thinned samples from one
/// path remain correlated, so by default the chi-squared statistic is divided
/// by the pooled integrated autocorrelation time of the bin indicators
/// (Sokal window, c = 5). Needs b > 0 and at least 5 samples
/// per bin (Errc::too_few_samples).
StationaryTestResult stationary_test(const std::vector<double>& samples, const ModelParams& params,
                                     double c, const StationaryTestOptions& options = {});

/// Keeps samples[burn_in], samples[burn_in + thin], ...
std::vector<double> burn_and_thin(const std::vector<double>& samples, std::size_t burn_in,
                                  std::size_t thin);

}  // namespace skewdiff
