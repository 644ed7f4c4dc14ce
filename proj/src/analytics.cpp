#include "skewdiff/analytics.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "skewdiff/error.hpp"

namespace skewdiff {

namespace {

constexpr double kSeriesTol = 1e-10;
constexpr std::size_t kMaxSeriesTerms = 2'000'000;

// sum_j Pois(j; mu) g(j), walking away from the mode in both directions.
// `g_bound` bounds |g| and turns the Poisson tail into an absolute error bound.
template <class G>
double poisson_mixture(double mu, G&& g, double g_bound) try {
    if (mu == 0.0) return g(0);
    const double half_tol = 0.5 * kSeriesTol;
    const auto mode = static_cast<std::size_t>(std::floor(mu));
    const double p_mode = std::exp(-mu + static_cast<double>(mode) * std::log(mu) -
                                   std::lgamma(static_cast<double>(mode) + 1.0));
    std::size_t terms = 0;
    double sum = 0.0;

    double pj = p_mode;
    for (std::size_t j = mode;; ++j) {
        sum += pj * g(j);
        pj *= mu / static_cast<double>(j + 1);
        const double ratio = mu / static_cast<double>(j + 2);
        const double tail = ratio < 1.0 ? pj / (1.0 - ratio) : std::numeric_limits<double>::infinity();
        if (tail * g_bound < half_tol || pj == 0.0) break;
        if (++terms > kMaxSeriesTerms) fail(Errc::series_not_converged, "Poisson series did not converge");
    }
    pj = p_mode;
    for (std::size_t j = mode; j > 0; --j) {
        pj *= static_cast<double>(j) / mu;  // now Pois(j - 1)
        sum += pj * g(j - 1);
        const double ratio = static_cast<double>(j - 1) / mu;
        const double tail = pj * ratio / (1.0 - ratio);
        if (tail * g_bound < half_tol || pj == 0.0) break;
        if (++terms > kMaxSeriesTerms) fail(Errc::series_not_converged, "Poisson series did not converge");
    }
    if (!std::isfinite(sum)) fail(Errc::series_not_converged, "Poisson series is not finite");
    return sum;
} catch (const boost::math::evaluation_error& e) {
    fail(Errc::series_not_converged, std::string("special function evaluation failed: ") + e.what());
}

}  // namespace

Moments cir_moments(const ModelParams& params, double z0, double t) {
    require(t >= 0.0 && z0 >= 0.0, Errc::precondition, "cir_moments needs t >= 0 and z0 >= 0");
    const double s2 = params.sigma() * params.sigma();
    const double delta = params.delta();
    if (params.b() == 0.0) {
        return {z0 + 0.25 * s2 * delta * t, s2 * z0 * t + s2 * s2 * delta * t * t / 8.0};
    }
    const double kappa = 0.25 * s2 * params.b();
    const double theta = delta / params.b();
    const double decay = std::exp(-kappa * t);
    const double one_minus = -std::expm1(-kappa * t);
    return {z0 * decay + theta * one_minus,
            z0 * s2 / kappa * decay * one_minus + theta * s2 / (2.0 * kappa) * one_minus * one_minus};
}

double noncentral_chisq_cdf(double dof, double nc, double x) {
    require(dof > 0.0 && nc >= 0.0 && x >= 0.0, Errc::precondition,
            "noncentral_chisq_cdf needs dof > 0, nc >= 0, x >= 0");
    if (x == 0.0) return 0.0;
    const double v = poisson_mixture(
        0.5 * nc,
        [&](std::size_t j) { return boost::math::gamma_p(0.5 * dof + static_cast<double>(j), 0.5 * x); },
        1.0);
    return std::clamp(v, 0.0, 1.0);
}

double cir_transition_cdf(const ModelParams& params, double z0, double t, double x) {
    require(t > 0.0 && z0 >= 0.0, Errc::precondition, "cir_transition_cdf needs t > 0 and z0 >= 0");
    if (x <= 0.0) return 0.0;
    const double s2 = params.sigma() * params.sigma();
    double scale, nc;
    if (params.b() == 0.0) {
        scale = 0.25 * s2 * t;
        nc = z0 / scale;
    } else {
        const double kappa = 0.25 * s2 * params.b();
        scale = -s2 * std::expm1(-kappa * t) / (4.0 * kappa);
        nc = z0 * std::exp(-kappa * t) / scale;
    }
    return noncentral_chisq_cdf(params.delta(), nc, x / scale);
}

double noncentral_chisq_pdf(double dof, double nc, double x) {
    require(dof > 0.0 && nc >= 0.0, Errc::precondition, "noncentral_chisq_pdf needs dof > 0, nc >= 0");
    if (x < 0.0) return 0.0;
    auto chi2 = [&](std::size_t j) {
        return 0.5 * boost::math::gamma_p_derivative(0.5 * dof + static_cast<double>(j), 0.5 * x);
    };
    if (x == 0.0 && dof < 2.0) return std::numeric_limits<double>::infinity();
    // central chi-squared densities with >= 2 degrees of freedom are <= 1/2,
    // and only those appear in the tails of the series
    return poisson_mixture(0.5 * nc, chi2, 1.0);
}

double skew_bm_transition(double p, double t, double x0, double x) {
    require(t > 0.0, Errc::precondition, "skew_bm_transition needs t > 0");
    auto phi = [t](double y) { return std::exp(-0.5 * y * y / t) / std::sqrt(2.0 * std::numbers::pi * t); };
    const double sgn = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
    return phi(x - x0) + (2.0 * p - 1.0) * sgn * phi(std::abs(x) + std::abs(x0));
}

double skew_bm_prob_above(double p, double t, double x0) {
    require(t > 0.0, Errc::precondition, "skew_bm_prob_above needs t > 0");
    const double s = std::sqrt(t);
    // int_0^inf phi(x - x0) + (2p-1) phi(x + |x0|) dx
    const double a = 0.5 * std::erfc(-x0 / (s * std::numbers::sqrt2));
    const double b = 0.5 * std::erfc(std::abs(x0) / (s * std::numbers::sqrt2));
    return a + (2.0 * p - 1.0) * b;
}

double kolmogorov_survival(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 1.18) {
        // Jacobi-theta form, fast for small lambda
        const double c = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
        double s = 0.0;
        for (int j = 1; j <= 20; ++j) s += std::exp(-static_cast<double>((2 * j - 1) * (2 * j - 1)) * c);
        return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s, 0.0, 1.0);
    }
    double s = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        s += (j % 2 == 1 ? term : -term);
        if (term < 1e-300) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

namespace {

TestResult finish_ks(double d, double n_eff, std::size_t n, double level) {
    TestResult r;
    r.statistic = d;
    r.n = n;
    r.level = level;
    const double sn = std::sqrt(n_eff);
    r.p_value = kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d);
    r.pass = r.p_value > level;
    return r;
}

}  // namespace

TestResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf, double level) {
    const std::size_t n = samples.size();
    require(n >= 10, Errc::too_few_samples, "KS test needs at least 10 samples, got " + std::to_string(n));
    std::sort(samples.begin(), samples.end());
    const double nd = static_cast<double>(n);
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, static_cast<double>(i + 1) / nd - f, f - static_cast<double>(i) / nd});
    }
    return finish_ks(d, nd, n, level);
}

TestResult ks_two_sample(std::vector<double> a, std::vector<double> b, double level) {
    require(a.size() >= 10 && b.size() >= 10, Errc::too_few_samples,
            "two-sample KS test needs at least 10 samples per side");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return finish_ks(d, na * nb / (na + nb), a.size() + b.size(), level);
}

std::vector<double> burn_and_thin(const std::vector<double>& samples, std::size_t burn_in, std::size_t thin) {
    require(thin > 0, Errc::precondition, "thinning factor must be positive");
    std::vector<double> out;
    for (std::size_t k = burn_in; k < samples.size(); k += thin) out.push_back(samples[k]);
    return out;
}

namespace {

// Second-order Rao-Scott correction for Pearson's statistic on correlated
// samples: Q ~ a chi2(nu) with a = tr(M^2) / tr(M), nu = tr(M)^2 / tr(M^2),
// M = K Omega, where Omega is the Bartlett-weighted long-run covariance of
// the bin indicator vectors (lag L). Independent samples give a = 1 and
// nu = K - 1.
struct RaoScott {
    double scale = 1.0;
    double dof = 1.0;
};

RaoScott rao_scott(const std::vector<std::size_t>& bin, std::size_t bins, std::size_t lags) {
    const std::size_t n = bin.size();
    std::vector<double> freq(bins, 0.0);
    for (std::size_t b : bin) freq[b] += 1.0 / static_cast<double>(n);
    std::vector<double> omega(bins * bins, 0.0);
    for (std::size_t k = 0; k <= lags && k < n; ++k) {
        const double weight = k == 0 ? 1.0 : 1.0 - static_cast<double>(k) / static_cast<double>(lags + 1);
        std::vector<double> joint(bins * bins, 0.0);
        for (std::size_t t = 0; t + k < n; ++t) joint[bin[t] * bins + bin[t + k]] += 1.0;
        const double pairs = static_cast<double>(n - k);
        for (std::size_t i = 0; i < bins; ++i)
            for (std::size_t j = 0; j < bins; ++j) {
                const double g = joint[i * bins + j] / pairs - freq[i] * freq[j];
                const double gt = joint[j * bins + i] / pairs - freq[i] * freq[j];
                omega[i * bins + j] += k == 0 ? g : weight * (g + gt);
            }
    }
    const double kd = static_cast<double>(bins);
    double tr = 0.0, tr2 = 0.0;
    for (std::size_t i = 0; i < bins; ++i) tr += kd * omega[i * bins + i];
    for (double v : omega) tr2 += kd * kd * v * v;
    if (!(tr > 0.0) || !(tr2 > 0.0)) return {};
    return {tr2 / tr, tr * tr / tr2};
}

}  // namespace

StationaryTestResult stationary_test(const std::vector<double>& samples, const ModelParams& params, double c,
                                     const StationaryTestOptions& options) {
    const StationaryDensity density(params, c);
    const std::size_t bins = options.bins;
    require(bins >= 2, Errc::precondition, "need at least two bins");
    const std::size_t n = samples.size();
    require(n >= 5 * bins, Errc::too_few_samples,
            "stationary test needs at least " + std::to_string(5 * bins) + " samples, got " + std::to_string(n));

    std::vector<double> edges(bins + 1);
    edges[0] = 0.0;
    edges[bins] = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < bins; ++i) edges[i] = density.quantile(static_cast<double>(i) / bins);

    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> counts(bins);
    for (std::size_t i = 0; i < bins; ++i) {
        const auto lo = std::lower_bound(sorted.begin(), sorted.end(), edges[i]);
        const auto hi = i + 1 == bins ? sorted.end() : std::lower_bound(sorted.begin(), sorted.end(), edges[i + 1]);
        counts[i] = static_cast<std::size_t>(hi - lo);
    }
    // anything below 0 (should not happen) lands in the first bin
    counts[0] += static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), 0.0) - sorted.begin());

    const double nd = static_cast<double>(n);
    const double expected = nd / static_cast<double>(bins);
    double stat = 0.0;
    StationaryTestResult out;
    out.bins = bins;
    for (std::size_t i = 0; i < bins; ++i) {
        const double diff = static_cast<double>(counts[i]) - expected;
        stat += diff * diff / expected;
        if (i + 1 < bins) {
            const double width = edges[i + 1] - edges[i];
            out.histogram.push_back({0.5 * (edges[i] + edges[i + 1]),
                                     static_cast<double>(counts[i]) / (nd * width),
                                     1.0 / (static_cast<double>(bins) * width)});
        }
    }
    const double dof = static_cast<double>(bins - 1);
    out.naive_p_value = boost::math::gamma_q(0.5 * dof, 0.5 * stat);
    double scale = 1.0;
    double dof_eff = dof;
    if (options.correct_autocorrelation) {
        std::vector<std::size_t> bin(n);
        for (std::size_t t = 0; t < n; ++t)
            bin[t] = static_cast<std::size_t>(std::upper_bound(edges.begin() + 1, edges.end() - 1, samples[t]) -
                                              (edges.begin() + 1));
        // Bartlett-rate lag rule
        const auto lags = options.long_run_lags > 0 ? options.long_run_lags
                                                    : static_cast<std::size_t>(std::ceil(2.0 * std::cbrt(nd)));
        const RaoScott rs = rao_scott(bin, bins, lags);
        scale = rs.scale;
        dof_eff = rs.dof;
    }
    out.scale = scale;
    out.dof = dof_eff;
    out.chi2.statistic = stat;
    out.chi2.n = n;
    out.chi2.level = options.level;
    out.chi2.p_value = boost::math::gamma_q(0.5 * dof_eff, 0.5 * stat / scale);
    out.chi2.pass = out.chi2.p_value > options.level;

    out.jump_target = params.p() / (1.0 - params.p());
    out.jump_ratio = std::numeric_limits<double>::quiet_NaN();
    if (c > 0.0) {
        const double h = options.window > 0.0 ? options.window : c;
        const double k = 0.5 * params.delta();
        auto mass = [&](double x) { return boost::math::gamma_p(k, 0.5 * params.b() * x); };
        const double g_below = mass(c) - mass(std::max(0.0, c - h));
        const double g_above = mass(c + h) - mass(c);
        const auto n_below = std::lower_bound(sorted.begin(), sorted.end(), c) -
                             std::lower_bound(sorted.begin(), sorted.end(), std::max(0.0, c - h));
        const auto n_above = std::lower_bound(sorted.begin(), sorted.end(), c + h) -
                             std::lower_bound(sorted.begin(), sorted.end(), c);
        if (n_below > 0 && g_below > 0.0 && g_above > 0.0) {
            out.jump_ratio = (static_cast<double>(n_above) / g_above) / (static_cast<double>(n_below) / g_below);
        }
    }
    return out;
}

}  // namespace skewdiff
