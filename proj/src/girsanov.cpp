#include "skewdiff/girsanov.hpp"

#include <algorithm>
#include <cmath>

#include "skewdiff/error.hpp"

namespace skewdiff {

namespace {

void check_x_path(const Path& x_path) {
    require(x_path.frame == Frame::X, Errc::wrong_frame,
            "Girsanov reweighting needs an X-frame path, got " + std::string(frame_name(x_path.frame)));
    require(x_path.gauss.size() == x_path.grid.n_steps, Errc::missing_draws,
            "path does not carry its Gaussian draws");
}

std::size_t horizon_index(const GridSpec& grid, double T) {
    const double pos = T / grid.dt();
    const auto k = static_cast<std::size_t>(std::llround(pos));
    require(T >= 0.0 && k <= grid.n_steps && std::abs(pos - static_cast<double>(k)) < 1e-6,
            Errc::precondition, "horizon T = " + std::to_string(T) + " is not a grid time");
    return k;
}

void check_variant(const ModelParams& params, GirsanovVariant variant) {
    if (variant == GirsanovVariant::dsr) {
        require(params.dsr_c().has_value(), Errc::missing_dsr_c, "the DSR variant needs dsr_c");
        require(params.b() == 0.0, Errc::precondition, "the DSR variant needs b = 0");
    }
}

}  // namespace

double GirsanovWeight::weight() const { return std::exp(log_weight); }

double girsanov_theta(const ModelParams& params, const Curve& curve, double t, GirsanovVariant variant) {
    const double s = params.sigma();
    const double k = variant == GirsanovVariant::dsr ? params.dsr_c().value_or(0.0)
                                                     : params.b() * curve.gamma(t);
    return (8.0 * curve.gamma_deriv(t) + s * s * k) / (4.0 * s);
}

GirsanovWeight girsanov_weight(const Path& x_path, const Curve& curve, const ModelParams& params,
                               double T, GirsanovVariant variant) {
    check_x_path(x_path);
    check_variant(params, variant);
    const std::size_t n = horizon_index(x_path.grid, T);
    const double dt = x_path.grid.dt();
    const double sqrt_dt = std::sqrt(dt);
    GirsanovWeight w;
    double prev = girsanov_theta(params, curve, 0.0, variant);
    double stoch = 0.0, comp = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double next = girsanov_theta(params, curve, x_path.grid.time(j + 1), variant);
        stoch += prev * sqrt_dt * x_path.gauss[j];
        comp += 0.25 * dt * (prev * prev + next * next);
        prev = next;
    }
    w.stochastic_term = -stoch;
    w.compensator_term = -comp;
    w.log_weight = w.stochastic_term + w.compensator_term;
    return w;
}

std::vector<double> shifted_brownian(const Path& x_path, const Curve& curve, const ModelParams& params,
                                     GirsanovVariant variant) {
    check_x_path(x_path);
    check_variant(params, variant);
    const std::size_t n = x_path.grid.n_steps;
    const double dt = x_path.grid.dt();
    const double sqrt_dt = std::sqrt(dt);
    std::vector<double> w(n + 1, 0.0);
    double b = 0.0, drift = 0.0;
    double prev = girsanov_theta(params, curve, 0.0, variant);
    for (std::size_t j = 0; j < n; ++j) {
        const double next = girsanov_theta(params, curve, x_path.grid.time(j + 1), variant);
        b += sqrt_dt * x_path.gauss[j];
        drift += 0.5 * dt * (prev + next);
        w[j + 1] = b + drift;
        prev = next;
    }
    return w;
}

ReweightedEstimate reweighted_from_samples(const std::vector<double>& log_weights,
                                           const std::vector<double>& values) {
    require(log_weights.size() == values.size(), Errc::precondition,
            "log-weights and values differ in length");
    const std::size_t n = values.size();
    require(n >= 2, Errc::precondition, "need at least two samples");
    double max_lw = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        require(std::isfinite(log_weights[i]) && std::isfinite(values[i]), Errc::precondition,
                "non-finite weight or payoff at sample " + std::to_string(i));
        max_lw = std::max(max_lw, log_weights[i]);
    }
    // ESS and the self-normalized estimate are scale free; use shifted weights.
    double sw = 0.0, sw2 = 0.0, swf = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = std::exp(log_weights[i] - max_lw);
        sw += w;
        sw2 += w * w;
        swf += w * values[i];
    }
    ReweightedEstimate r;
    r.n = n;
    r.ess = sw * sw / sw2;
    require(r.ess >= kMinEffectiveSampleSize, Errc::degenerate_weights,
            "effective sample size " + std::to_string(r.ess) + " is below 10");
    r.estimate = swf / sw;
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = std::exp(log_weights[i] - max_lw);
        const double d = values[i] - r.estimate;
        var += w * w * d * d;
    }
    r.std_error = std::sqrt(var) / sw;

    // unnormalized means need the true scale
    const double nd = static_cast<double>(n);
    double mw = 0.0, mwf = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = std::exp(log_weights[i]);
        require(std::isfinite(w), Errc::precondition, "weight overflow at sample " + std::to_string(i));
        mw += w;
        mwf += w * values[i];
    }
    mw /= nd;
    mwf /= nd;
    double vw = 0.0, vwf = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = std::exp(log_weights[i]);
        vw += (w - mw) * (w - mw);
        vwf += (w * values[i] - mwf) * (w * values[i] - mwf);
    }
    r.mean_weight = mw;
    r.mean_weight_se = std::sqrt(vw / (nd - 1.0) / nd);
    r.unnormalized = mwf;
    r.unnormalized_se = std::sqrt(vwf / (nd - 1.0) / nd);
    return r;
}

ReweightedEstimate reweighted_expectation(const std::function<double(double)>& payoff,
                                          const std::vector<Path>& x_paths, const Curve& curve,
                                          const ModelParams& params, double T, GirsanovVariant variant) {
    std::vector<double> lw, values;
    lw.reserve(x_paths.size());
    values.reserve(x_paths.size());
    const double shift = curve.gamma(T);
    for (const Path& path : x_paths) {
        require(path.grid.T == x_paths.front().grid.T && path.grid.n_steps == x_paths.front().grid.n_steps,
                Errc::precondition, "all paths must share one grid");
        lw.push_back(girsanov_weight(path, curve, params, T, variant).log_weight);
        values.push_back(payoff(path.values[horizon_index(path.grid, T)] + shift));
    }
    return reweighted_from_samples(lw, values);
}

}  // namespace skewdiff
