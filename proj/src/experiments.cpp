#include "skewdiff/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "skewdiff/analytics.hpp"
#include "skewdiff/error.hpp"
#include "skewdiff/girsanov.hpp"
#include "skewdiff/local_time.hpp"
#include "skewdiff/parallel.hpp"
#include "skewdiff/path_io.hpp"
#include "skewdiff/pde.hpp"

namespace skewdiff {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

struct Summary {
    double mean = 0.0;
    double sd = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

Summary summarize(const std::vector<double>& v) {
    Summary s;
    s.n = v.size();
    if (v.empty()) return s;
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
        s.se = s.sd / std::sqrt(static_cast<double>(s.n));
    }
    return s;
}

// Seeds of independent auxiliary streams within one experiment.
constexpr std::uint64_t kAuxStream = 0x5EED0A11C0FFEEULL;

struct Context {
    const ExperimentConfig& config;
    ModelParams params;
    Curve curve;
    unsigned threads;
    std::uint64_t seed;
    ExperimentReport& report;

    double y0() const { return std::sqrt(config.start); }
    GridSpec grid(std::size_t n_steps) const { return {config.grid.T, n_steps}; }
};

bool constant_curve(const Curve& curve) {
    return curve.sup_abs_deriv() == 0.0 && curve.lambda(0.0) == curve.lambda(curve.t_max());
}

std::vector<double> step_levels(const Context& ctx) {
    std::vector<double> out;
    const auto& lv = ctx.config.options.step_levels;
    if (lv.empty()) return {static_cast<double>(ctx.config.grid.n_steps)};
    for (auto n : lv) out.push_back(static_cast<double>(n));
    std::sort(out.begin(), out.end());
    return out;
}

Table terminal_cdf_table(std::vector<double> samples, const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    Table t{{"x", "empirical", "target"}, {}};
    const std::size_t points = std::min<std::size_t>(200, samples.size());
    for (std::size_t i = 1; i <= points; ++i) {
        const std::size_t k = i * samples.size() / points - 1;
        const double x = samples[k];
        t.rows.push_back({x, static_cast<double>(k + 1) / static_cast<double>(samples.size()), cdf(x)});
    }
    return t;
}

// --- experiments ---------------------------------------------------------

void run_cir_baseline(Context& ctx) {
    const auto& c = ctx.config;
    const GridSpec grid = c.grid;
    const auto r_t = parallel_map(c.n_paths, ctx.threads, [&](std::size_t k) {
        const Path y = simulate_y_path(ctx.params, ctx.curve, ctx.y0(), grid, c.scheme, derive_seed(ctx.seed, k));
        return y.terminal() * y.terminal();
    });
    const Summary s = summarize(r_t);
    const Moments m = cir_moments(ctx.params, c.start, grid.T);
    auto& rep = ctx.report;
    rep.add_metric("mean_R_T", s.mean, s.se);
    rep.add_metric("target_mean", m.mean);
    rep.add_metric("var_R_T", s.sd * s.sd);
    rep.add_metric("target_var", m.variance);
    rep.add_criterion("mean_within_3se", std::abs(s.mean - m.mean) <= 3.0 * s.se, s.mean, m.mean,
                      "|mean - target| <= 3 SE (SE = " + fmt(s.se) + ")");

    // exact-transition comparison on up to 10^4 samples
    const std::size_t n_exact = std::min<std::size_t>(10000, c.n_paths);
    const std::uint64_t aux = derive_seed(ctx.seed, kAuxStream);
    const auto exact = parallel_map(n_exact, ctx.threads, [&](std::size_t k) {
        Rng rng(derive_seed(aux, k));
        return ctx.params.b() > 0.0 ? exact_cir_step(ctx.params, c.start, grid.T, rng)
                                    : exact_besq_step(ctx.params, c.start, grid.T, rng);
    });
    std::vector<double> head(r_t.begin(), r_t.begin() + static_cast<std::ptrdiff_t>(n_exact));
    const TestResult ks = ks_two_sample(head, exact, c.options.level);
    rep.add_metric("ks_vs_exact", ks.statistic);
    rep.add_metric("ks_vs_exact_p_value", ks.p_value);
    rep.add_criterion("ks_vs_exact", ks.statistic <= c.options.abs_tol, ks.statistic, 0.0,
                      "two-sample KS distance <= " + fmt(c.options.abs_tol));
    rep.tables["terminal-cdf"] = terminal_cdf_table(
        head, [&](double x) { return cir_transition_cdf(ctx.params, c.start, grid.T, x); });
}

void run_besq_law(Context& ctx) {
    const auto& c = ctx.config;
    const auto r_t = parallel_map(c.n_paths, ctx.threads, [&](std::size_t k) {
        const Path y = simulate_y_path(ctx.params, ctx.curve, ctx.y0(), c.grid, c.scheme, derive_seed(ctx.seed, k));
        return y.terminal() * y.terminal();
    });
    auto cdf = [&](double x) { return cir_transition_cdf(ctx.params, c.start, c.grid.T, x); };
    const TestResult ks = ks_test(r_t, cdf, c.options.level);
    const Summary s = summarize(r_t);
    auto& rep = ctx.report;
    rep.add_metric("ks_distance", ks.statistic);
    rep.add_metric("ks_p_value", ks.p_value);
    rep.add_metric("mean_R_T", s.mean, s.se);
    rep.add_metric("target_mean", cir_moments(ctx.params, c.start, c.grid.T).mean);
    rep.add_criterion("ks_distance", ks.statistic <= c.options.abs_tol, ks.statistic, 0.0,
                      "KS distance to the noncentral chi-squared law <= " + fmt(c.options.abs_tol));
    rep.tables["terminal-cdf"] = terminal_cdf_table(r_t, cdf);
}

void run_stationary_skew(Context& ctx) {
    const auto& c = ctx.config;
    require(constant_curve(ctx.curve), Errc::config_invalid,
            "$.curve: stationary-skew needs a constant barrier");
    require(ctx.params.b() > 0.0, Errc::config_invalid, "$.params.b: stationary-skew needs b > 0");
    const double lam = ctx.curve.lambda(0.0);
    const double c2 = lam * lam;
    const Path y = simulate_y_path(ctx.params, ctx.curve, ctx.y0(), c.grid, c.scheme, derive_seed(ctx.seed, 0));
    std::vector<double> r(y.values.size());
    std::transform(y.values.begin(), y.values.end(), r.begin(), [](double v) { return v * v; });
    const auto burn = static_cast<std::size_t>(std::floor(c.options.burn_in_fraction * static_cast<double>(c.grid.n_steps)));
    const std::vector<double> samples = burn_and_thin(r, burn, c.options.thin);
    StationaryTestOptions opts;
    opts.bins = c.options.bins;
    opts.level = c.options.level;
    const StationaryTestResult st = stationary_test(samples, ctx.params, c2, opts);

    auto& rep = ctx.report;
    rep.add_metric("n_samples", static_cast<double>(samples.size()));
    rep.add_metric("chi2_statistic", st.chi2.statistic);
    rep.add_metric("chi2_dof", static_cast<double>(st.bins - 1));
    rep.add_metric("chi2_p_value", st.chi2.p_value);
    rep.add_metric("chi2_rao_scott_scale", st.scale);
    rep.add_metric("chi2_rao_scott_dof", st.dof);
    rep.add_metric("chi2_p_value_uncorrected", st.naive_p_value);
    rep.add_metric("jump_ratio", st.jump_ratio);
    rep.add_metric("jump_target", st.jump_target);
    rep.add_metric("zero_violations", static_cast<double>(y.zero_violations));
    rep.add_criterion("chi2_gof", st.chi2.pass, st.chi2.p_value, c.options.level,
                      "chi-squared p-value > " + fmt(c.options.level) + " on " + std::to_string(st.bins) +
                          " equal-probability bins, Rao-Scott corrected");
    const double rel = std::abs(st.jump_ratio / st.jump_target - 1.0);
    rep.add_criterion("jump_ratio", std::isfinite(rel) && rel <= c.options.rel_tol, st.jump_ratio, st.jump_target,
                      "|ratio / target - 1| <= " + fmt(c.options.rel_tol));
    Table hist{{"x", "empirical", "target"}, {}};
    for (const auto& row : st.histogram) hist.rows.push_back({row.x, row.empirical, row.target});
    rep.tables["stationary-hist"] = hist;
}

struct PathRatios {
    double r_up = 0.0;
    double r_low = 0.0;
    double occupation = 0.0;
    double tanaka = 0.0;
    bool touched = false;
};

Table local_time_table(const LocalTimeEstimate& est, std::size_t max_rows) {
    Table t{{"t", "upper", "lower", "symmetric"}, {}};
    const std::size_t n = est.times.size();
    const std::size_t stride = std::max<std::size_t>(1, n / max_rows);
    for (std::size_t k = 0; k < n; k += stride)
        t.rows.push_back({est.times[k], est.upper[k], est.lower[k], est.symmetric[k]});
    if ((n - 1) % stride != 0) t.rows.push_back({est.times[n - 1], est.upper[n - 1], est.lower[n - 1], est.symmetric[n - 1]});
    return t;
}

void run_localtime_ratios(Context& ctx) {
    const auto& c = ctx.config;
    const double p = ctx.params.p();
    auto barrier = [&](double t) { return ctx.curve.lambda(t); };
    auto& rep = ctx.report;
    Table ratios{{"n_steps", "dt", "r_up", "r_up_se", "r_low", "r_low_se", "error"}, {}};
    std::vector<double> errors;
    const auto levels = step_levels(ctx);
    for (double lv : levels) {
        const auto n = static_cast<std::size_t>(lv);
        const GridSpec grid = ctx.grid(n);
        const auto per_path = parallel_map(c.n_paths, ctx.threads, [&](std::size_t k) {
            const Path y = simulate_y_path(ctx.params, ctx.curve, ctx.y0(), grid, c.scheme, derive_seed(ctx.seed, k));
            const LocalTimeEstimate occ = occupation_both(y, barrier, default_eps(y));
            const LocalTimeEstimate tan = tanaka_residual(y, barrier);
            PathRatios out;
            out.occupation = occ.symmetric.back();
            out.tanaka = tan.symmetric.back();
            if (out.occupation > 0.0) {
                const RatioPair r = relation_ratios(occ, p);
                out.r_up = r.r_up;
                out.r_low = r.r_low;
                out.touched = true;
            }
            return out;
        });
        std::vector<double> up, low, cross;
        for (const auto& r : per_path) {
            if (!r.touched) continue;
            up.push_back(r.r_up);
            low.push_back(r.r_low);
            if (r.occupation > 0.1) cross.push_back(std::abs(r.tanaka - r.occupation) / r.occupation);
        }
        require(!up.empty(), Errc::zero_local_time, "no path touched the barrier");
        const Summary su = summarize(up), sl = summarize(low), sc = summarize(cross);
        const double err = std::max(std::abs(su.mean / (2.0 * p) - 1.0), std::abs(sl.mean / (2.0 * (1.0 - p)) - 1.0));
        errors.push_back(err);
        const std::string tag = "_n" + std::to_string(n);
        rep.add_metric("r_up" + tag, su.mean, su.se);
        rep.add_metric("r_low" + tag, sl.mean, sl.se);
        rep.add_metric("relative_error" + tag, err);
        rep.add_metric("tanaka_vs_occupation" + tag, sc.mean, sc.se);
        rep.add_metric("paths_without_contact" + tag, static_cast<double>(c.n_paths - up.size()));
        ratios.rows.push_back({lv, c.grid.T / lv, su.mean, su.se, sl.mean, sl.se, err});
        if (lv == levels.back()) {
            rep.add_criterion("r_up", std::abs(su.mean / (2.0 * p) - 1.0) <= c.options.rel_tol, su.mean, 2.0 * p,
                              "|r_up / 2p - 1| <= " + fmt(c.options.rel_tol) + " at n_steps = " + std::to_string(n));
            rep.add_criterion("r_low", std::abs(sl.mean / (2.0 * (1.0 - p)) - 1.0) <= c.options.rel_tol, sl.mean,
                              2.0 * (1.0 - p),
                              "|r_low / 2(1-p) - 1| <= " + fmt(c.options.rel_tol) + " at n_steps = " + std::to_string(n));
        }
    }
    if (errors.size() > 1) {
        bool decreasing = true;
        for (std::size_t i = 1; i < errors.size(); ++i) decreasing = decreasing && errors[i] < errors[i - 1];
        rep.add_criterion("error_decreases", decreasing, errors.back(), errors[errors.size() - 2],
                          "relative error strictly decreases under dt refinement");
    }
    rep.tables["ratios"] = ratios;

    const std::size_t n_fine = static_cast<std::size_t>(levels.back());
    if (c.options.export_paths > 0) {
        const Path y = simulate_y_path(ctx.params, ctx.curve, ctx.y0(), ctx.grid(n_fine), c.scheme, derive_seed(ctx.seed, 0));
        rep.tables["localtime"] = local_time_table(occupation_both(y, barrier, default_eps(y)), 2000);
    }
}

void run_relloc_identity(Context& ctx) {
    const auto& c = ctx.config;
    auto& rep = ctx.report;
    Table table{{"n_steps", "dt", "mean_residual", "std_error", "mean_A", "mean_B"}, {}};
    std::vector<double> means;
    const auto levels = step_levels(ctx);
    for (double lv : levels) {
        const auto n = static_cast<std::size_t>(lv);
        const GridSpec grid = ctx.grid(n);
        const auto per_path = parallel_map(c.n_paths, ctx.threads, [&](std::size_t k) {
            const Path y = simulate_y_path(ctx.params, ctx.curve, ctx.y0(), grid, c.scheme, derive_seed(ctx.seed, k));
            return check_relloc(square_path(y), y, ctx.curve, default_eps(y));
        });
        std::vector<double> res, a, b;
        for (const auto& r : per_path) {
            res.push_back(r.residual);
            a.push_back(r.a);
            b.push_back(r.b);
        }
        const Summary s = summarize(res);
        means.push_back(s.mean);
        const std::string tag = "_n" + std::to_string(n);
        rep.add_metric("mean_residual" + tag, s.mean, s.se);
        rep.add_metric("mean_A" + tag, summarize(a).mean);
        rep.add_metric("mean_B" + tag, summarize(b).mean);
        table.rows.push_back({lv, c.grid.T / lv, s.mean, s.se, summarize(a).mean, summarize(b).mean});
        if (lv == levels.back()) {
            rep.add_criterion("mean_residual", s.mean <= c.options.rel_tol, s.mean, 0.0,
                              "mean relative residual <= " + fmt(c.options.rel_tol) + " at n_steps = " + std::to_string(n));
        }
    }
    if (means.size() > 1) {
        bool decreasing = true;
        for (std::size_t i = 1; i < means.size(); ++i) decreasing = decreasing && means[i] < means[i - 1];
        rep.add_criterion("residual_decreases", decreasing, means.back(), means[means.size() - 2],
                          "mean residual strictly decreases under dt refinement");
    }
    rep.tables["relloc"] = table;
}

void run_girsanov(Context& ctx) {
    const auto& c = ctx.config;
    const double T = c.grid.T;
    const double shift = ctx.curve.gamma(T);
    const double x0 = ctx.y0() - ctx.curve.gamma(0.0);
    struct Sample {
        double log_w, payoff, w_t;
    };
    const auto xs = parallel_map(c.n_paths, ctx.threads, [&](std::size_t k) {
        const Path x = simulate_x_path(ctx.params, ctx.curve, x0, c.grid, c.scheme, derive_seed(ctx.seed, k));
        const GirsanovWeight w = girsanov_weight(x, ctx.curve, ctx.params, T);
        const std::vector<double> wb = shifted_brownian(x, ctx.curve, ctx.params);
        return Sample{w.log_weight, std::exp(-(x.terminal() + shift)), wb.back()};
    });
    const std::uint64_t aux = derive_seed(ctx.seed, kAuxStream);
    const auto direct = parallel_map(c.n_paths, ctx.threads, [&](std::size_t k) {
        const Path y = simulate_y_path(ctx.params, ctx.curve, ctx.y0(), c.grid, c.scheme, derive_seed(aux, k));
        return std::exp(-y.terminal());
    });
    std::vector<double> lw, f, wt, wt2;
    for (const auto& s : xs) {
        lw.push_back(s.log_w);
        f.push_back(s.payoff);
        wt.push_back(s.w_t);
        wt2.push_back(s.w_t * s.w_t);
    }
    const ReweightedEstimate rw = reweighted_from_samples(lw, f);
    const ReweightedEstimate m1 = reweighted_from_samples(lw, wt);
    const ReweightedEstimate m2 = reweighted_from_samples(lw, wt2);
    const Summary d = summarize(direct);

    auto& rep = ctx.report;
    rep.add_metric("mean_weight", rw.mean_weight, rw.mean_weight_se);
    rep.add_metric("ess", rw.ess);
    rep.add_metric("reweighted_estimate", rw.estimate, rw.std_error);
    rep.add_metric("reweighted_unnormalized", rw.unnormalized, rw.unnormalized_se);
    rep.add_metric("direct_estimate", d.mean, d.se);
    rep.add_metric("weighted_mean_W_T", m1.estimate, m1.std_error);
    rep.add_metric("weighted_second_moment_W_T", m2.estimate, m2.std_error);
    rep.add_criterion("martingale", std::abs(rw.mean_weight - 1.0) <= 3.0 * rw.mean_weight_se, rw.mean_weight, 1.0,
                      "|mean weight - 1| <= 3 SE (SE = " + fmt(rw.mean_weight_se) + ")");
    const double gap = std::abs(rw.estimate - d.mean);
    const double half_widths = 1.96 * (rw.std_error + d.se);
    rep.add_criterion("ci_overlap", gap <= half_widths, rw.estimate, d.mean,
                      "95% intervals overlap: |reweighted - direct| <= 1.96 (SE_rw + SE_direct) = " + fmt(half_widths));
    rep.add_criterion("shifted_bm_mean", std::abs(m1.estimate) <= 3.0 * m1.std_error, m1.estimate, 0.0,
                      "weighted E[W_T] within 3 SE of 0");
    rep.add_criterion("shifted_bm_variance", std::abs(m2.estimate - T) <= 3.0 * m2.std_error, m2.estimate, T,
                      "weighted E[W_T^2] within 3 SE of T");
}

void run_pde_cross_check(Context& ctx) {
    const auto& c = ctx.config;
    require(!c.options.x0_list.empty(), Errc::config_invalid, "$.options.x0_list: needs at least one start");
    const double T = c.grid.T;
    auto payoff = [](double x) { return std::min(x, 2.0); };
    auto barrier2 = [&](double t) {
        const double l = ctx.curve.lambda(t);
        return l * l;
    };
    McConfig mc;
    mc.n_paths = c.n_paths;
    mc.n_steps = c.grid.n_steps;
    mc.seed = ctx.seed;
    mc.threads = ctx.threads;
    mc.scheme = c.scheme;
    const PdeGrid g1 = c.options.pde;
    const CompareReport cmp = compare_mc_pde(ctx.params, ctx.curve, payoff, T, c.options.x0_list, mc, g1, c.options.abs_tol);

    PdeGrid g2 = g1, g3 = g1;
    g2.n_x = 2 * g1.n_x - 1;
    g2.n_t = 2 * g1.n_t;
    g3.n_x = 2 * g2.n_x - 1;
    g3.n_t = 2 * g2.n_t;
    PdeGrid g1h = g1;
    g1h.store_history = true;
    const PdeSolution s1 = solve_backward(ctx.params, barrier2, payoff, T, g1h);
    const PdeSolution s2 = solve_backward(ctx.params, barrier2, payoff, T, g2);
    const PdeSolution s3 = solve_backward(ctx.params, barrier2, payoff, T, g3);
    RawParams half = ctx.params.raw();
    half.p = 0.5;
    const PdeSolution sym = solve_backward(validate_params(half), barrier2, payoff, T, g1);

    auto& rep = ctx.report;
    Table table{{"x0", "pde", "mc", "std_error", "diff", "grid_bias"}, {}};
    double worst_factor = 0.0;
    bool sensitivity = true;
    for (const auto& row : cmp.rows) {
        const std::string tag = "_x0_" + fmt(row.x0);
        rep.add_metric("pde" + tag, row.pde);
        rep.add_metric("mc" + tag, row.mc, row.std_error);
        rep.add_metric("grid_bias" + tag, row.grid_bias);
        const double tol = c.options.abs_tol + 3.0 * row.std_error;
        rep.add_criterion("pde_vs_mc" + tag, std::abs(row.diff) <= tol, row.mc, row.pde,
                          "|u_FD - MC| <= " + fmt(c.options.abs_tol) + " + 3 SE = " + fmt(tol));
        table.rows.push_back({row.x0, row.pde, row.mc, row.std_error, row.diff, row.grid_bias});
        const double d1 = s2.value_at(row.x0) - s1.value_at(row.x0);
        const double d2 = s3.value_at(row.x0) - s2.value_at(row.x0);
        const double factor = d1 == 0.0 ? 0.0 : std::abs(d2 / d1);
        rep.add_metric("refinement_factor" + tag, factor);
        worst_factor = std::max(worst_factor, factor);
        sensitivity = sensitivity && (ctx.params.p() <= 0.5 || s1.value_at(row.x0) > sym.value_at(row.x0));
    }
    rep.add_criterion("refinement_factor", worst_factor <= c.options.refinement_factor_max, worst_factor,
                      c.options.refinement_factor_max,
                      "change ratio under halving dx and dt <= " + fmt(c.options.refinement_factor_max));
    const bool max_ok = s1.max_principle_ok && s2.max_principle_ok && s3.max_principle_ok;
    rep.add_criterion("max_principle", max_ok, max_ok ? 1.0 : 0.0, 1.0, "min(f) <= u <= max(f) on every grid");
    rep.add_criterion("p_sensitivity", sensitivity, sensitivity ? 1.0 : 0.0, 1.0,
                      "u(0, x0) increases from p = 1/2 to p for the nondecreasing payoff");
    rep.add_metric("max_residual", std::max({s1.max_residual, s2.max_residual, s3.max_residual}));
    rep.tables["pde-mc"] = table;

    Table sol{{"t", "x", "u"}, {}};
    const std::size_t xs = std::max<std::size_t>(1, g1.n_x / 200);
    const std::size_t ts = std::max<std::size_t>(1, g1.n_t / 20);
    for (std::size_t m = 0; m < s1.history.size(); m += ts)
        for (std::size_t i = 0; i < s1.x.size(); i += xs) sol.rows.push_back({s1.times[m], s1.x[i], s1.history[m][i]});
    rep.tables["pde-solution"] = sol;
}

void run_skew_occupation(Context& ctx) {
    const auto& c = ctx.config;
    const double T = c.grid.T;
    struct Out {
        double above;
        double min_value;
    };
    const auto res = parallel_map(c.n_paths, ctx.threads, [&](std::size_t k) {
        const Path y = simulate_y_path(ctx.params, ctx.curve, ctx.y0(), c.grid, c.scheme, derive_seed(ctx.seed, k));
        return Out{y.terminal() > ctx.curve.lambda(T) ? 1.0 : 0.0, *std::min_element(y.values.begin(), y.values.end())};
    });
    std::vector<double> above;
    double min_value = std::numeric_limits<double>::infinity();
    for (const auto& r : res) {
        above.push_back(r.above);
        min_value = std::min(min_value, r.min_value);
    }
    const Summary s = summarize(above);
    const double var = 0.25 * ctx.params.sigma() * ctx.params.sigma() * T;
    const double oracle = skew_bm_prob_above(ctx.params.p(), var, ctx.y0() - ctx.curve.lambda(0.0));
    auto& rep = ctx.report;
    rep.add_metric("fraction_above", s.mean, s.se);
    rep.add_metric("skew_bm_oracle", oracle);
    rep.add_metric("min_value", min_value);
    rep.add_criterion("fraction_above", std::abs(s.mean - oracle) <= c.options.abs_tol, s.mean, oracle,
                      "|fraction - oracle| <= " + fmt(c.options.abs_tol));
    rep.add_criterion("positivity", min_value >= 0.0, min_value, 0.0, "every Y value >= 0");
}

void run_dsr_demo(Context& ctx) {
    const auto& c = ctx.config;
    require(ctx.params.dsr_c().has_value(), Errc::config_invalid, "$.params.dsr_c: dsr-demo needs dsr_c");
    const double p = ctx.params.p();
    auto barrier2 = [&](double t) {
        const double l = ctx.curve.lambda(t);
        return l * l;
    };
    auto& rep = ctx.report;

    // local-time ratios of Z at lambda^2, band 2 lambda eps
    const auto per_path = parallel_map(c.n_paths, ctx.threads, [&](std::size_t k) {
        const Path z = simulate_dsr_path(ctx.params, ctx.curve, c.start, c.grid, c.scheme, derive_seed(ctx.seed, k));
        const double eps = 2.0 * std::max(ctx.curve.lambda(0.0), 1e-3) * default_eps(z);
        const LocalTimeEstimate occ = occupation_both(z, barrier2, eps);
        if (occ.symmetric.back() <= 0.0) return RatioPair{-1.0, -1.0};
        return relation_ratios(occ, p);
    });
    std::vector<double> up, low;
    for (const auto& r : per_path) {
        if (r.r_up < 0.0) continue;
        up.push_back(r.r_up);
        low.push_back(r.r_low);
    }
    require(!up.empty(), Errc::zero_local_time, "no DSR path touched the barrier");
    const Summary su = summarize(up), sl = summarize(low);
    rep.add_metric("r_up", su.mean, su.se);
    rep.add_metric("r_low", sl.mean, sl.se);
    rep.add_criterion("r_up", std::abs(su.mean / (2.0 * p) - 1.0) <= c.options.rel_tol, su.mean, 2.0 * p,
                      "|r_up / 2p - 1| <= " + fmt(c.options.rel_tol));
    rep.add_criterion("r_low", std::abs(sl.mean / (2.0 * (1.0 - p)) - 1.0) <= c.options.rel_tol, sl.mean,
                      2.0 * (1.0 - p), "|r_low / 2(1-p) - 1| <= " + fmt(c.options.rel_tol));

    // moment self-consistency at p = 1/2:
    // E[Z_T - Z_0 - (sigma^2/4) int (delta - c sqrt(Z)) ds] = 0
    RawParams half = ctx.params.raw();
    half.p = 0.5;
    const ModelParams sym = validate_params(half);
    const GridSpec grid{1.0, 1024};
    const Curve flat = make_curve(c.curve, grid.T);
    const double s2 = sym.sigma() * sym.sigma();
    const double cc = *sym.dsr_c();
    const std::uint64_t aux = derive_seed(ctx.seed, kAuxStream);
    const auto defect = parallel_map(20000, ctx.threads, [&](std::size_t k) {
        const Path z = simulate_dsr_path(sym, flat, c.start, grid, c.scheme, derive_seed(aux, k));
        double integral = 0.0;
        for (std::size_t j = 0; j < grid.n_steps; ++j) integral += (sym.delta() - cc * std::sqrt(z.values[j])) * grid.dt();
        return z.terminal() - z.values.front() - 0.25 * s2 * integral;
    });
    const Summary sd = summarize(defect);
    rep.add_metric("moment_defect", sd.mean, sd.se);
    rep.add_criterion("moment_self_consistency", std::abs(sd.mean) <= 3.0 * sd.se, sd.mean, 0.0,
                      "|E[Z_T - Z_0 - (sigma^2/4) int (delta - c sqrt Z) ds]| <= 3 SE at p = 1/2");
}

struct RandomCurve {
    Curve curve;
    double lambda_max;
};

RandomCurve random_curve(Rng& rng, double T) {
    // a0 + sum a_i sin(w_i t + phi_i) + s |t - t*|, positive by construction
    std::array<double, 3> a{}, w{}, phi{};
    double a0 = 0.1 + 0.9 * rng.uniform();
    for (int i = 0; i < 3; ++i) {
        a[i] = (rng.uniform() - 0.5) * 1.5;
        w[i] = 0.2 + 3.0 * rng.uniform();
        phi[i] = 2.0 * std::numbers::pi * rng.uniform();
        a0 += std::abs(a[i]);
    }
    const double s = (rng.uniform() - 0.5) * 1.0;
    const double kink = T * rng.uniform();
    a0 += std::abs(s) * T;
    auto f = [=](double t) {
        double v = a0 + s * std::abs(t - kink);
        for (int i = 0; i < 3; ++i) v += a[i] * std::sin(w[i] * t + phi[i]);
        return v;
    };
    auto df = [=](double t) {
        double v = s * (t > kink ? 1.0 : (t < kink ? -1.0 : 0.0));
        for (int i = 0; i < 3; ++i) v += a[i] * w[i] * std::cos(w[i] * t + phi[i]);
        return v;
    };
    Curve curve = decompose_curve(f, ScalarFn(df), T, 0.0, "random");
    double lmax = 0.0;
    for (int i = 0; i <= 200; ++i) lmax = std::max(lmax, f(T * i / 200.0));
    return {std::move(curve), lmax};
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

RegimeReport monotonicity_on(const ModelParams& params, const Curve& curve, double lambda_max) {
    const double T = curve.t_max();
    const double gmax = curve.gamma(T);
    return check_monotonicity(params, curve, linspace(0.0, T, 41), linspace(-gmax - 0.5, lambda_max + 1.0, 161));
}

void run_regime_check(Context& ctx) {
    const auto& c = ctx.config;
    auto& rep = ctx.report;

    auto rejected = [](RawParams raw, Errc code, const std::string& phrase, std::string& message) {
        try {
            validate_params(raw);
        } catch (const Error& e) {
            message = e.what();
            return e.code() == code && message.find(phrase) != std::string::npos;
        }
        message = "accepted";
        return false;
    };
    std::string msg;
    RawParams p12{2.0, 1.0, 0.0, 1.2, std::nullopt};
    const bool gate_p = rejected(p12, Errc::p_out_of_range, "identically zero", msg);
    rep.notes.push_back("p = 1.2: " + msg);
    rep.add_criterion("reject_p_1_2", gate_p, gate_p ? 1.0 : 0.0, 1.0, "POutOfRange citing nonexistence");
    RawParams d05{2.0, 0.5, 0.0, 0.5, std::nullopt};
    const bool gate_d = rejected(d05, Errc::delta_below_one, "no longer in the semimartingale", msg);
    rep.notes.push_back("delta = 0.5: " + msg);
    rep.add_criterion("reject_delta_0_5", gate_d, gate_d ? 1.0 : 0.0, 1.0, "DeltaBelowOne citing the regime");
    RawParams p0{2.0, 1.0, 0.0, 0.0, std::nullopt}, p1{2.0, 1.0, 0.0, 1.0, std::nullopt};
    std::string msg0, msg1;
    const bool gate_ext = rejected(p0, Errc::p_out_of_range, "extreme cases", msg0) &&
                          rejected(p1, Errc::p_out_of_range, "extreme cases", msg1);
    rep.add_criterion("reject_p_extremes", gate_ext, gate_ext ? 1.0 : 0.0, 1.0, "p = 0 and p = 1 rejected");

    // the configured model
    double lmax = 0.0;
    for (double t : linspace(0.0, c.grid.T, 201)) lmax = std::max(lmax, ctx.curve.lambda(t));
    const RegimeReport own = monotonicity_on(ctx.params, ctx.curve, lmax);
    rep.add_metric("config_violations", static_cast<double>(own.failures.size()));
    for (const auto& m : own.messages) rep.notes.push_back("config: " + m);

    // random curves with p in (1/2, 1)
    Rng rng(derive_seed(ctx.seed, kAuxStream));
    std::size_t ok = 0;
    for (std::size_t i = 0; i < c.options.random_curves; ++i) {
        const RandomCurve rc = random_curve(rng, c.grid.T);
        RawParams raw;
        raw.sigma = 2.0;
        raw.delta = 1.0 + 2.0 * rng.uniform();
        raw.b = rng.uniform();
        raw.p = 0.51 + 0.48 * rng.uniform();
        if (monotonicity_on(validate_params(raw), rc.curve, rc.lambda_max).monotone_ok) ++ok;
    }
    rep.add_metric("random_curves_monotone", static_cast<double>(ok));
    rep.add_criterion("random_curves_monotone", ok == c.options.random_curves, static_cast<double>(ok),
                      static_cast<double>(c.options.random_curves), "every random curve with p in (1/2,1) passes");

    // p < 1/2 with decreasing lambda must be flagged; nondecreasing lambda must not
    RawParams low{2.0, 1.0, 0.0, 0.3, std::nullopt};
    const ModelParams mp = validate_params(low);
    CurveSpec dec;
    dec.kind = "linear";
    dec.args = {{"value", 2.0}, {"slope", -1.0}};
    const Curve down = make_curve(dec, 1.5);
    const RegimeReport flagged = monotonicity_on(mp, down, 2.0);
    rep.add_metric("decreasing_violations", static_cast<double>(flagged.failures.size()));
    rep.add_criterion("decreasing_flagged", !flagged.monotone_ok, flagged.monotone_ok ? 0.0 : 1.0, 1.0,
                      "p = 0.3 with lambda(t) = 2 - t reported non-monotone");
    CurveSpec inc;
    inc.kind = "linear";
    inc.args = {{"value", 1.0}, {"slope", 1.0}};
    const RegimeReport rising = monotonicity_on(mp, make_curve(inc, 1.5), 2.5);
    rep.add_criterion("increasing_accepted", rising.monotone_ok, rising.monotone_ok ? 1.0 : 0.0, 1.0,
                      "p = 0.3 with lambda(t) = 1 + t reported monotone");
    Table wit{{"s", "t", "x", "rho_s", "rho_t"}, {}};
    for (std::size_t i = 0; i < std::min<std::size_t>(200, flagged.failures.size()); ++i) {
        const auto& f = flagged.failures[i];
        wit.rows.push_back({f.s, f.t, f.x, f.rho_s, f.rho_t});
    }
    rep.tables["monotonicity"] = wit;
}

using Runner = void (*)(Context&);

Runner runner_for(const std::string& name) {
    if (name == "cir-baseline") return run_cir_baseline;
    if (name == "besq-law") return run_besq_law;
    if (name == "stationary-skew") return run_stationary_skew;
    if (name == "localtime-ratios") return run_localtime_ratios;
    if (name == "relloc-identity") return run_relloc_identity;
    if (name == "girsanov-consistency") return run_girsanov;
    if (name == "pde-cross-check") return run_pde_cross_check;
    if (name == "skew-occupation") return run_skew_occupation;
    if (name == "dsr-demo") return run_dsr_demo;
    if (name == "regime-check") return run_regime_check;
    fail(Errc::config_invalid, "$.experiment: unknown experiment '" + name + "'");
}

double curve_horizon(const ExperimentConfig& c) {
    double T = c.grid.T;
    if (c.experiment == "regime-check") T = std::max(T, 1.5);
    return T;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    validate_config(config);
    const auto started = std::chrono::steady_clock::now();
    ExperimentReport report;
    report.experiment = config.experiment;
    report.config_json = config_to_json(config);

    const unsigned threads = resolve_threads(options.threads > 0 ? options.threads : config.threads.value_or(0));
    Context ctx{config, validate_params(config.params), make_curve(config.curve, curve_horizon(config)), threads,
                *config.seed, report};
    if (config.experiment != "regime-check") {
        const double T = config.grid.T;
        std::vector<double> ts = linspace(0.0, T, 21);
        double lmax = 0.0;
        for (double t : ts) lmax = std::max(lmax, ctx.curve.lambda(t));
        const RegimeReport regime = check_monotonicity(ctx.params, ctx.curve, ts,
                                                       linspace(-ctx.curve.gamma(T) - 0.5, lmax + 1.0, 81));
        if (!regime.monotone_ok) {
            report.notes.push_back("warning: regime unverified, " + regime.messages.front());
        }
    }
    runner_for(config.experiment)(ctx);
    report.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    if (options.write_files) {
        const std::filesystem::path dir = options.out_dir.value_or(config.output_dir);
        std::filesystem::create_directories(dir);
        write_report(report, dir / "report.json");
        emit_all_plot_data(report, dir);
        if (config.dump_paths > 0 && config.experiment != "regime-check") {
            std::filesystem::create_directories(dir / "paths");
            for (std::size_t k = 0; k < config.dump_paths; ++k) {
                const Path y = simulate_y_path(ctx.params, ctx.curve, ctx.y0(), config.grid, config.scheme,
                                               derive_seed(ctx.seed, k));
                write_path_dump(y, dir / "paths" / ("path_" + std::to_string(k) + ".skwd"));
            }
        }
    }
    return report;
}

}  // namespace skewdiff
