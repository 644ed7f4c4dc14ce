#include "skewdiff/local_time.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "skewdiff/error.hpp"

namespace skewdiff {

namespace {

std::vector<double> grid_times(const Path& path) {
    std::vector<double> t(path.values.size());
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = path.grid.time(k);
    return t;
}

bool squared_frame(Frame f) { return f == Frame::R || f == Frame::Z_dsr || f == Frame::CIR_exact; }

// Band occupation with a per-step half-width eps_j; fills upper and lower.
template <class Eps>
void accumulate(const Path& path, const ScalarFn& barrier, Eps&& eps_at, bool want_upper,
                bool want_lower, LocalTimeEstimate& est) {
    const std::size_t n = path.values.size();
    const double dt = path.grid.dt();
    if (want_upper) est.upper.assign(n, 0.0);
    if (want_lower) est.lower.assign(n, 0.0);
    double up = 0.0, lo = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double t = path.grid.time(j);
        const double kappa = barrier(t);
        const double d = path.values[j] - kappa;
        const double eps = eps_at(t, kappa);
        const double mass = quadratic_variation_rate(path, j) * dt / eps;
        if (want_upper && d >= 0.0 && d < eps) up += mass;
        if (want_lower && d <= 0.0 && d > -eps) lo += mass;
        if (want_upper) est.upper[j + 1] = up;
        if (want_lower) est.lower[j + 1] = lo;
    }
}

}  // namespace

double quadratic_variation_rate(const Path& path, std::size_t j) {
    if (squared_frame(path.frame)) return path.sigma * path.sigma * path.values[j];
    return 0.25 * path.sigma * path.sigma;
}

double default_eps(const Path& path) { return 0.5 * path.sigma * std::sqrt(path.grid.dt()); }

LocalTimeEstimate occupation_upper(const Path& path, const ScalarFn& barrier, double eps) {
    require(eps > 0.0, Errc::precondition, "occupation band eps must be positive");
    LocalTimeEstimate est;
    est.times = grid_times(path);
    est.eps = eps;
    accumulate(path, barrier, [eps](double, double) { return eps; }, true, false, est);
    return est;
}

LocalTimeEstimate occupation_lower(const Path& path, const ScalarFn& barrier, double eps) {
    require(eps > 0.0, Errc::precondition, "occupation band eps must be positive");
    LocalTimeEstimate est;
    est.times = grid_times(path);
    est.eps = eps;
    accumulate(path, barrier, [eps](double, double) { return eps; }, false, true, est);
    return est;
}

LocalTimeEstimate occupation_both(const Path& path, const ScalarFn& barrier, double eps) {
    require(eps > 0.0, Errc::precondition, "occupation band eps must be positive");
    LocalTimeEstimate est;
    est.times = grid_times(path);
    est.eps = eps;
    accumulate(path, barrier, [eps](double, double) { return eps; }, true, true, est);
    est.symmetric.resize(est.upper.size());
    for (std::size_t k = 0; k < est.upper.size(); ++k)
        est.symmetric[k] = 0.5 * (est.upper[k] + est.lower[k]);
    return est;
}

LocalTimeEstimate tanaka_residual(const Path& path, const ScalarFn& barrier) {
    LocalTimeEstimate est;
    est.times = grid_times(path);
    est.method = LocalTimeMethod::tanaka_residual;
    const std::size_t n = path.values.size();
    est.symmetric.assign(n, 0.0);
    std::vector<double> kappa(n);
    for (std::size_t k = 0; k < n; ++k) kappa[k] = barrier(est.times[k]);
    // Steps with a recorded contact at this barrier are split at the
    // contact: X_j -> kappa_j with sgn(X_j - kappa_j), then kappa_j -> X_{j+1}
    // with sgn(0) = 0.
    std::vector<std::uint8_t> contact(n, 0);
    for (const auto& e : path.reflections) {
        if (e.step + 1 >= n) continue;
        const double implied = path.values[e.step + 1] - e.side * e.overshoot;
        if (std::abs(implied - kappa[e.step]) <= 1e-12 * std::max(1.0, std::abs(kappa[e.step])))
            contact[e.step] = 1;
    }
    const double start = std::abs(path.values[0] - kappa[0]);
    double integral = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double d = path.values[j] - kappa[j];
        const double sgn = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
        if (contact[j])
            integral -= std::abs(d);
        else
            integral += sgn * ((path.values[j + 1] - path.values[j]) - (kappa[j + 1] - kappa[j]));
        est.symmetric[j + 1] = std::abs(path.values[j + 1] - kappa[j + 1]) - start - integral;
    }
    return est;
}

RellocReport check_relloc(const Path& r_path, const Path& y_path, const Curve& curve, double eps) {
    require(r_path.frame == Frame::R && y_path.frame == Frame::Y, Errc::frame_mismatch,
            "check_relloc needs an R-frame path and its Y-frame source");
    require(r_path.values.size() == y_path.values.size() && r_path.grid.T == y_path.grid.T,
            Errc::frame_mismatch, "R and Y paths live on different grids");
    for (std::size_t k = 0; k < r_path.values.size(); ++k) {
        require(r_path.values[k] == y_path.values[k] * y_path.values[k], Errc::frame_mismatch,
                "R path is not the square of the Y path at step " + std::to_string(k));
    }
    require(eps > 0.0, Errc::precondition, "occupation band eps must be positive");

    auto lam = [&curve](double t) { return curve.lambda(t); };
    auto lam2 = [&curve](double t) {
        const double l = curve.lambda(t);
        return l * l;
    };
    LocalTimeEstimate a;
    accumulate(r_path, lam2,
               [&curve, eps](double t, double) { return std::max(2.0 * curve.lambda(t) * eps, eps * eps); },
               true, true, a);
    const LocalTimeEstimate y = occupation_both(y_path, lam, eps);

    RellocReport report;
    report.a = 0.5 * (a.upper.back() + a.lower.back());
    for (std::size_t j = 0; j + 1 < y.symmetric.size(); ++j)
        report.b += 2.0 * y_path.values[j] * (y.symmetric[j + 1] - y.symmetric[j]);
    report.residual = std::abs(report.a - report.b) /
                      std::max(report.a, std::numeric_limits<double>::min());
    if (report.a == 0.0 && report.b == 0.0) report.residual = 0.0;
    return report;
}

RatioPair relation_ratios(const LocalTimeEstimate& est, double p) {
    require(p > 0.0 && p < 1.0, Errc::precondition, "p must lie in (0,1)");
    require(!est.upper.empty() && !est.lower.empty(), Errc::precondition,
            "relation_ratios needs upper and lower local times");
    const double up = est.upper.back();
    const double lo = est.lower.back();
    const double sym = 0.5 * (up + lo);
    require(sym > 0.0, Errc::zero_local_time, "path never touched the barrier; ratios undefined");
    return {up / sym, lo / sym};
}

std::vector<double> markovian_from_symmetric(const LocalTimeEstimate& est, double p,
                                             const std::vector<std::uint8_t>& region_active) {
    require(p > 0.0 && p < 1.0, Errc::precondition, "p must lie in (0,1)");
    require(!est.symmetric.empty(), Errc::precondition, "estimate has no symmetric local time");
    require(region_active.size() + 1 >= est.symmetric.size(), Errc::precondition,
            "region indicator shorter than the path");
    std::vector<double> out(est.symmetric.size(), 0.0);
    for (std::size_t j = 0; j + 1 < out.size(); ++j) {
        const double inc = est.symmetric[j + 1] - est.symmetric[j];
        out[j + 1] = out[j] + (region_active[j] ? inc : inc / p);
    }
    return out;
}

void write_local_time_csv(const LocalTimeEstimate& est, const std::filesystem::path& file) {
    std::ofstream out(file);
    require(static_cast<bool>(out), Errc::io, "cannot write " + file.string());
    out.precision(17);
    out << "t,upper,lower,symmetric\n";
    auto at = [](const std::vector<double>& v, std::size_t k) { return k < v.size() ? v[k] : 0.0; };
    for (std::size_t k = 0; k < est.times.size(); ++k) {
        out << est.times[k] << ',' << at(est.upper, k) << ',' << at(est.lower, k) << ','
            << at(est.symmetric, k) << '\n';
    }
}

}  // namespace skewdiff
