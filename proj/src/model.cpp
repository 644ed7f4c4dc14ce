#include "skewdiff/model.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <sstream>

#include "skewdiff/error.hpp"

namespace skewdiff {

namespace {

std::string num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

std::optional<double> ModelParams::mean_reversion_level() const noexcept {
    if (b_ > 0.0) return delta_ / b_;
    return std::nullopt;
}

ModelParams validate_params(const RawParams& raw) {
    require(raw.sigma > 0.0 && std::isfinite(raw.sigma), Errc::sigma_nonpositive,
            "sigma = " + num(raw.sigma) + ": sigma must be positive and finite");
    require(raw.delta >= 1.0 && std::isfinite(raw.delta), Errc::delta_below_one,
            "delta = " + num(raw.delta) +
                ": for delta < 1 the process is no longer in the semimartingale regime "
                "((delta-1)/Y is not locally integrable and the drift needs principal "
                "values); only delta >= 1 is supported");
    require(raw.b >= 0.0 && std::isfinite(raw.b), Errc::b_negative,
            "b = " + num(raw.b) + ": the mean-reversion coefficient must be nonnegative");
    if (!(raw.p > 0.0 && raw.p < 1.0)) {
        if (std::abs(raw.p) > 1.0) {
            fail(Errc::p_out_of_range,
                 "p = " + num(raw.p) +
                     ": for |p| > 1 every local time of the skew equation is identically "
                     "zero, which contradicts the nonvanishing barrier measure, so no "
                     "solution exists; p must lie in (0,1)");
        }
        if (raw.p == 0.0 || raw.p == 1.0) {
            fail(Errc::p_out_of_range,
                 "p = " + num(raw.p) +
                     ": the extreme cases p = 0 and p = 1 are excluded, no solution is "
                     "constructed there; p must lie strictly inside (0,1)");
        }
        fail(Errc::p_out_of_range, "p = " + num(raw.p) + ": p must lie in the open interval (0,1)");
    }
    if (raw.dsr_c) {
        require(*raw.dsr_c >= 0.0 && std::isfinite(*raw.dsr_c), Errc::dsr_c_negative,
                "dsr_c = " + num(*raw.dsr_c) + ": the DSR drift coefficient must be nonnegative");
    }
    ModelParams params;
    params.sigma_ = raw.sigma;
    params.delta_ = raw.delta;
    params.b_ = raw.b;
    params.p_ = raw.p;
    params.dsr_c_ = raw.dsr_c;
    return params;
}

double reference_density(const ModelParams& params, const Curve& curve, double t, double x) {
    const double gamma = curve.gamma(t);
    if (x < -gamma) return 0.0;
    const double weight = x < curve.beta(t) ? 1.0 - params.p() : params.p();
    return weight * std::pow(std::abs(x + gamma), params.delta() - 1.0) *
           std::exp(-0.5 * params.b() * x * x);
}

RegimeReport check_monotonicity(const ModelParams& params, const Curve& curve,
                                const std::vector<double>& t_grid,
                                const std::vector<double>& x_grid) {
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        require(t_grid[i - 1] <= t_grid[i], Errc::precondition, "t_grid must be sorted");
    }
    RegimeReport report;
    std::vector<double> rho(t_grid.size());
    std::vector<double> edge(t_grid.size());
    for (std::size_t i = 0; i < t_grid.size(); ++i) edge[i] = -curve.gamma(t_grid[i]);
    for (double x : x_grid) {
        for (std::size_t i = 0; i < t_grid.size(); ++i)
            rho[i] = reference_density(params, curve, t_grid[i], x);
        for (std::size_t i = 0; i < t_grid.size(); ++i) {
            if (x < edge[i]) continue;
            for (std::size_t j = i + 1; j < t_grid.size(); ++j) {
                if (rho[i] > rho[j] * (1.0 + kMonotonicityTol)) {
                    report.failures.push_back({t_grid[i], t_grid[j], x, rho[i], rho[j]});
                }
            }
        }
    }
    report.monotone_ok = report.failures.empty();
    report.valid = report.monotone_ok;
    if (report.monotone_ok) {
        report.messages.emplace_back("rho(., x) is nondecreasing in t on the checked grid");
    } else {
        const auto& w = report.failures.front();
        std::ostringstream os;
        os << report.failures.size() << " violations of rho(s,x) <= rho(t,x); first at s=" << w.s
           << ", t=" << w.t << ", x=" << w.x << " (" << w.rho_s << " > " << w.rho_t
           << "); the existence theory does not cover this regime";
        report.messages.push_back(os.str());
    }
    return report;
}

StationaryDensity::StationaryDensity(const ModelParams& params, double c)
    : delta_(params.delta()), b_(params.b()), p_(params.p()), c_(c), z_(0.0) {
    require(params.b() > 0.0, Errc::not_normalizable,
            "the invariant density is not normalizable for b = 0");
    require(c >= 0.0 && std::isfinite(c), Errc::precondition, "barrier level c must be >= 0");
    auto f = [this](double x) { return shape(x); };
    const double tol = 1e-12;
    boost::math::quadrature::exp_sinh<double> tail;
    double z = tail.integrate(f, c_, std::numeric_limits<double>::infinity(), tol);
    if (c_ > 0.0) {
        boost::math::quadrature::tanh_sinh<double> body;
        z += body.integrate(f, 0.0, c_, tol);
    }
    z_ = z;
}

double StationaryDensity::shape(double x) const {
    if (x < 0.0) return 0.0;
    const double weight = x < c_ ? 1.0 - p_ : p_;
    return weight * std::pow(x, 0.5 * delta_ - 1.0) * std::exp(-0.5 * b_ * x);
}

double StationaryDensity::operator()(double x) const { return shape(x) / z_; }

double StationaryDensity::cdf(double x) const {
    if (x <= 0.0) return 0.0;
    using boost::math::gamma_p;
    const double k = 0.5 * delta_;
    const double at_c = gamma_p(k, 0.5 * b_ * c_);
    const double below = (1.0 - p_) * gamma_p(k, 0.5 * b_ * std::min(x, c_));
    const double above = x > c_ ? p_ * (gamma_p(k, 0.5 * b_ * x) - at_c) : 0.0;
    const double total = (1.0 - p_) * at_c + p_ * (1.0 - at_c);
    return (below + above) / total;
}

double StationaryDensity::quantile(double u) const {
    require(u >= 0.0 && u <= 1.0, Errc::precondition, "quantile level must be in [0,1]");
    if (u == 0.0) return 0.0;
    double lo = 0.0, hi = std::max(1.0, c_);
    while (cdf(hi) < u && hi < 1e300) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < u ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double stationary_density_constant_barrier(const ModelParams& params, double c, double x) {
    return StationaryDensity(params, c)(x);
}

}  // namespace skewdiff
