#include "skewdiff/path.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "skewdiff/error.hpp"

namespace skewdiff {

std::string_view frame_name(Frame frame) noexcept {
    switch (frame) {
        case Frame::Y: return "Y";
        case Frame::X: return "X";
        case Frame::R: return "R";
        case Frame::Z_dsr: return "Z_dsr";
        case Frame::CIR_exact: return "CIR_exact";
    }
    return "?";
}

void check_grid(const GridSpec& grid) {
    require(std::isfinite(grid.T) && grid.T > 0.0, Errc::precondition, "grid horizon T must be positive");
    require(grid.n_steps > 0, Errc::precondition, "grid needs at least one step");
    require(grid.n_steps < (std::size_t{1} << 32), Errc::precondition, "grid has too many steps");
}

void check_scheme(const SchemeConfig& scheme) {
    require(std::isfinite(scheme.band_width) && scheme.band_width >= 0.0, Errc::precondition,
            "band_width must be a nonnegative number");
}

std::vector<double> Path::brownian_increments() const {
    const double scale = 0.5 * sigma * std::sqrt(grid.dt());
    std::vector<double> out(gauss.size());
    std::transform(gauss.begin(), gauss.end(), out.begin(), [scale](double g) { return scale * g; });
    return out;
}

namespace {

/// Barrier geometry of one step, frozen at t_k.
struct StepGeometry {
    double barrier;
    double lower;
    double offset;  // the singular drift term is evaluated at state + offset
    bool skew_active;
};

enum class DriftKind { mean_reverting, dsr };

template <class Geometry>
Path run_scheme(const ModelParams& params, Frame frame, double start, const GridSpec& grid,
                const SchemeConfig& scheme, std::uint64_t seed, DriftKind kind, Geometry&& geometry) {
    check_grid(grid);
    check_scheme(scheme);
    const std::size_t n = grid.n_steps;
    const double dt = grid.dt();
    const double sigma = params.sigma();
    const double half_sigma_sqrt_dt = 0.5 * sigma * std::sqrt(dt);
    const double a = 0.125 * sigma * sigma * (params.delta() - 1.0) * dt;
    const double cb = 0.125 * sigma * sigma * params.b() * dt;
    const double cc = kind == DriftKind::dsr ? 0.125 * sigma * sigma * params.dsr_c().value_or(0.0) * dt : 0.0;
    const double band = scheme.band_width * half_sigma_sqrt_dt;
    const double bridge_var = half_sigma_sqrt_dt * half_sigma_sqrt_dt;
    const double p = params.p();
    const bool delta_one = params.delta_is_one();

    Path path;
    path.grid = grid;
    path.frame = frame;
    path.seed = seed;
    path.sigma = sigma;
    path.values.resize(n + 1);
    path.gauss.resize(n);
    path.values[0] = start;

    Rng rng(seed);
    double u = start;
    for (std::size_t k = 0; k < n; ++k) {
        const StepGeometry geo = geometry(grid.time(k));

        // drift substep
        double w;
        if (scheme.drift_mode == DriftMode::explicit_euler) {
            const double z = std::max(u + geo.offset, kDriftFloor);
            w = u + a / z - (kind == DriftKind::dsr ? cc : cb * u);
        } else if (kind == DriftKind::dsr) {
            const double q = u - cc;
            w = 0.5 * (q + std::sqrt(q * q + 4.0 * a));
        } else {
            const double lin = 1.0 + cb;
            const double q = u + geo.offset * lin;
            w = (q + std::sqrt(q * q + 4.0 * lin * a)) / (2.0 * lin) - geo.offset;
        }

        // diffusion substep
        const double g = rng.normal();
        path.gauss[k] = g;
        double v = w + half_sigma_sqrt_dt * g;

        // skew step
        if (geo.skew_active) {
            // bridge mode measures from the start of the Gaussian increment
            const double du = (scheme.skew_mode == SkewMode::bridge ? w : u) - geo.barrier;
            const double dv = v - geo.barrier;
            bool hit = du * dv <= 0.0;
            if (!hit) {
                if (scheme.skew_mode == SkewMode::band) {
                    hit = std::min(std::abs(du), std::abs(dv)) < band;
                } else {
                    hit = rng.uniform() < std::exp(-2.0 * std::abs(du) * std::abs(dv) / bridge_var);
                }
            }
            if (hit) {
                const std::int8_t side = rng.uniform() < p ? 1 : -1;
                v = geo.barrier + side * std::abs(dv);
                path.reflections.push_back({static_cast<std::uint32_t>(k), side, std::abs(dv)});
            }
        }

        // boundary at zero (lower edge of the moving domain)
        const double below = v - geo.lower;
        if (below < 0.0) {
            if (delta_one) {
                v = geo.lower - below;
            } else {
                ++path.zero_violations;
                v = scheme.zero_handling == ZeroHandling::reflect_abs ? geo.lower - below : geo.lower;
            }
        }

        if (!std::isfinite(v)) {
            throw SchemeDiverged(k, "scheme diverged at step " + std::to_string(k) + " (t = " +
                                        std::to_string(grid.time(k)) + ")");
        }
        path.values[k + 1] = v;
        u = v;
    }
    return path;
}

void require_horizon(const GridSpec& grid, const Curve& curve) {
    require(grid.T <= curve.t_max() * (1.0 + 1e-12), Errc::precondition,
            "grid horizon " + std::to_string(grid.T) + " exceeds the curve domain " +
                std::to_string(curve.t_max()));
}

}  // namespace

Path simulate_y_path(const ModelParams& params, const Curve& curve, double y0, const GridSpec& grid,
                     const SchemeConfig& scheme, std::uint64_t seed) {
    require(y0 >= 0.0 && std::isfinite(y0), Errc::precondition, "y0 must be >= 0");
    require_horizon(grid, curve);
    return run_scheme(params, Frame::Y, y0, grid, scheme, seed, DriftKind::mean_reverting,
                      [&curve](double t) {
                          const double lam = curve.lambda(t);
                          return StepGeometry{lam, 0.0, 0.0, lam > 0.0};
                      });
}

Path simulate_x_path(const ModelParams& params, const Curve& curve, double x0, const GridSpec& grid,
                     const SchemeConfig& scheme, std::uint64_t seed) {
    require(std::isfinite(x0) && x0 >= -curve.gamma(0.0), Errc::precondition,
            "x0 = " + std::to_string(x0) + " lies outside the moving domain [-gamma(0), inf)");
    require_horizon(grid, curve);
    return run_scheme(params, Frame::X, x0, grid, scheme, seed, DriftKind::mean_reverting,
                      [&curve](double t) {
                          const double beta = curve.beta(t);
                          const double gamma = curve.gamma(t);
                          return StepGeometry{beta, -gamma, gamma, beta > -gamma};
                      });
}

Path square_path(const Path& y_path) {
    require(y_path.frame == Frame::Y, Errc::wrong_frame,
            "square_path needs a Y-frame path, got " + std::string(frame_name(y_path.frame)));
    Path r = y_path;
    r.frame = Frame::R;
    for (double& v : r.values) v *= v;
    return r;
}

Path simulate_dsr_path(const ModelParams& params, const Curve& curve, double z0, const GridSpec& grid,
                       const SchemeConfig& scheme, std::uint64_t seed) {
    require(params.dsr_c().has_value(), Errc::missing_dsr_c, "the DSR model needs dsr_c");
    require(z0 >= 0.0 && std::isfinite(z0), Errc::precondition, "z0 must be >= 0");
    require_horizon(grid, curve);
    Path path = run_scheme(params, Frame::Y, std::sqrt(z0), grid, scheme, seed, DriftKind::dsr,
                           [&curve](double t) {
                               const double lam = curve.lambda(t);
                               return StepGeometry{lam, 0.0, 0.0, lam > 0.0};
                           });
    path.frame = Frame::Z_dsr;
    for (double& v : path.values) v *= v;
    return path;
}

double sample_noncentral_chisq(double dof, double nc, Rng& rng) {
    long extra = 0;
    if (nc > 0.0) {
        std::poisson_distribution<long> poisson(0.5 * nc);
        extra = poisson(rng.engine());
    }
    std::gamma_distribution<double> gamma(0.5 * dof + static_cast<double>(extra), 2.0);
    return gamma(rng.engine());
}

double exact_cir_step(const ModelParams& params, double z, double dt, Rng& rng) {
    require(params.b() > 0.0, Errc::b_zero, "exact_cir_step needs b > 0; use exact_besq_step for b = 0");
    require(z >= 0.0 && dt > 0.0, Errc::precondition, "exact_cir_step needs z >= 0 and dt > 0");
    const double s2 = params.sigma() * params.sigma();
    const double kappa = 0.25 * s2 * params.b();
    const double scale = -s2 * std::expm1(-kappa * dt) / (4.0 * kappa);
    const double nc = z * std::exp(-kappa * dt) / scale;
    return scale * sample_noncentral_chisq(params.delta(), nc, rng);
}

double exact_besq_step(const ModelParams& params, double z, double dt, Rng& rng) {
    require(z >= 0.0 && dt > 0.0, Errc::precondition, "exact_besq_step needs z >= 0 and dt > 0");
    const double scale = 0.25 * params.sigma() * params.sigma() * dt;
    return scale * sample_noncentral_chisq(params.delta(), z / scale, rng);
}

Path simulate_cir_exact_path(const ModelParams& params, double z0, const GridSpec& grid,
                             std::uint64_t seed) {
    check_grid(grid);
    require(z0 >= 0.0, Errc::precondition, "z0 must be >= 0");
    Path path;
    path.grid = grid;
    path.frame = Frame::CIR_exact;
    path.seed = seed;
    path.sigma = params.sigma();
    path.values.resize(grid.n_steps + 1);
    path.values[0] = z0;
    Rng rng(seed);
    const double dt = grid.dt();
    for (std::size_t k = 0; k < grid.n_steps; ++k) {
        const double z = path.values[k];
        path.values[k + 1] = params.b() > 0.0 ? exact_cir_step(params, z, dt, rng)
                                              : exact_besq_step(params, z, dt, rng);
    }
    return path;
}

}  // namespace skewdiff
