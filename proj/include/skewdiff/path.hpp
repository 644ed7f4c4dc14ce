#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "skewdiff/curve.hpp"
#include "skewdiff/model.hpp"
#include "skewdiff/rng.hpp"

namespace skewdiff {

/// Uniform time grid; t_k = k * T / n_steps.
struct GridSpec {
    double T = 1.0;
    std::size_t n_steps = 1;

    double dt() const noexcept { return T / static_cast<double>(n_steps); }
    double time(std::size_t k) const noexcept {
        return static_cast<double>(k) * T / static_cast<double>(n_steps);
    }
};

void check_grid(const GridSpec& grid);

enum class Frame : std::uint8_t { Y = 0, X = 1, R = 2, Z_dsr = 3, CIR_exact = 4 };

std::string_view frame_name(Frame frame) noexcept;

/// One skew-step activation: the side chosen (+1 above, -1 below) and the
/// distance |v - barrier| that was mirrored.
struct ReflectionEvent {
    std::uint32_t step;
    std::int8_t side;
    double overshoot;
};

struct Path {
    GridSpec grid;
    Frame frame = Frame::Y;
    std::uint64_t seed = 0;
    double sigma = 0.0;
    /// State at t_0 .. t_n.
    std::vector<double> values;
    /// Standard normal draw used in step k (n_steps entries; empty for
    /// exact-transition paths).
    std::vector<double> gauss;
    std::vector<ReflectionEvent> reflections;
    /// Steps where a delta > 1 path went below its lower boundary.
    std::size_t zero_violations = 0;

    /// (sigma/2) sqrt(dt) g_k, the martingale increments of the Y/X frame.
    std::vector<double> brownian_increments() const;
    double terminal() const { return values.back(); }
};

enum class DriftMode : std::uint8_t { explicit_euler, implicit_sqrt_term };
enum class ZeroHandling : std::uint8_t { reflect_abs, truncate_at_zero };
/// band: mirror whenever the step crosses the barrier or either endpoint is
/// within the band. bridge: mirror on crossings and, for same-side
/// endpoints, with the Brownian-bridge hitting probability
/// exp(-2 d_u d_v / ((sigma/2)^2 dt)).
enum class SkewMode : std::uint8_t { band, bridge };

struct SchemeConfig {
    /// Band half-width in units of the one-step deviation (sigma/2) sqrt(dt).
    double band_width = 3.0;
    DriftMode drift_mode = DriftMode::explicit_euler;
    ZeroHandling zero_handling = ZeroHandling::reflect_abs;
    SkewMode skew_mode = SkewMode::band;
};

void check_scheme(const SchemeConfig& scheme);

inline constexpr double kDriftFloor = 1e-12;

/// Square-root process Y >= 0 with skew reflection at lambda(t) and, for
/// delta == 1, reflection at 0. Each step: drift substep, Gaussian
/// substep, skew step against the barrier frozen at t_k, boundary at zero.
Path simulate_y_path(const ModelParams& params, const Curve& curve, double y0,
                     const GridSpec& grid, const SchemeConfig& scheme,
                     std::uint64_t seed);

/// Moving-frame process X >= -gamma(t) with skew reflection at beta(t)
/// (active where beta > -gamma) and drift (sigma^2/8)((delta-1)/(X+gamma) - bX).
/// For gamma == 0 it reproduces simulate_y_path draw for draw.
Path simulate_x_path(const ModelParams& params, const Curve& curve, double x0,
                     const GridSpec& grid, const SchemeConfig& scheme,
                     std::uint64_t seed);

/// Elementwise square of a Y-frame path; throws Errc::wrong_frame otherwise.
Path square_path(const Path& y_path);

/// Double square-root model: Y-frame drift (sigma^2/8)((delta-1)/Y - c),
/// then squared. Throws Errc::missing_dsr_c without c.
Path simulate_dsr_path(const ModelParams& params, const Curve& curve, double z0,
                       const GridSpec& grid, const SchemeConfig& scheme,
                       std::uint64_t seed);

/// Exact transition of the unreflected CIR process over dt:
/// scale (sigma^2 (1 - e^{-k dt}) / (4k)) times a noncentral chi-squared with
/// delta degrees of freedom, where k = sigma^2 b / 4. Throws Errc::b_zero.
double exact_cir_step(const ModelParams& params, double z, double dt, Rng& rng);

/// BESQ-type transition (b = 0): (sigma^2 dt / 4) chi'^2(delta, 4z/(sigma^2 dt)).
double exact_besq_step(const ModelParams& params, double z, double dt, Rng& rng);

/// Draws chi'^2(dof, nc) as a Poisson mixture of central chi-squares.
double sample_noncentral_chisq(double dof, double nc, Rng& rng);

/// Exact-transition path on the grid (frame CIR_exact), using the BESQ
/// transition when b == 0.
Path simulate_cir_exact_path(const ModelParams& params, double z0,
                             const GridSpec& grid, std::uint64_t seed);

}  // namespace skewdiff
