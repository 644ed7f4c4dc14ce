#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "skewdiff/curve.hpp"
#include "skewdiff/path.hpp"

namespace skewdiff {

enum class LocalTimeMethod : std::uint8_t { occupation, tanaka_residual };

/// Local-time accumulations on the path grid. Arrays that a given estimator
/// does not produce are left empty.
struct LocalTimeEstimate {
    std::vector<double> times;
    std::vector<double> upper;
    std::vector<double> lower;
    std::vector<double> symmetric;
    double eps = 0.0;
    LocalTimeMethod method = LocalTimeMethod::occupation;
};

/// d<X>/dt at step j: (sigma/2)^2 for the Y and X frames, sigma^2 * value
/// for the squared frames (R, Z_dsr, CIR_exact).
double quadratic_variation_rate(const Path& path, std::size_t j);

/// One-step standard deviation (sigma/2) sqrt(dt) of the Y/X frame.
double default_eps(const Path& path);

/// upper[k] = (1/eps) sum_{j<k} 1{0 <= X_j - kappa(t_j) < eps} d<X>_j.
LocalTimeEstimate occupation_upper(const Path& path, const ScalarFn& barrier, double eps);

/// lower[k] = (1/eps) sum_{j<k} 1{-eps < X_j - kappa(t_j) <= 0} d<X>_j.
LocalTimeEstimate occupation_lower(const Path& path, const ScalarFn& barrier, double eps);

/// Upper and lower in one pass, symmetric = (upper + lower) / 2.
LocalTimeEstimate occupation_both(const Path& path, const ScalarFn& barrier, double eps);

/// Symmetric local time from Tanaka's formula with sgn(0) = 0 and
/// left-endpoint sums:
/// |X_k - kappa_k| - |X_0 - kappa_0| - sum_{j<k} sgn(X_j - kappa_j) (dX_j - dkappa_j).
/// A step carrying a recorded barrier contact (a skew-step event at this
/// barrier) is split at the contact, so it contributes -|X_j - kappa_j| to
/// the sum; without the split the skew jumps bias the estimate by 4p(1-p).
LocalTimeEstimate tanaka_residual(const Path& path, const ScalarFn& barrier);

struct RellocReport {
    /// Occupation estimate of l^0(R - lambda^2) with band max(2 lambda eps, eps^2).
    double a = 0.0;
    /// sum_j 2 sqrt(R_j) dl^0(sqrt(R) - lambda)_j.
    double b = 0.0;
    double residual = 0.0;
};

/// Checks 2 sqrt(R) dl^0(sqrt(R) - lambda) = dl^0(R - lambda^2) on one path.
/// `r_path` must be the square of `y_path` (Errc::frame_mismatch otherwise).
RellocReport check_relloc(const Path& r_path, const Path& y_path, const Curve& curve, double eps);

struct RatioPair {
    double r_up;
    double r_low;
};

/// (upper_T / symmetric_T, lower_T / symmetric_T); targets 2p and 2(1-p).
/// Throws Errc::zero_local_time without barrier contact.
RatioPair relation_ratios(const LocalTimeEstimate& est, double p);

/// Markovian local time from the symmetric one: increments are kept where
/// the skew barrier is active (beta > -gamma) and divided by p elsewhere.
/// `region_active[j]` refers to step j (j < n_steps).
std::vector<double> markovian_from_symmetric(const LocalTimeEstimate& est, double p,
                                             const std::vector<std::uint8_t>& region_active);

/// Columns t, upper, lower, symmetric (missing arrays written as 0).
void write_local_time_csv(const LocalTimeEstimate& est, const std::filesystem::path& file);

}  // namespace skewdiff
