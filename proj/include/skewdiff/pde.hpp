#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "skewdiff/curve.hpp"
#include "skewdiff/model.hpp"
#include "skewdiff/path.hpp"

namespace skewdiff {

/// How the skew transmission condition p u'(c+) = (1-p) u'(c-) is imposed
/// at the interface node.
///   flux_balance: finite-volume cell straddling the node, face fluxes
///                 weighted by (1-p) below and p above (tridiagonal, keeps
///                 the discrete maximum principle).
///   one_sided:    algebraic row p D+ u = (1-p) D- u with second-order
///                 one-sided differences (pentadiagonal).
///   none:         ignore the barrier (plain CIR generator).
enum class InterfaceMode : std::uint8_t { flux_balance, one_sided, none };

struct PdeGrid {
    double x_max = 20.0;
    std::size_t n_x = 801;
    std::size_t n_t = 2000;
    InterfaceMode interface_mode = InterfaceMode::flux_balance;
    /// keep u at every time level (needed for CSV export)
    bool store_history = false;

    double dx() const noexcept { return x_max / static_cast<double>(n_x - 1); }
};

struct PdeSolution {
    std::vector<double> x;
    /// t_0 = 0, ..., t_{n_t} = T
    std::vector<double> times;
    /// u(0, x)
    std::vector<double> u0;
    /// u[m][i] = u(t_m, x_i) when stored, otherwise empty
    std::vector<std::vector<double>> history;
    /// snapped interface node per time level (n_x when inactive)
    std::vector<std::size_t> interface_index;
    double payoff_min = 0.0;
    double payoff_max = 0.0;
    /// largest linear-system residual seen
    double max_residual = 0.0;
    bool max_principle_ok = true;

    /// Linear interpolation of u(0, .) at x.
    double value_at(double x) const;
};

/// Solves u_t + (sigma^2/2) x u_xx + (sigma^2/4)(delta - b x) u_x = 0 on
/// [0, x_max] x [0, T], u(T, .) = payoff, with the skew transmission
/// condition at barrier2(t) = lambda(t)^2 and backward Euler in time.
/// x = 0 is a zero-flux boundary; at x_max u_xx = 0.
/// Throws Errc::grid_too_coarse when the interface moves more than one cell
/// per step and Errc::unstable_solve when a residual exceeds 1e-8.
PdeSolution solve_backward(const ModelParams& params, const ScalarFn& barrier2,
                           const std::function<double(double)>& payoff, double T,
                           const PdeGrid& grid = {});

struct McConfig {
    std::size_t n_paths = 100000;
    std::size_t n_steps = 1024;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    SchemeConfig scheme;
};

struct CompareRow {
    double x0;
    double pde;
    /// |u_fine - u| from a second solve with dx and dt halved
    double grid_bias;
    double mc;
    double std_error;
    double diff;
    double tolerance;
    bool pass;
};

struct CompareReport {
    std::vector<CompareRow> rows;
    double abs_tol = 0.0;
    bool all_pass = true;
};

/// For every x0, compares u(0, x0) with a Monte Carlo estimate of
/// E[payoff(R_T)], R = Y^2 simulated by the skew scheme from sqrt(x0).
/// Passes when |diff| <= abs_tol + 3 SE + grid_bias.
CompareReport compare_mc_pde(const ModelParams& params, const Curve& curve,
                             const std::function<double(double)>& payoff, double T,
                             const std::vector<double>& x0_list, const McConfig& mc,
                             const PdeGrid& grid = {}, double abs_tol = 0.0);

/// Columns t, x, u; every `x_stride`-th node of every `t_stride`-th level.
void write_pde_csv(const PdeSolution& solution, const std::filesystem::path& file,
                   std::size_t x_stride = 1, std::size_t t_stride = 1);

}  // namespace skewdiff
