#include "skewdiff/pde.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <fstream>

#include "skewdiff/error.hpp"
#include "skewdiff/parallel.hpp"
#include "skewdiff/rng.hpp"

namespace skewdiff {

namespace {

constexpr double kResidualTol = 1e-8;

// Banded system with two sub- and two super-diagonals; band[i][j - i + 2].
struct Banded {
    std::vector<std::array<double, 5>> band;
    explicit Banded(std::size_t n) : band(n, std::array<double, 5>{}) {}
    double& at(std::size_t i, std::size_t j) { return band[i][j + 2 - i]; }
};

// Gaussian elimination without pivoting; returns the residual max norm.
double solve_banded(const Banded& a, const std::vector<double>& rhs, std::vector<double>& x) {
    const std::size_t n = rhs.size();
    auto m = a.band;
    std::vector<double> r = rhs;
    for (std::size_t i = 0; i < n; ++i) {
        const double piv = m[i][2];
        if (piv == 0.0 || !std::isfinite(piv)) fail(Errc::unstable_solve, "zero pivot in the implicit step");
        for (std::size_t k = 1; k <= 2 && i + k < n; ++k) {
            const std::size_t row = i + k;
            const double f = m[row][2 - k] / piv;
            if (f == 0.0) continue;
            for (std::size_t c = 0; c <= 2; ++c) {
                // column i + c of row `row` sits at index i + c - row + 2
                m[row][2 - k + c] -= f * m[i][2 + c];
            }
            r[row] -= f * r[i];
        }
    }
    x.assign(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = r[ii];
        for (std::size_t c = 1; c <= 2 && ii + c < n; ++c) s -= m[ii][2 + c] * x[ii + c];
        x[ii] = s / m[ii][2];
    }
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = -rhs[i];
        for (std::size_t c = 0; c < 5; ++c) {
            const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) + static_cast<std::ptrdiff_t>(c) - 2;
            if (j >= 0 && j < static_cast<std::ptrdiff_t>(n)) s += a.band[i][c] * x[static_cast<std::size_t>(j)];
        }
        res = std::max(res, std::abs(s));
    }
    return res;
}

// int_a^b x^(k-1) exp(-beta x) dx
double shape_integral(double k, double beta, double a, double b) {
    if (b <= a) return 0.0;
    if (a == 0.0) {
        // series, the cell at the origin is tiny
        double sum = 0.0, term = 1.0;
        for (int n = 0; n < 60; ++n) {
            const double add = term * std::pow(b, n + k) / (n + k);
            sum += add;
            if (std::abs(add) < 1e-18 * std::abs(sum)) break;
            term *= -beta / (n + 1);
        }
        return sum;
    }
    auto g = [k, beta](double x) { return std::pow(x, k - 1.0) * std::exp(-beta * x); };
    return boost::math::quadrature::gauss<double, 15>::integrate(g, a, b);
}

}  // namespace

double PdeSolution::value_at(double xq) const {
    require(!x.empty(), Errc::precondition, "empty PDE solution");
    if (xq <= x.front()) return u0.front();
    if (xq >= x.back()) return u0.back();
    const double h = x[1] - x[0];
    const auto i = std::min(static_cast<std::size_t>(xq / h), x.size() - 2);
    const double w = (xq - x[i]) / h;
    return (1.0 - w) * u0[i] + w * u0[i + 1];
}

PdeSolution solve_backward(const ModelParams& params, const ScalarFn& barrier2,
                           const std::function<double(double)>& payoff, double T, const PdeGrid& grid) {
    require(T > 0.0 && std::isfinite(T), Errc::precondition, "T must be positive");
    require(grid.n_x >= 200, Errc::precondition, "PDE grid needs at least 200 nodes");
    require(grid.n_t >= 1, Errc::precondition, "PDE grid needs at least one time step");
    require(grid.x_max > 0.0, Errc::precondition, "x_max must be positive");

    const std::size_t nx = grid.n_x;
    const std::size_t last = nx - 1;  // eliminated by extrapolation
    const double dx = grid.dx();
    const double dt = T / static_cast<double>(grid.n_t);
    const double s2 = params.sigma() * params.sigma();
    const double k = 0.5 * params.delta();
    const double beta = 0.5 * params.b();
    const double p = params.p();

    PdeSolution sol;
    sol.x.resize(nx);
    for (std::size_t i = 0; i < nx; ++i) sol.x[i] = static_cast<double>(i) * dx;
    sol.times.resize(grid.n_t + 1);
    for (std::size_t m = 0; m <= grid.n_t; ++m) sol.times[m] = static_cast<double>(m) * T / static_cast<double>(grid.n_t);

    // interface positions per level
    sol.interface_index.assign(grid.n_t + 1, nx);
    std::vector<double> c2(grid.n_t + 1);
    for (std::size_t m = 0; m <= grid.n_t; ++m) {
        c2[m] = barrier2(sol.times[m]);
        require(std::isfinite(c2[m]) && c2[m] >= 0.0, Errc::precondition, "barrier must be >= 0");
        require(c2[m] < 0.8 * grid.x_max, Errc::precondition,
                "barrier " + std::to_string(c2[m]) + " exceeds 0.8 * x_max");
        if (grid.interface_mode != InterfaceMode::none && c2[m] > 0.0)
            sol.interface_index[m] = static_cast<std::size_t>(std::llround(c2[m] / dx));
        if (m > 0 && std::abs(c2[m] - c2[m - 1]) > dx) {
            fail(Errc::grid_too_coarse, "interface moves " + std::to_string(std::abs(c2[m] - c2[m - 1])) +
                                            " in one time step, more than dx = " + std::to_string(dx));
        }
        if (grid.interface_mode == InterfaceMode::one_sided && sol.interface_index[m] < nx) {
            require(sol.interface_index[m] >= 2 && sol.interface_index[m] + 3 <= last, Errc::grid_too_coarse,
                    "interface too close to the domain edge for one-sided differences");
        }
    }

    // geometry: face conductances A g and half-cell masses
    std::vector<double> face(nx - 1), left(nx, 0.0), right(nx, 0.0);
    for (std::size_t i = 0; i + 1 < nx; ++i) {
        const double xf = (static_cast<double>(i) + 0.5) * dx;
        face[i] = 0.5 * s2 * xf * std::pow(xf, k - 1.0) * std::exp(-beta * xf);
    }
    for (std::size_t i = 0; i < nx; ++i) {
        const double xi = sol.x[i];
        if (i > 0) left[i] = shape_integral(k, beta, xi - 0.5 * dx, xi);
        right[i] = i == 0 ? shape_integral(k, beta, 0.0, 0.5 * dx) : shape_integral(k, beta, xi, xi + 0.5 * dx);
    }

    std::vector<double> u(nx);
    for (std::size_t i = 0; i < nx; ++i) u[i] = payoff(sol.x[i]);
    sol.payoff_min = *std::min_element(u.begin(), u.end());
    sol.payoff_max = *std::max_element(u.begin(), u.end());
    if (grid.store_history) sol.history.assign(grid.n_t + 1, {});
    if (grid.store_history) sol.history[grid.n_t] = u;

    const std::size_t n = last;  // unknowns 0 .. last-1
    std::vector<double> rhs(n), next;
    for (std::size_t step = grid.n_t; step-- > 0;) {
        const std::size_t iface = sol.interface_index[step];
        const bool active = iface < nx;
        auto w_face = [&](std::size_t f) {  // face between i and i+1
            if (!active) return 1.0;
            return f < iface ? 1.0 - p : p;
        };
        Banded a(n);
        for (std::size_t i = 0; i < n; ++i) {
            double wl = 1.0, wr = 1.0;
            if (active) {
                wl = i <= iface ? 1.0 - p : p;
                wr = i < iface ? 1.0 - p : p;
            }
            const double mass = wl * left[i] + wr * right[i];
            const double fl = i > 0 ? w_face(i - 1) * face[i - 1] : 0.0;
            const double fr = w_face(i) * face[i];
            const double alpha = dt * fl / (dx * mass);
            const double gamma = dt * fr / (dx * mass);
            a.at(i, i) = 1.0 + alpha + gamma;
            if (i > 0) a.at(i, i - 1) = -alpha;
            if (i + 1 < n) {
                a.at(i, i + 1) = -gamma;
            } else {
                // u_last = 2 u_{n-1} - u_{n-2}
                a.at(i, i) -= 2.0 * gamma;
                a.at(i, i - 1) += gamma;
            }
            rhs[i] = u[i];
        }
        if (active && grid.interface_mode == InterfaceMode::one_sided) {
            const std::size_t I = iface;
            a.band[I] = {1.0 - p, -4.0 * (1.0 - p), 3.0, -4.0 * p, p};
            rhs[I] = 0.0;
        }
        const double res = solve_banded(a, rhs, next);
        sol.max_residual = std::max(sol.max_residual, res);
        if (!(res <= kResidualTol)) {
            fail(Errc::unstable_solve, "implicit step residual " + std::to_string(res) + " exceeds 1e-8");
        }
        std::copy(next.begin(), next.end(), u.begin());
        u[last] = 2.0 * u[last - 1] - u[last - 2];
        if (grid.store_history) sol.history[step] = u;
    }
    sol.u0 = u;
    const double slack = 1e-10 * std::max(1.0, std::max(std::abs(sol.payoff_min), std::abs(sol.payoff_max)));
    for (double v : u) {
        if (v < sol.payoff_min - slack || v > sol.payoff_max + slack) sol.max_principle_ok = false;
    }
    if (grid.store_history) {
        for (const auto& level : sol.history)
            for (double v : level)
                if (v < sol.payoff_min - slack || v > sol.payoff_max + slack) sol.max_principle_ok = false;
    }
    return sol;
}

CompareReport compare_mc_pde(const ModelParams& params, const Curve& curve,
                             const std::function<double(double)>& payoff, double T,
                             const std::vector<double>& x0_list, const McConfig& mc, const PdeGrid& grid,
                             double abs_tol) {
    require(mc.n_paths >= 2, Errc::precondition, "Monte Carlo needs at least two paths");
    auto barrier2 = [&curve](double t) {
        const double l = curve.lambda(t);
        return l * l;
    };
    PdeGrid fine = grid;
    fine.n_x = 2 * grid.n_x - 1;
    fine.n_t = 2 * grid.n_t;
    fine.store_history = false;
    PdeGrid coarse = grid;
    coarse.store_history = false;
    const PdeSolution base = solve_backward(params, barrier2, payoff, T, coarse);
    const PdeSolution refined = solve_backward(params, barrier2, payoff, T, fine);

    CompareReport report;
    report.abs_tol = abs_tol;
    const GridSpec path_grid{T, mc.n_steps};
    for (std::size_t idx = 0; idx < x0_list.size(); ++idx) {
        const double x0 = x0_list[idx];
        require(x0 >= 0.0, Errc::precondition, "x0 must be >= 0");
        const std::uint64_t root = derive_seed(mc.seed, idx);
        const auto values = parallel_map(mc.n_paths, mc.threads, [&](std::size_t k) {
            const Path y = simulate_y_path(params, curve, std::sqrt(x0), path_grid, mc.scheme, derive_seed(root, k));
            const double r = y.terminal();
            return payoff(r * r);
        });
        double sum = 0.0;
        for (double v : values) sum += v;
        const double nd = static_cast<double>(values.size());
        const double mean = sum / nd;
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        var /= nd - 1.0;

        CompareRow row;
        row.x0 = x0;
        row.pde = base.value_at(x0);
        row.grid_bias = std::abs(refined.value_at(x0) - row.pde);
        row.mc = mean;
        row.std_error = std::sqrt(var / nd);
        row.diff = row.pde - row.mc;
        row.tolerance = abs_tol + 3.0 * row.std_error + row.grid_bias;
        row.pass = std::abs(row.diff) <= row.tolerance;
        report.all_pass = report.all_pass && row.pass;
        report.rows.push_back(row);
    }
    return report;
}

void write_pde_csv(const PdeSolution& solution, const std::filesystem::path& file, std::size_t x_stride,
                   std::size_t t_stride) {
    require(x_stride > 0 && t_stride > 0, Errc::precondition, "strides must be positive");
    std::ofstream out(file);
    require(static_cast<bool>(out), Errc::io, "cannot write " + file.string());
    out.precision(17);
    out << "t,x,u\n";
    if (solution.history.empty()) {
        for (std::size_t i = 0; i < solution.x.size(); i += x_stride)
            out << 0.0 << ',' << solution.x[i] << ',' << solution.u0[i] << '\n';
        return;
    }
    for (std::size_t m = 0; m < solution.history.size(); m += t_stride) {
        for (std::size_t i = 0; i < solution.x.size(); i += x_stride)
            out << solution.times[m] << ',' << solution.x[i] << ',' << solution.history[m][i] << '\n';
    }
}

}  // namespace skewdiff
