#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "skewdiff/error.hpp"
#include "skewdiff/pde.hpp"
#include "skewdiff/rng.hpp"

using namespace skewdiff;
using testutil::params;

namespace {

const ScalarFn one_sq = [](double) { return 1.0; };
double capped(double x) { return std::min(x, 2.0); }

/// E[min(R_T, 2)] for the classical CIR law by quadrature of the transition density.
double exact_capped_mean(double sigma, double delta, double b, double z0, double T) {
    const double kappa = 0.25 * sigma * sigma * b;
    const double scale = sigma * sigma * (1.0 - std::exp(-kappa * T)) / (4.0 * kappa);
    const boost::math::non_central_chi_squared law(delta, z0 * std::exp(-kappa * T) / scale);
    const double cut = 2.0 / scale;
    const double below = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double y) { return scale * y * boost::math::pdf(law, y); }, 0.0, cut, 15, 1e-13);
    return below + 2.0 * (1.0 - boost::math::cdf(law, cut));
}

}  // namespace

TEST_CASE("constant payoff is preserved") {
    for (double delta : {1.0, 2.0, 3.0}) {
        const auto sol = solve_backward(params(2, delta, 1, 0.7), one_sq, [](double) { return 1.0; }, 1.0,
                                        {20.0, 401, 200});
        for (double v : sol.u0) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("p = 1/2 interface equals the interface-free solver") {
    PdeGrid g{20.0, 401, 400};
    const auto with = solve_backward(params(2, 2, 1, 0.5), one_sq, capped, 1.0, g);
    g.interface_mode = InterfaceMode::none;
    const auto without = solve_backward(params(2, 2, 1, 0.5), one_sq, capped, 1.0, g);
    for (std::size_t i = 0; i < with.u0.size(); ++i) CHECK(std::abs(with.u0[i] - without.u0[i]) <= 1e-10);
}

TEST_CASE("p = 1/2 matches the exact CIR expectation") {
    const auto sol = solve_backward(params(2, 2, 1, 0.5), one_sq, capped, 1.0, {20.0, 801, 4000});
    for (double x0 : {0.5, 1.0, 2.0})
        CHECK(std::abs(sol.value_at(x0) - exact_capped_mean(2, 2, 1, x0, 1.0)) <= 1e-3);
    // Monte Carlo with exact transitions
    const auto m = params(2, 2, 1, 0.5);
    Rng rng(3);
    std::vector<double> f(200000);
    for (auto& v : f) v = capped(exact_cir_step(m, 1.0, 1.0, rng));
    const auto st = testutil::stats(f);
    CHECK(std::abs(sol.value_at(1.0) - st.mean) <= 0.01 + 3.0 * st.se);
}

TEST_CASE("maximum principle, p-sensitivity and grid refinement") {
    const PdeGrid g{20.0, 401, 8000};
    const auto s7 = solve_backward(params(2, 2, 1, 0.7), one_sq, capped, 1.0, g);
    const auto s5 = solve_backward(params(2, 2, 1, 0.5), one_sq, capped, 1.0, g);
    CHECK(s7.max_principle_ok);
    CHECK(s7.max_residual <= 1e-8);
    for (double v : s7.u0) {
        CHECK(v >= s7.payoff_min - 1e-12);
        CHECK(v <= s7.payoff_max + 1e-12);
    }
    for (double x0 : {0.5, 1.0, 2.0}) CHECK(s7.value_at(x0) > s5.value_at(x0));

    const PdeGrid g2{20.0, 801, 16000}, g3{20.0, 1601, 32000};
    const auto s72 = solve_backward(params(2, 2, 1, 0.7), one_sq, capped, 1.0, g2);
    const auto s73 = solve_backward(params(2, 2, 1, 0.7), one_sq, capped, 1.0, g3);
    for (double x0 : {0.5, 1.0, 2.0}) {
        const double d1 = s72.value_at(x0) - s7.value_at(x0);
        const double d2 = s73.value_at(x0) - s72.value_at(x0);
        CHECK(std::abs(d2) <= 0.35 * std::abs(d1));
    }
}

TEST_CASE("one-sided interface rows agree with the flux-balance default") {
    PdeGrid g{20.0, 801, 4000};
    const auto fb = solve_backward(params(2, 2, 1, 0.7), one_sq, capped, 1.0, g);
    g.interface_mode = InterfaceMode::one_sided;
    const auto os = solve_backward(params(2, 2, 1, 0.7), one_sq, capped, 1.0, g);
    for (double x0 : {0.5, 1.0, 2.0}) CHECK(std::abs(fb.value_at(x0) - os.value_at(x0)) <= 5e-3);
}

TEST_CASE("moving barrier and grid errors") {
    const auto m = params(2, 2, 1, 0.7);
    const ScalarFn moving = [](double t) { return 1.0 + t; };
    const auto sol = solve_backward(m, moving, capped, 1.0, {20.0, 401, 2000, InterfaceMode::flux_balance, true});
    CHECK(sol.max_principle_ok);
    CHECK(sol.history.size() == 2001);
    CHECK(sol.interface_index.front() != sol.interface_index.back());

    try {
        solve_backward(m, [](double t) { return 1.0 + 100.0 * t; }, capped, 0.1, {200.0, 401, 10});
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::grid_too_coarse);
    }
    CHECK_THROWS_AS(solve_backward(m, one_sq, capped, 1.0, {20.0, 150, 100}), Error);
    CHECK_THROWS_AS(solve_backward(m, [](double) { return 17.0; }, capped, 1.0, {20.0, 401, 100}), Error);
}

TEST_CASE("Monte Carlo cross-check harness") {
    McConfig mc;
    mc.n_paths = 20000;
    mc.n_steps = 512;
    mc.seed = 5;
    mc.scheme = testutil::bridge();
    const Curve c = testutil::constant(1.0, 1.0);
    const PdeGrid g{20.0, 401, 4000};
    const auto ok = compare_mc_pde(params(2, 2, 1, 0.5), c, capped, 1.0, {0.5, 1.0, 2.0}, mc, g, 0.01);
    CHECK(ok.all_pass);
    CHECK(ok.rows.size() == 3);

    // PDE at p = 0.7 against Monte Carlo at p = 0.5 must disagree somewhere
    const auto pde7 = solve_backward(params(2, 2, 1, 0.7), one_sq, capped, 1.0, g);
    bool any_fail = false;
    for (const auto& row : ok.rows)
        any_fail = any_fail || std::abs(pde7.value_at(row.x0) - row.mc) > 0.01 + 3.0 * row.std_error;
    CHECK(any_fail);
}

TEST_CASE("solution CSV") {
    const auto sol = solve_backward(params(2, 2, 1, 0.7), one_sq, capped, 1.0,
                                    {20.0, 201, 10, InterfaceMode::flux_balance, true});
    const auto file = std::filesystem::temp_directory_path() / "skewdiff_pde.csv";
    write_pde_csv(sol, file, 10, 5);
    std::ifstream in(file);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,x,u");
    std::filesystem::remove(file);
}
