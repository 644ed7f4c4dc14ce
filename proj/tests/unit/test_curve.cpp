#include <fstream>
#include <numbers>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "skewdiff/curve.hpp"
#include "skewdiff/error.hpp"

using namespace skewdiff;

TEST_CASE("increasing curve: beta constant, gamma = lambda - lambda(0)") {
    const Curve c = decompose_curve([](double t) { return 1.0 + t; }, ScalarFn([](double) { return 1.0; }), 2.0);
    for (double t : {0.0, 0.3, 1.0, 2.0}) {
        CHECK(c.beta(t) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(c.gamma(t) == doctest::Approx(t).epsilon(1e-10));
    }
}

TEST_CASE("decreasing curve: gamma vanishes") {
    const Curve c = decompose_curve([](double t) { return std::exp(-t); }, std::nullopt, 1.0);
    for (double t : {0.0, 0.25, 0.5, 1.0}) {
        CHECK(c.gamma(t) == doctest::Approx(0.0));
        CHECK(c.beta(t) == doctest::Approx(std::exp(-t)).epsilon(1e-6));
    }
}

TEST_CASE("one-sided parts of 1 + sin integrate to 2 each") {
    const double T = 2.0 * std::numbers::pi;
    const Curve c = decompose_curve([](double t) { return 1.0 + std::sin(t); },
                                    ScalarFn([](double t) { return std::cos(t); }), T);
    CHECK(c.gamma(T) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(c.beta(T) == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(c.beta(0.0) == 1.0);
    CHECK(c.gamma(0.0) == 0.0);
}

TEST_CASE("negative curve and non-integrable derivative are rejected") {
    try {
        decompose_curve([](double t) { return 0.5 - t; }, std::nullopt, 1.0);
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::negative_curve);
    }
    try {
        decompose_curve([](double) { return 1.0; }, ScalarFn([](double) { return std::nan(""); }), 1.0);
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::non_integrable_derivative);
    }
}

TEST_CASE("named curve families") {
    CurveSpec s;
    s.kind = "exp-decay";
    s.args = {{"value", 2.0}, {"rate", 0.5}};
    const Curve c = make_curve(s, 3.0);
    CHECK(c.lambda(2.0) == doctest::Approx(2.0 * std::exp(-1.0)));
    CHECK(c.gamma(3.0) == doctest::Approx(0.0));
    s.kind = "nonsense";
    CHECK_THROWS_AS(make_curve(s, 1.0), Error);
}

TEST_CASE("csv curve is linearly interpolated") {
    const auto file = std::filesystem::temp_directory_path() / "skewdiff_curve_test.csv";
    {
        std::ofstream out(file);
        out << "t,lambda\n0,1\n0.5,2\n1,1.5\n";
    }
    const Curve c = load_csv_curve(file, 1.0);
    CHECK(c.lambda(0.25) == doctest::Approx(1.5));
    CHECK(c.lambda(0.75) == doctest::Approx(1.75));
    CHECK(c.gamma(1.0) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(c.beta(1.0) == doctest::Approx(0.5).epsilon(1e-3));
    std::filesystem::remove(file);
}

TEST_CASE("decomposition invariants on random piecewise-smooth curves") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double T = 0.5 + 3.0 * u(gen);
        const double a1 = u(gen) - 0.5, w1 = 0.5 + 4.0 * u(gen), ph = 6.0 * u(gen);
        const double s = u(gen) - 0.5, kink = T * u(gen);
        const double base = 0.1 + std::abs(a1) + std::abs(s) * T;
        auto f = [=](double t) { return base + a1 * std::sin(w1 * t + ph) + s * std::abs(t - kink); };
        const Curve c = decompose_curve(f, std::nullopt, T);
        const double tol = 10.0 * c.quad_step() * c.sup_abs_deriv() + 1e-12;
        double prev_b = c.beta(0.0), prev_g = c.gamma(0.0);
        CHECK(prev_g == 0.0);
        CHECK(prev_b == doctest::Approx(f(0.0)));
        for (int i = 1; i <= 400; ++i) {
            const double t = T * i / 400.0;
            CHECK(std::abs(c.beta(t) + c.gamma(t) - f(t)) <= tol);
            CHECK(c.beta(t) <= prev_b + 1e-15);
            CHECK(c.gamma(t) >= prev_g - 1e-15);
            CHECK(c.beta(t) >= -c.gamma(t) - tol);
            prev_b = c.beta(t);
            prev_g = c.gamma(t);
        }
    }
}
