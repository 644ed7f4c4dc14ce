#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "skewdiff/analytics.hpp"
#include "skewdiff/error.hpp"
#include "skewdiff/parallel.hpp"
#include "skewdiff/path.hpp"
#include "skewdiff/rng.hpp"

using namespace skewdiff;
using testutil::params;

TEST_CASE("grid and scheme validation") {
    const auto m = params(2, 2, 1, 0.5);
    const auto c = testutil::constant(1, 1);
    CHECK_THROWS_AS(simulate_y_path(m, c, 1.0, {1.0, 0}, {}, 1), Error);
    CHECK_THROWS_AS(simulate_y_path(m, c, 1.0, {-1.0, 10}, {}, 1), Error);
    SchemeConfig bad;
    bad.band_width = -1.0;
    CHECK_THROWS_AS(simulate_y_path(m, c, 1.0, {1.0, 10}, bad, 1), Error);
    CHECK_THROWS_AS(simulate_y_path(m, c, 1.0, {2.0, 10}, {}, 1), Error);  // beyond the curve domain
    const GridSpec g{3.0, 7};
    CHECK(g.time(7) == 3.0);
}

TEST_CASE("paths are bit-identical for identical inputs and keep their draws") {
    const auto m = params(2, 2, 1, 0.7);
    const auto c = testutil::constant(1, 1);
    for (const SchemeConfig& s : {SchemeConfig{}, testutil::bridge()}) {
        const Path a = simulate_y_path(m, c, 1.0, {1.0, 500}, s, 42);
        const Path b = simulate_y_path(m, c, 1.0, {1.0, 500}, s, 42);
        CHECK(a.values == b.values);
        CHECK(a.gauss == b.gauss);
        CHECK(a.values.size() == 501);
        CHECK(a.gauss.size() == 500);
        const auto inc = a.brownian_increments();
        CHECK(inc[3] == doctest::Approx(0.5 * 2.0 * std::sqrt(1.0 / 500) * a.gauss[3]));
        const Path d = simulate_y_path(m, c, 1.0, {1.0, 500}, s, 43);
        CHECK(a.values != d.values);
    }
}

TEST_CASE("Bessel(3) second moment: E[Y_t^2] = 1 + 3t") {
    const auto m = params(2, 3, 0, 0.5);
    const auto c = testutil::constant(0, 1);
    for (const SchemeConfig& s : {SchemeConfig{}, testutil::bridge()}) {
        const auto r = parallel_map(20000, 1, [&](std::size_t k) {
            const Path y = simulate_y_path(m, c, 1.0, {1.0, 256}, s, derive_seed(5, k));
            return y.terminal() * y.terminal();
        });
        const auto st = testutil::stats(r);
        CHECK(std::abs(st.mean - 4.0) <= 4.0 * st.se);
    }
}

TEST_CASE("p = 1/2 skew scheme reproduces the exact CIR law") {
    const auto m = params(2, 3, 1, 0.5);
    const auto c = testutil::constant(1, 1);
    const auto scheme = testutil::bridge();
    std::vector<double> sim(10000), exact(10000);
    Rng rng(99);
    for (std::size_t k = 0; k < sim.size(); ++k) {
        const Path y = simulate_y_path(m, c, 1.0, {1.0, 1024}, scheme, derive_seed(7, k));
        sim[k] = y.terminal() * y.terminal();
        exact[k] = exact_cir_step(m, 1.0, 1.0, rng);
    }
    CHECK(ks_two_sample(sim, exact).statistic <= 0.03);
}

TEST_CASE("exact transitions") {
    const auto m = params(2, 3, 1, 0.5);
    Rng rng(1234);
    std::vector<double> z(100000);
    for (auto& v : z) v = exact_cir_step(m, 1.0, 1.0, rng);
    const auto st = testutil::stats(z);
    CHECK(std::abs(st.mean - (3.0 - 2.0 * std::exp(-1.0))) <= 3.0 * st.se);

    // BESQ branch: scaled noncentral chi-squared, 2 dof, noncentrality 1
    const auto besq = params(2, 2, 0, 0.5);
    std::vector<double> w(10000);
    for (auto& v : w) v = exact_besq_step(besq, 1.0, 1.0, rng);
    const auto ks = ks_test(w, [](double x) { return noncentral_chisq_cdf(2.0, 1.0, x); });
    CHECK(ks.pass);

    // continuity: E[(Z_dt - z)^2] <= C dt
    for (double dt : {1e-2, 1e-3, 1e-4}) {
        double ms = 0.0;
        for (int i = 0; i < 20000; ++i) {
            const double d = exact_cir_step(m, 1.0, dt, rng) - 1.0;
            ms += d * d;
        }
        CHECK(ms / 20000.0 <= 8.0 * dt);
    }
    CHECK_THROWS_AS(exact_cir_step(besq, 1.0, 1.0, rng), Error);
}

TEST_CASE("skew occupation at a small horizon is close to p") {
    const auto m = params(2, 1, 0, 0.75);
    const auto c = testutil::constant(1, 0.01);
    for (const SchemeConfig& s : {SchemeConfig{}, testutil::bridge()}) {
        double above = 0.0;
        for (std::size_t k = 0; k < 20000; ++k)
            above += simulate_y_path(m, c, 1.0, {0.01, 100}, s, derive_seed(3, k)).terminal() > 1.0;
        CHECK(above / 20000.0 == doctest::Approx(0.75).epsilon(0.04));
    }
}

TEST_CASE("moving frame") {
    const auto m = params(2, 2, 1, 0.7);
    // gamma == 0: identical to the Y-frame scheme with lambda = beta
    const auto flat = testutil::constant(1.0, 1.0);
    const Path xf = simulate_x_path(m, flat, 1.0, {1.0, 300}, {}, 8);
    const Path yf = simulate_y_path(m, flat, 1.0, {1.0, 300}, {}, 8);
    CHECK(xf.values == yf.values);
    CHECK(xf.frame == Frame::X);
    // a decreasing curve: beta is tabulated, so agreement is up to quadrature error
    const auto dec = testutil::linear(2.0, -1.0, 1.0);
    const Path x = simulate_x_path(m, dec, 2.0, {1.0, 300}, {}, 8);
    const Path y = simulate_y_path(m, dec, 2.0, {1.0, 300}, {}, 8);
    CHECK(x.gauss == y.gauss);
    for (std::size_t j = 0; j < x.values.size(); ++j) CHECK(x.values[j] == doctest::Approx(y.values[j]).epsilon(1e-9));

    // x0 below the moving domain
    const auto inc = testutil::linear(1.0, 1.0, 1.0);
    CHECK_THROWS_AS(simulate_x_path(m, inc, -0.1, {1.0, 10}, {}, 1), Error);

    // delta = 1 with lambda == 0 on a moving edge: no skew events, X >= -gamma
    const Curve zero = testutil::constant(0.0, 1.0);
    const auto m1 = params(2, 1, 0, 0.3);
    const Path x1 = simulate_x_path(m1, zero, 0.5, {1.0, 2000}, {}, 4);
    CHECK(x1.reflections.empty());
    CHECK(*std::min_element(x1.values.begin(), x1.values.end()) >= 0.0);

    // positivity on the moving domain
    for (std::size_t k = 0; k < 50; ++k) {
        const Path xp = simulate_x_path(params(2, 1, 0.3, 0.6), inc, 0.3, {1.0, 1000}, {}, k);
        for (std::size_t j = 0; j < xp.values.size(); ++j) CHECK(xp.values[j] >= -inc.gamma(xp.grid.time(j)));
    }
}

TEST_CASE("square_path") {
    Path y = testutil::make_path({2, 2, 2}, 1.0);
    y.reflections.push_back({1, 1, 0.5});
    const Path r = square_path(y);
    CHECK(r.frame == Frame::R);
    CHECK(r.values == std::vector<double>{4, 4, 4});
    CHECK(r.reflections.size() == 1);
    try {
        square_path(r);
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::wrong_frame);
    }
    // started at 0 with b = 0: E[R_t] = sigma^2 delta t / 4
    const auto m = params(2, 3, 0, 0.5);
    const auto c = testutil::constant(0, 1);
    std::vector<double> rt(20000);
    for (std::size_t k = 0; k < rt.size(); ++k)
        rt[k] = square_path(simulate_y_path(m, c, 0.0, {1.0, 256}, testutil::bridge(), k)).terminal();
    const auto st = testutil::stats(rt);
    CHECK(std::abs(st.mean - 3.0) <= 4.0 * st.se);
}

TEST_CASE("double square-root model") {
    const auto c = testutil::constant(0, 1);
    try {
        simulate_dsr_path(params(2, 2, 0, 0.5), c, 1.0, {1.0, 10}, {}, 1);
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::missing_dsr_c);
    }
    // c = 0, p = 1/2, lambda == 0: squared Bessel law
    const auto m = params(2, 2, 0, 0.5, 0.0);
    std::vector<double> z(5000);
    for (std::size_t k = 0; k < z.size(); ++k) {
        const Path p = simulate_dsr_path(m, c, 1.0, {1.0, 1024}, testutil::bridge(), k);
        CHECK(p.frame == Frame::Z_dsr);
        z[k] = p.terminal();
    }
    CHECK(ks_test(z, [&](double x) { return cir_transition_cdf(m, 1.0, 1.0, x); }).pass);

    // drift self-consistency at p = 1/2, c = 1
    const auto mc = params(2, 2, 0, 0.5, 1.0);
    const auto lam = testutil::constant(1, 1);
    std::vector<double> defect(10000);
    for (std::size_t k = 0; k < defect.size(); ++k) {
        const Path p = simulate_dsr_path(mc, lam, 1.0, {1.0, 512}, testutil::bridge(), derive_seed(2, k));
        double integral = 0.0;
        for (std::size_t j = 0; j < 512; ++j) integral += (2.0 - std::sqrt(p.values[j])) / 512.0;
        defect[k] = p.terminal() - 1.0 - integral;
    }
    const auto st = testutil::stats(defect);
    CHECK(std::abs(st.mean) <= 3.0 * st.se);
}

TEST_CASE("positivity and delta = 1 reflection over long horizons") {
    const auto m = params(2, 1, 0, 0.4);
    const auto c = testutil::constant(0.5, 50);
    for (const SchemeConfig& s : {SchemeConfig{}, testutil::bridge()}) {
        for (std::size_t k = 0; k < 5; ++k) {
            const Path y = simulate_y_path(m, c, 0.2, {50.0, 50000}, s, k);
            CHECK(*std::min_element(y.values.begin(), y.values.end()) >= 0.0);
            CHECK(y.zero_violations == 0);
        }
    }
    // delta > 1 with truncation still keeps values nonnegative
    SchemeConfig trunc;
    trunc.zero_handling = ZeroHandling::truncate_at_zero;
    const Path y = simulate_y_path(params(2, 1.2, 0, 0.5), testutil::constant(0, 20), 0.0, {20.0, 20000}, trunc, 3);
    CHECK(*std::min_element(y.values.begin(), y.values.end()) >= 0.0);
}

TEST_CASE("skew events are recorded with the barrier as reference") {
    const auto m = params(2, 2, 1, 0.7);
    const auto c = testutil::constant(1, 1);
    const Path y = simulate_y_path(m, c, 1.0, {1.0, 4000}, {}, 12);
    REQUIRE_FALSE(y.reflections.empty());
    for (const auto& e : y.reflections) {
        CHECK((e.side == 1 || e.side == -1));
        CHECK(y.values[e.step + 1] == doctest::Approx(1.0 + e.side * e.overshoot).epsilon(1e-12));
    }
    // lambda == 0 disables the skew step
    CHECK(simulate_y_path(m, testutil::constant(0, 1), 1.0, {1.0, 4000}, {}, 12).reflections.empty());
}

TEST_CASE("skew-event count grows like dt^(-1/2)") {
    const auto m = params(2, 2, 1, 0.7);
    const auto c = testutil::constant(1, 1);
    for (const SchemeConfig& s : {SchemeConfig{}, testutil::bridge()}) {
        std::vector<double> lx, ly;
        for (std::size_t n : {1024u, 4096u, 16384u}) {
            double events = 0.0;
            for (std::size_t k = 0; k < 200; ++k) events += simulate_y_path(m, c, 1.0, {1.0, n}, s, k).reflections.size();
            lx.push_back(std::log(1.0 / n));
            ly.push_back(std::log(events / 200.0));
        }
        const double mx = (lx[0] + lx[1] + lx[2]) / 3.0, my = (ly[0] + ly[1] + ly[2]) / 3.0;
        double sxy = 0.0, sxx = 0.0;
        for (int i = 0; i < 3; ++i) {
            sxy += (lx[i] - mx) * (ly[i] - my);
            sxx += (lx[i] - mx) * (lx[i] - mx);
        }
        const double slope = sxy / sxx;
        CHECK(slope >= -0.6);
        CHECK(slope <= -0.4);
    }
}

TEST_CASE("divergence is reported with the step index") {
    const auto m = params(1e200, 2, 0, 0.5);
    try {
        simulate_y_path(m, testutil::constant(1, 1), 1.0, {1.0, 10}, {}, 1);
        FAIL("no divergence");
    } catch (const SchemeDiverged& e) {
        CHECK(e.code() == Errc::scheme_diverged);
        CHECK(e.step() == 0);
    }
}

TEST_CASE("noncentral chi-squared sampler matches the oracle cdf") {
    Rng rng(77);
    std::vector<double> v(10000);
    for (auto& x : v) x = sample_noncentral_chisq(3.5, 2.0, rng);
    CHECK(ks_test(v, [](double x) { return noncentral_chisq_cdf(3.5, 2.0, x); }).pass);
    const Path p = simulate_cir_exact_path(params(2, 3, 1, 0.5), 1.0, {1.0, 16}, 5);
    CHECK(p.frame == Frame::CIR_exact);
    CHECK(p.values.size() == 17);
}
