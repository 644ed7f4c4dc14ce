#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "skewdiff/error.hpp"
#include "skewdiff/local_time.hpp"
#include "skewdiff/rng.hpp"

using namespace skewdiff;
using testutil::params;

namespace {
const ScalarFn one = [](double) { return 1.0; };

void check_near(const std::vector<double>& got, const std::vector<double>& want) {
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
}
}  // namespace

TEST_CASE("occupation estimators on a hand-built path") {
    // dt = 0.25, d<Y>/dt = 1 for sigma = 2
    const Path y = testutil::make_path({1.05, 0.95, 1.0, 1.2, 0.9}, 1.0);
    const double eps = 0.1;
    const auto up = occupation_upper(y, one, eps);
    const auto lo = occupation_lower(y, one, eps);
    const auto both = occupation_both(y, one, eps);
    // upper counts steps 0 (d=.05) and 2 (d=0); lower counts step 1 (d=-.05) and 2
    check_near(up.upper, {0, 2.5, 2.5, 5.0, 5.0});
    check_near(lo.lower, {0, 0, 2.5, 5.0, 5.0});
    CHECK(up.lower.empty());
    CHECK(lo.upper.empty());
    CHECK(both.upper == up.upper);
    CHECK(both.lower == lo.lower);
    for (std::size_t k = 0; k < both.symmetric.size(); ++k)
        CHECK(both.symmetric[k] == 0.5 * (both.upper[k] + both.lower[k]));
    CHECK(both.eps == eps);
    CHECK(both.times.back() == 1.0);
}

TEST_CASE("quadratic-variation rate per frame") {
    const Path y = testutil::make_path({1, 2}, 1.0, Frame::Y, 2.0);
    CHECK(quadratic_variation_rate(y, 0) == 1.0);
    const Path r = testutil::make_path({3, 2}, 1.0, Frame::R, 2.0);
    CHECK(quadratic_variation_rate(r, 0) == 12.0);
    CHECK(default_eps(testutil::make_path(std::vector<double>(101, 1.0), 1.0)) == doctest::Approx(0.1));
}

TEST_CASE("Tanaka residual trivial cases") {
    // never at the barrier: the sum telescopes exactly
    const Path far = testutil::make_path({2.0, 2.5, 1.7, 3.0, 2.2}, 1.0);
    for (double v : tanaka_residual(far, one).symmetric) CHECK(v == doctest::Approx(0.0).epsilon(1e-15));
    // constant path sitting on the barrier
    const Path on = testutil::make_path({1.0, 1.0, 1.0}, 1.0);
    for (double v : tanaka_residual(on, one).symmetric) CHECK(v == 0.0);
    // one crossing: |0.8 - 1| - |1.1 - 1| - (0.8 - 1.1) = 0.4
    const Path cross = testutil::make_path({1.1, 0.8}, 1.0);
    CHECK(tanaka_residual(cross, one).symmetric.back() == doctest::Approx(0.4));
    // with a recorded contact the step is split at the barrier
    Path contact = cross;
    contact.reflections.push_back({0, -1, 0.2});
    CHECK(tanaka_residual(contact, one).symmetric.back() == doctest::Approx(0.2));
}

TEST_CASE("relation ratios and their errors") {
    LocalTimeEstimate est;
    est.upper = {0, 3};
    est.lower = {0, 1};
    est.symmetric = {0, 2};
    const auto r = relation_ratios(est, 0.75);
    CHECK(r.r_up == 1.5);
    CHECK(r.r_low == 0.5);
    est.upper = {0, 0};
    est.lower = {0, 0};
    est.symmetric = {0, 0};
    try {
        relation_ratios(est, 0.5);
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::zero_local_time);
    }
}

TEST_CASE("Markovian local time from the symmetric one") {
    LocalTimeEstimate est;
    est.symmetric = {0, 1, 3, 4};
    CHECK(markovian_from_symmetric(est, 0.7, {1, 1, 1}) == std::vector<double>{0, 1, 3, 4});
    const auto off = markovian_from_symmetric(est, 0.5, {0, 0, 0});
    CHECK(off == std::vector<double>{0, 2, 6, 8});
    const auto mixed = markovian_from_symmetric(est, 0.5, {1, 0, 1});
    CHECK(mixed == std::vector<double>{0, 1, 5, 6});
}

TEST_CASE("estimates are monotone, supported near the barrier and symmetric by construction") {
    const auto m = params(2, 2, 1, 0.75);
    const auto c = testutil::constant(1, 1);
    for (std::size_t k = 0; k < 20; ++k) {
        const Path y = simulate_y_path(m, c, 1.0, {1.0, 4096}, testutil::bridge(), k);
        const double eps = default_eps(y);
        const auto est = occupation_both(y, one, eps);
        for (std::size_t j = 0; j + 1 < y.values.size(); ++j) {
            CHECK(est.upper[j + 1] >= est.upper[j]);
            CHECK(est.lower[j + 1] >= est.lower[j]);
            CHECK(est.symmetric[j + 1] == 0.5 * (est.upper[j + 1] + est.lower[j + 1]));
            if (std::abs(y.values[j] - 1.0) >= eps) CHECK(est.symmetric[j + 1] == est.symmetric[j]);
        }
    }
}

TEST_CASE("no barrier contact gives zero local time for every estimator") {
    const Path y = testutil::make_path({3.0, 3.2, 2.9, 3.1}, 1.0);
    const auto est = occupation_both(y, one, 0.1);
    CHECK(est.symmetric.back() == 0.0);
    CHECK(tanaka_residual(y, one).symmetric.back() == 0.0);
    const Curve c = testutil::constant(1, 1);
    const auto rep = check_relloc(square_path(y), y, c, 0.1);
    CHECK(rep.a == 0.0);
    CHECK(rep.b == 0.0);
    CHECK(rep.residual == 0.0);
}

TEST_CASE("check_relloc frame requirements") {
    const Path y = testutil::make_path({1.0, 1.1}, 1.0);
    const Curve c = testutil::constant(1, 1);
    Path r = square_path(y);
    CHECK_THROWS_AS(check_relloc(y, y, c, 0.1), Error);
    r.values[1] += 1e-9;
    try {
        check_relloc(r, y, c, 0.1);
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::frame_mismatch);
    }
}

TEST_CASE("product identity with a barrier at 2: A ~ 4 l(sqrt R - lambda)") {
    const auto m = params(2, 2, 0.25, 0.6);
    const Curve c = testutil::constant(2, 4);
    double a = 0.0, l = 0.0;
    for (std::size_t k = 0; k < 40; ++k) {
        const Path y = simulate_y_path(m, c, 2.0, {4.0, 65536}, testutil::bridge(), derive_seed(9, k));
        const double eps = default_eps(y);
        const auto rep = check_relloc(square_path(y), y, c, eps);
        a += rep.a;
        l += occupation_both(y, [](double) { return 2.0; }, eps).symmetric.back();
        CHECK(rep.b == doctest::Approx(4.0 * occupation_both(y, [](double) { return 2.0; }, eps).symmetric.back()).epsilon(0.05));
    }
    CHECK(a / l == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("skew path local times") {
    const Curve c = testutil::constant(1, 1);
    SUBCASE("p = 1/2: upper and lower agree") {
        const auto m = params(2, 2, 1, 0.5);
        std::vector<double> diff;
        for (std::size_t k = 0; k < 200; ++k) {
            const Path y = simulate_y_path(m, c, 1.0, {1.0, 16384}, testutil::bridge(), derive_seed(21, k));
            const auto est = occupation_both(y, one, default_eps(y));
            diff.push_back(est.upper.back() - est.lower.back());
        }
        const auto st = testutil::stats(diff);
        CHECK(std::abs(st.mean) <= 3.0 * st.se);
    }
    SUBCASE("p = 0.75: lower / upper near 1/3, Tanaka agrees with occupation") {
        const auto m = params(2, 2, 1, 0.75);
        double up = 0.0, lo = 0.0, sym = 0.0, tan = 0.0;
        for (std::size_t k = 0; k < 200; ++k) {
            const Path y = simulate_y_path(m, c, 1.0, {1.0, 16384}, testutil::bridge(), derive_seed(22, k));
            const auto est = occupation_both(y, one, default_eps(y));
            up += est.upper.back();
            lo += est.lower.back();
            sym += est.symmetric.back();
            tan += tanaka_residual(y, one).symmetric.back();
        }
        CHECK(lo / up == doctest::Approx(1.0 / 3.0).epsilon(0.10));
        CHECK(tan / sym == doctest::Approx(1.0).epsilon(0.10));
    }
    SUBCASE("skew BM (delta = 1, b = 0): upper = 2p symmetric and Tanaka within 5%") {
        const auto m = params(2, 1, 0, 0.75);
        double up = 0.0, sym = 0.0, tan = 0.0;
        for (std::size_t k = 0; k < 400; ++k) {
            const Path y = simulate_y_path(m, c, 1.0, {1.0, 16384}, testutil::bridge(), derive_seed(23, k));
            const auto est = occupation_both(y, one, default_eps(y));
            up += est.upper.back();
            sym += est.symmetric.back();
            tan += tanaka_residual(y, one).symmetric.back();
        }
        CHECK(up / sym == doctest::Approx(1.5).epsilon(0.05));
        CHECK(tan / sym == doctest::Approx(1.0).epsilon(0.05));
    }
}

TEST_CASE("lower local time at the reflecting edge vanishes") {
    const auto m = params(2, 1, 0, 0.5);
    const Curve c = testutil::constant(0, 1);
    const ScalarFn zero = [](double) { return 0.0; };
    for (std::size_t k = 0; k < 20; ++k) {
        const Path y = simulate_y_path(m, c, 0.3, {1.0, 8192}, {}, k);
        const auto est = occupation_both(y, zero, default_eps(y));
        CHECK(est.lower.back() <= 1e-12 + 1e-3 * est.upper.back());
        CHECK(est.upper.back() == doctest::Approx(2.0 * est.symmetric.back()).epsilon(1e-3));
    }
}

TEST_CASE("the barrier set has vanishing occupation") {
    const auto m = params(2, 2, 1, 0.75);
    const Curve c = testutil::constant(1, 1);
    double f1 = 0.0, f2 = 0.0;
    for (std::size_t k = 0; k < 100; ++k) {
        const Path y = simulate_y_path(m, c, 1.0, {1.0, 16384}, testutil::bridge(), k);
        const double eps = default_eps(y) * 4.0;
        std::size_t n1 = 0, n2 = 0;
        for (double v : y.values) {
            n1 += std::abs(v - 1.0) < eps;
            n2 += std::abs(v - 1.0) < eps / 2.0;
        }
        f1 += static_cast<double>(n1) / y.values.size();
        f2 += static_cast<double>(n2) / y.values.size();
    }
    CHECK(f2 <= 0.75 * f1);
}

TEST_CASE("local-time CSV") {
    const Path y = testutil::make_path({1.05, 0.95, 1.0}, 1.0);
    const auto file = std::filesystem::temp_directory_path() / "skewdiff_lt.csv";
    write_local_time_csv(occupation_both(y, one, 0.1), file);
    std::ifstream in(file);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,upper,lower,symmetric");
    std::filesystem::remove(file);
}
