#include <cmath>

#include "claims.hpp"
#include "doctest.h"
#include "fet/duel.hpp"
#include "fet/dynamics.hpp"
#include "fet/errors.hpp"
#include "fet/grid.hpp"
#include "oracles.hpp"

using namespace fet;

TEST_CASE("flip_probs examples") {
    const FlipProbs det = flip_probs(0.0, 1.0, 7);
    CHECK(det.p_gain_one == 1.0);
    CHECK(det.p_keep_one == 1.0);

    const FlipProbs half = flip_probs(0.5, 0.5, 2);
    CHECK(half.p_gain_one == doctest::Approx(0.3125).epsilon(1e-15));
    CHECK(half.p_keep_one == doctest::Approx(0.6875).epsilon(1e-15));

    CHECK(flip_probs(0.4, 0.6, 20).p_gain_one > 0.5);
}

TEST_CASE("flip_probs invariants against the enumeration oracle") {
    for (double x : {0.0, 0.1, 0.37, 0.5, 0.9, 1.0}) {
        for (double y : {0.0, 0.2, 0.5, 0.77, 1.0}) {
            const FlipProbs f = flip_probs(x, y, 9);
            const oracle::Triple t = oracle::enumerate_duel(9, x, y);  // B(x) vs B(y)
            CHECK(std::abs(f.p_gain_one - static_cast<double>(t.lt)) < 1e-13);
            CHECK(std::abs((f.p_keep_one - f.p_gain_one) - static_cast<double>(t.eq)) < 1e-13);
            CHECK(f.p_keep_one >= f.p_gain_one);
            CHECK(f.p_keep_one <= 1.0 + 1e-15);
            CHECK(f.p_gain_one >= 0.0);
        }
    }
}

TEST_CASE("expected_next_fraction examples") {
    CHECK(expected_next_fraction(0.0, 0.0, 50, 5) == 0.0);
    CHECK(expected_next_fraction(0.5, 0.5, 100, 2) == doctest::Approx(0.503125).epsilon(1e-14));
    CHECK(expected_next_fraction(0.3, 0.45, 10000, 60) > 0.9);
}

TEST_CASE("expected_next_fraction sandwich") {
    const int n = 200, ell = 12;
    for (int a = 0; a <= n; a += 13) {
        for (int b = 0; b <= n; b += 11) {
            const double x = a / double(n), y = b / double(n);
            const FlipProbs f = flip_probs(x, y, ell);
            const double eq = f.p_keep_one - f.p_gain_one;
            const double g = expected_next_fraction(x, y, n, ell);
            CHECK(g >= f.p_gain_one + y * eq - 1.0 / n - 1e-15);
            CHECK(g <= f.p_gain_one + y * eq + 1.0 / n + 1e-15);
        }
    }
}

TEST_CASE("g(x, x) < x at the left end of the fixed-point range") {
    for (int n : {100, 1000, 1 << 16}) {
        for (int ell : {25, 64}) {
            const double x = 0.5 + 4.0 / n;
            CHECK(expected_next_fraction(x, x, n, ell) < x);
        }
    }
}

TEST_CASE("fixed_point range and property") {
    const double x = 0.5 + 4.0 / 100;
    const FixedPoint fp = fixed_point(x, 25, 100, 0.1);
    CHECK(fp.value >= x);
    CHECK(fp.value <= x + 0.2 + 1e-15);
    CHECK(expected_next_fraction(x, fp.value, 100, 25) <= fp.value + 1e-10);
    CHECK(fixed_point_f(x, 25, 100, 0.1) == fp.value);
    CHECK_THROWS_AS(fixed_point(0.5, 25, 100, 0.1), DomainError);
    CHECK_THROWS_AS(fixed_point(0.5 + 0.41, 25, 100, 0.1), DomainError);
}

TEST_CASE("speed examples") {
    CHECK(speed({0.5, 0.5}) == 0.0);
    CHECK(speed({0.2, 0.35}) == doctest::Approx(0.15).epsilon(1e-14));
    CHECK(speed({1.0, 0.0}) == 1.0);
}

TEST_CASE("analysis constants") {
    const auto c = AnalysisConstants::make(4096, 0.05, 3.0);
    CHECK(c.lambda_n > 0.0);
    CHECK(c.lambda_n < 1.0);
    CHECK(c.lambda_n == doctest::Approx(1.0 / std::pow(std::log(4096.0), 0.55)));
    CHECK(c.gamma == doctest::Approx((1 - std::exp(-1.0)) * std::exp(-6.0) / 2));
    CHECK(c.K == doctest::Approx(3 * std::exp(-6.0) / 2));
    CHECK(sample_size(4096, 3.0) == static_cast<int>(std::ceil(3 * std::log(4096.0))));
    CHECK_THROWS_AS(AnalysisConstants::make(2, 0.05, 3.0), DomainError);
    CHECK_THROWS_AS(AnalysisConstants::make(100, 0.5, 3.0), DomainError);
}

TEST_CASE("claim grids: monotone g(x, y) - y, f property, f margin") {
    const auto lmo = claims::last_minute_obstacle();
    CHECK(lmo.checked > 0);
    CHECK_MESSAGE(lmo.violations == 0, lmo.first_violation);

    const auto fp = claims::f_prop();
    CHECK_MESSAGE(fp.violations == 0, fp.first_violation);

    const auto b1 = claims::aux_b1(4.0);
    CHECK_MESSAGE(b1.violations == 0, b1.first_violation);

    // The stronger 2 alpha form is only logged.
    const auto strong = claims::aux_b1(2.0);
    MESSAGE("1/(2 alpha sqrt(ell)) form: " << strong.violations << " violations over " << strong.checked);
}
