#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "agora/errors.hpp"
#include "agora/stats.hpp"
#include "oracle_stats.hpp"

using namespace agora;

TEST_CASE("regularized incomplete beta matches reference values") {
    // Frozen with an independent high-precision evaluation.
    CHECK(stats::regularized_incomplete_beta(0.3, 0.5, 0.5) ==
          doctest::Approx(0.36901011956554536).epsilon(1e-13));
    CHECK(stats::regularized_incomplete_beta(0.5, 2, 3) ==
          doctest::Approx(0.6875).epsilon(1e-13));
    CHECK(stats::regularized_incomplete_beta(0.9, 5, 2) ==
          doctest::Approx(0.885735).epsilon(1e-13));
    CHECK(stats::regularized_incomplete_beta(0.1, 0.5, 4) ==
          doctest::Approx(0.6266250825977403).epsilon(1e-13));
    CHECK(stats::regularized_incomplete_beta(0.5, 10, 10) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(stats::regularized_incomplete_beta(1e-8, 2, 2) ==
          doctest::Approx(2.99999998e-16).epsilon(1e-9));
}

TEST_CASE("regularized incomplete beta endpoints and domain") {
    CHECK(stats::regularized_incomplete_beta(0.0, 2, 3) == 0.0);
    CHECK(stats::regularized_incomplete_beta(1.0, 2, 3) == 1.0);
    CHECK(std::isnan(stats::regularized_incomplete_beta(0.5, -1, 3)));
}

TEST_CASE("regularized incomplete beta agrees with boost over a grid") {
    for (double a : {0.25, 0.5, 1.0, 2.5, 7.0, 30.0}) {
        for (double b : {0.25, 0.5, 1.0, 3.0, 12.0, 50.0}) {
            for (double x = 0.02; x < 1.0; x += 0.07) {
                const double ours = stats::regularized_incomplete_beta(x, a, b);
                const double reference = boost::math::ibeta(a, b, x);
                CHECK(ours == doctest::Approx(reference).epsilon(1e-11));
            }
        }
    }
}

TEST_CASE("F upper tail") {
    CHECK(stats::f_upper_tail(0.0, 1, 4) == 1.0);
    CHECK(stats::f_upper_tail(13.5, 1, 4) ==
          doctest::Approx(0.02131164112875672).epsilon(1e-12));
    CHECK(stats::f_upper_tail(std::numeric_limits<double>::infinity(), 3, 9) == 0.0);
}

TEST_CASE("quartiles use linear interpolation between closest ranks") {
    const auto q = stats::quartiles({2, 4, 4, 6});
    CHECK(q.q1 == doctest::Approx(3.5));
    CHECK(q.median == doctest::Approx(4.0));
    CHECK(q.q3 == doctest::Approx(4.5));

    const auto same = stats::quartiles({4, 4, 4});
    CHECK(same.q1 == doctest::Approx(4.0));
    CHECK(same.median == doctest::Approx(4.0));
    CHECK(same.q3 == doctest::Approx(4.0));

    const auto two = stats::quartiles({1, 7});
    CHECK(two.median == doctest::Approx(4.0));

    CHECK_THROWS_AS(stats::quartiles({}), NoData);
}

TEST_CASE("OLS slope") {
    const std::vector<double> line{4, 5, 6};
    CHECK(stats::ols_slope(line) == doctest::Approx(1.0));
    const std::vector<double> flat{5, 5, 5, 5};
    CHECK(stats::ols_slope(flat) == doctest::Approx(0.0));
    const std::vector<double> bent{4, 6, 5};
    CHECK(stats::ols_slope(bent) == doctest::Approx(0.5));
    const std::vector<double> single{4};
    CHECK_THROWS_AS(stats::ols_slope(single), InsufficientPoints);
}

TEST_CASE("OLS slope sign-flips under score reflection") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> score(1.0, 7.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> y;
        std::vector<double> reflected;
        const int n = 3 + static_cast<int>(rng() % 10);
        for (int i = 0; i < n; ++i) {
            y.push_back(score(rng));
            reflected.push_back(8.0 - y.back());
        }
        CHECK(stats::ols_slope(y) == doctest::Approx(-stats::ols_slope(reflected)).epsilon(1e-12));
    }
}
