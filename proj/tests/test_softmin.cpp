#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "rsp/softmin.hpp"
#include "rsp/types.hpp"

using rsp::Real;
using rsp::Vector;

TEST_CASE("softmin matches the two-path hand evaluation") {
    Vector x(2), q(2);
    x << 2.0, 3.0;
    q << 0.5, 0.5;
    const Real expected = -std::log(0.5 * std::exp(-2.0) + 0.5 * std::exp(-3.0));
    CHECK(rsp::softmin(x, q, 1.0) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(rsp::softmin(x, q, 1.0) == doctest::Approx(2.3799).epsilon(1e-4));
}

TEST_CASE("softmin approaches the minimum as theta grows") {
    Vector x(3), q(3);
    x << 1.5, 0.75, 4.0;
    q << 0.2, 0.5, 0.3;
    CHECK(rsp::softmin(x, q, 1e4) == doctest::Approx(0.75).epsilon(1e-4));
    // and the weighted mean as theta -> 0+
    const Real mean = (q.array() * x.array()).sum();
    CHECK(rsp::softmin(x, q, 1e-8) == doctest::Approx(mean).epsilon(1e-7));
}

TEST_CASE("softmin of a constant vector is exact") {
    Vector x = Vector::Constant(4, 1.37);
    Vector q(4);
    q << 0.25, 0.25, 0.25, 0.25;
    for (Real theta : {1e-3, 1.0, 50.0, 1e6}) CHECK(rsp::softmin(x, q, theta) == 1.37);
}

TEST_CASE("softmin with all mass on one element returns it exactly") {
    Vector x(3), q(3);
    x << 5.0, 2.0, 9.0;
    q << 0.0, 1.0, 0.0;
    CHECK(rsp::softmin(x, q, 0.7) == 2.0);
}

TEST_CASE("softmin is sandwiched and monotone in each coordinate") {
    std::mt19937_64 rng(20240811);
    std::uniform_real_distribution<Real> val(-2.0, 6.0);
    std::uniform_real_distribution<Real> weight(0.05, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 6);
        Vector x(n), q(n);
        for (int i = 0; i < n; ++i) {
            x[i] = val(rng);
            q[i] = weight(rng);
        }
        q /= q.sum();
        const Real theta = std::pow(10.0, -2.0 + 4.0 * weight(rng));
        const Real s = rsp::softmin(x, q, theta);
        CHECK(s >= x.minCoeff() - 1e-12);
        CHECK(s <= (q.array() * x.array()).sum() + 1e-12);

        Vector bumped = x;
        const int idx = static_cast<int>(rng() % n);
        bumped[idx] += 0.5;
        CHECK(rsp::softmin(bumped, q, theta) >= s - 1e-12);
    }
}

TEST_CASE("log_sum_exp survives large arguments") {
    Vector a(3);
    a << 1000.0, 1001.0, 999.0;
    const Real expected = 1001.0 + std::log(1.0 + std::exp(-1.0) + std::exp(-2.0));
    CHECK(rsp::log_sum_exp(a) == doctest::Approx(expected).epsilon(1e-14));
}
