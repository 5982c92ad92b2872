// Copyright 2026 The finqbit Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "finqbit/bsm.hpp"
#include "oracles.hpp"

using namespace finqbit;
using Catch::Approx;

TEST_CASE("norm_cdf basic values", "[bsm]") {
    CHECK(norm_cdf(0.0) == 0.5);
    CHECK(std::abs(norm_cdf(1.959964) - 0.975) < 1e-6);
    CHECK(norm_cdf(-8.0) <= 1e-14);
    CHECK(norm_cdf(-8.0) > 0.0);
    CHECK(norm_cdf(40.0) == 1.0);
}

TEST_CASE("norm_cdf agrees with quadrature of the density", "[bsm][oracle]") {
    for (double x = -9.0; x <= 9.0; x += 0.37) {
        INFO("x = " << x);
        CHECK(std::abs(norm_cdf(x) - oracle::normal_cdf(x)) <= 1e-10);
    }
    // Lower tail keeps relative precision.
    for (double x : {-8.0, -10.0, -20.0}) {
        const double ref = oracle::normal_cdf(x);
        INFO("x = " << x << " ref " << ref);
        CHECK(std::abs(norm_cdf(x) / ref - 1.0) < 1e-8);
    }
}

TEST_CASE("norm_cdf is monotone and symmetric", "[bsm][property]") {
    double prev = 0.0;
    for (double x = -12.0; x <= 12.0; x += 0.01) {
        const double v = norm_cdf(x);
        CHECK(v >= prev);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(std::abs(v + norm_cdf(-x) - 1.0) < 1e-15);
        prev = v;
    }
}

TEST_CASE("norm_cdf rejects non-finite input", "[bsm][error]") {
    CHECK_THROWS_AS(norm_cdf(std::numeric_limits<double>::quiet_NaN()), DomainError);
    CHECK_THROWS_AS(norm_cdf(std::numeric_limits<double>::infinity()), DomainError);
}

TEST_CASE("bsm_kernels hand-evaluated point", "[bsm]") {
    const auto k = bsm_kernels({1.0, 1.0, 0.05, 0.2});
    CHECK(k.d1 == Approx(0.35).margin(1e-14));
    CHECK(k.d2 == Approx(0.15).margin(1e-14));
}

TEST_CASE("bsm_kernels symmetric when the log-forward vanishes", "[bsm]") {
    const auto k = bsm_kernels({1.0, 0.7, 0.0, 0.3});
    CHECK(k.d1 == Approx(-k.d2).margin(1e-15));
    CHECK(k.d1 == Approx(0.5 * 0.3 * std::sqrt(0.7)).margin(1e-15));

    const double T = 0.8, r = 0.06, s = 0.45;
    const auto k2 = bsm_kernels({std::exp(-r * T), T, r, s});
    CHECK(k2.d1 == Approx(0.5 * s * std::sqrt(T)).margin(1e-14));
}

TEST_CASE("bsm_kernels d2 is exactly d1 minus the total volatility", "[bsm][property]") {
    std::mt19937_64 g(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const MarketPoint p{0.5 + u(g), 0.05 + 2 * u(g), 0.1 * u(g), 0.01 + u(g)};
        const auto k = bsm_kernels(p);
        CHECK(k.d2 == k.d1 - p.sigma * std::sqrt(p.T));
    }
}

TEST_CASE("bsm_kernels signals the degenerate regime", "[bsm][error]") {
    CHECK_THROWS_AS(bsm_kernels({1.0, 0.0, 0.05, 0.2}), DegenerateRegime);
    CHECK_THROWS_AS(bsm_kernels({1.0, 1.0, 0.05, 0.0}), DegenerateRegime);
}

TEST_CASE("bsm_price at the benchmark moneyness grid", "[bsm]") {
    const double expected[] = {0.0186, 0.0509, 0.1045, 0.1766, 0.2617};
    const double ms[] = {0.8, 0.9, 1.0, 1.1, 1.2};
    for (int i = 0; i < 5; ++i) {
        INFO("m = " << ms[i]);
        CHECK(std::abs(bsm_price({ms[i], 1.0, 0.05, 0.2}) - expected[i]) <= 5e-4);
    }
}

TEST_CASE("bsm_price deterministic limits", "[bsm]") {
    CHECK(bsm_price({1.2, 1.0, 0.05, 0.0}) == Approx(1.2 - std::exp(-0.05)).margin(1e-15));
    CHECK(bsm_price({0.9, 1.0, 0.05, 0.0}) == 0.0);
    CHECK(bsm_price({1.1, 0.0, 0.05, 0.3}) == Approx(0.1).margin(1e-15));
    CHECK(bsm_price({0.9, 0.0, 0.05, 0.3}) == 0.0);
}

TEST_CASE("bsm_price is continuous into its limits", "[bsm][property]") {
    for (double m : {0.9, 1.0, 1.1}) {
        CHECK(std::abs(bsm_price({m, 1.0, 0.05, 1e-9}) - bsm_price({m, 1.0, 0.05, 0.0})) < 1e-8);
        CHECK(std::abs(bsm_price({m, 1e-12, 0.05, 0.2}) - bsm_price({m, 0.0, 0.05, 0.2})) < 1e-6);
    }
}

TEST_CASE("bsm_price matches lognormal integration", "[bsm][oracle]") {
    std::mt19937_64 g(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0;
    for (int i = 0; i < 60; ++i) {
        const MarketPoint p{0.8 + 0.4 * u(g), 0.2 + 0.9 * u(g), 0.02 + 0.08 * u(g),
                            0.01 + 0.99 * u(g)};
        worst = std::max(worst, std::abs(bsm_price(p) - oracle::lognormal_call(p.m, p.T, p.r,
                                                                                p.sigma)));
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("bsm_price respects no-arbitrage bounds", "[bsm][property]") {
    std::mt19937_64 g(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const MarketPoint p{0.05 + 3 * u(g), 3 * u(g), 0.2 * u(g) - 0.05, 2 * u(g)};
        const double c = bsm_price(p);
        CHECK(c >= std::max(p.m - std::exp(-p.r * p.T), 0.0));
        CHECK(c >= 0.0);
        CHECK(c <= p.m);
    }
}

TEST_CASE("bsm_price is monotone in moneyness and volatility", "[bsm][property]") {
    double prev = -1;
    for (double m = 0.8; m <= 1.2; m += 0.01) {
        const double c = bsm_price({m, 0.6, 0.04, 0.3});
        CHECK(c > prev);
        prev = c;
    }
    prev = -1;
    for (double s = 0.01; s <= 1.0; s += 0.01) {
        const double c = bsm_price({1.0, 0.6, 0.04, s});
        CHECK(c > prev);
        prev = c;
    }
}

TEST_CASE("bsm_price satisfies put-call parity against an integrated put", "[bsm][oracle]") {
    // put = e^{-rT} E[max(1 - S_T/K, 0)], integrated independently of the call oracle.
    const double m = 0.95, T = 0.9, r = 0.03, s = 0.35;
    const double v = s * std::sqrt(T), drift = (r - 0.5 * s * s) * T;
    const double z_star = (-std::log(m) - drift) / v;
    const double put = std::exp(-r * T) *
                       oracle::integrate(
                           [&](double z) {
                               return (1.0 - m * std::exp(drift + v * z)) *
                                      oracle::gauss_density(z);
                           },
                           z_star - 40.0, z_star, 1e-13);
    CHECK(bsm_price({m, T, r, s}) - put == Approx(m - std::exp(-r * T)).margin(1e-10));
}

TEST_CASE("validate_market_point rejects invalid inputs", "[bsm][error]") {
    CHECK_THROWS_AS(bsm_price({0.0, 1.0, 0.05, 0.2}), DomainError);
    CHECK_THROWS_AS(bsm_price({1.0, -0.1, 0.05, 0.2}), DomainError);
    CHECK_THROWS_AS(bsm_price({1.0, 1.0, 0.05, -0.2}), DomainError);
    CHECK_THROWS_AS(bsm_price({1.0, 1.0, std::nan(""), 0.2}), DomainError);
}
