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

/**
 * @file
 * Strike-normalized Black-Scholes-Merton call pricing.
 *
 * Prices are expressed per unit strike: with moneyness m = S/K the call
 * value is C/K = m N(d1) - exp(-rT) N(d2).
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string_view>

#include "finqbit/error.hpp"

namespace finqbit {

/// One option-pricing input. Feature order (m, T, r, sigma) is used
/// wherever a point is indexed as a vector.
struct MarketPoint {
    double m = 1.0;     ///< moneyness S/K
    double T = 1.0;     ///< time to maturity in years
    double r = 0.0;     ///< annualized risk-free rate
    double sigma = 0.0; ///< annualized volatility

    static constexpr std::size_t kFeatures = 4;

    [[nodiscard]] double operator[](std::size_t i) const {
        switch (i) {
        case 0: return m;
        case 1: return T;
        case 2: return r;
        case 3: return sigma;
        default: throw ValidationError("feature index out of range");
        }
    }

    double &operator[](std::size_t i) {
        switch (i) {
        case 0: return m;
        case 1: return T;
        case 2: return r;
        case 3: return sigma;
        default: throw ValidationError("feature index out of range");
        }
    }

    friend bool operator==(const MarketPoint &, const MarketPoint &) = default;
};

enum class Feature : std::size_t { M = 0, T = 1, R = 2, Sigma = 3 };

inline constexpr std::array<std::string_view, 4> kFeatureNames{"m", "T", "r",
                                                               "sigma"};

struct FeatureRange {
    double lo;
    double hi;
    [[nodiscard]] constexpr bool contains(double v) const noexcept {
        return v >= lo && v <= hi;
    }
};

/// Sampling ranges of the synthetic generator, in feature order.
inline constexpr std::array<FeatureRange, 4> kGeneratorRanges{{
    {0.8, 1.2},   // m
    {0.2, 1.1},   // T
    {0.02, 0.1},  // r
    {0.01, 1.0},  // sigma
}};

[[nodiscard]] inline bool in_generator_range(const MarketPoint &p) noexcept {
    for (std::size_t i = 0; i < 4; ++i) {
        if (!kGeneratorRanges[i].contains(p[i])) {
            return false;
        }
    }
    return true;
}

/// Throws DomainError unless m > 0, T >= 0, sigma >= 0 and all are finite.
inline void validate_market_point(const MarketPoint &p) {
    for (std::size_t i = 0; i < 4; ++i) {
        if (!std::isfinite(p[i])) {
            throw DomainError(std::string(kFeatureNames[i]) + " is not finite");
        }
    }
    if (!(p.m > 0.0)) {
        throw DomainError("moneyness must be positive");
    }
    if (p.T < 0.0) {
        throw DomainError("time to maturity must be non-negative");
    }
    if (p.sigma < 0.0) {
        throw DomainError("volatility must be non-negative");
    }
}

/// Standard normal CDF via the complementary error function.
///
/// glibc's erfc is a piecewise rational approximation accurate to about one
/// ulp in relative terms, so the absolute error of N(x) stays far below
/// 1e-10 and the lower tail keeps full relative precision.
[[nodiscard]] inline double norm_cdf(double x) {
    if (!std::isfinite(x)) {
        throw DomainError("norm_cdf: argument is not finite");
    }
    return 0.5 * std::erfc(-x * (1.0 / std::numbers::sqrt2));
}

struct KernelPair {
    double d1;
    double d2;
};

/// d1 and d2 for the nondegenerate regime T > 0, sigma > 0.
[[nodiscard]] inline KernelPair bsm_kernels(const MarketPoint &p) {
    if (!(p.T > 0.0) || !(p.sigma > 0.0)) {
        throw DegenerateRegime(
            "bsm_kernels requires T > 0 and sigma > 0; use the limit branch");
    }
    const double vol = p.sigma * std::sqrt(p.T);
    const double d1 =
        (std::log(p.m) + (p.r + 0.5 * p.sigma * p.sigma) * p.T) / vol;
    return {d1, d1 - vol};
}

/// Normalized European call price C/K.
///
/// T == 0 returns the payoff max(m - 1, 0); sigma == 0 returns the
/// discounted forward intrinsic value max(m - exp(-rT), 0).
[[nodiscard]] inline double bsm_price(const MarketPoint &p) {
    validate_market_point(p);
    if (p.T == 0.0) {
        return std::max(p.m - 1.0, 0.0);
    }
    const double discount = std::exp(-p.r * p.T);
    if (p.sigma == 0.0) {
        return std::max(p.m - discount, 0.0);
    }
    const auto [d1, d2] = bsm_kernels(p);
    const double price = p.m * norm_cdf(d1) - discount * norm_cdf(d2);
    // Cancellation can leave a -1e-17 residue deep out of the money.
    return std::clamp(price, std::max(p.m - discount, 0.0), p.m);
}

} // namespace finqbit
