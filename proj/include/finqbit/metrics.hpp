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
 * Regression metrics and the moneyness-regime breakdown.
 */

#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "finqbit/bsm.hpp"
#include "finqbit/error.hpp"

namespace finqbit {

struct MetricsReport {
    double mse = 0;
    double rmse = 0;
    double mae = 0;
    std::optional<double> r2; ///< empty when the labels have zero variance
    double max_error = 0;
    std::size_t n = 0;
};

[[nodiscard]] inline MetricsReport compute_metrics(std::span<const double> predictions,
                                                   std::span<const double> labels) {
    if (predictions.size() != labels.size()) {
        throw ValidationError("compute_metrics: predictions and labels differ in length");
    }
    if (labels.empty()) {
        throw ValidationError("compute_metrics: no samples");
    }
    const auto n = static_cast<double>(labels.size());
    double sse = 0, sae = 0, max_err = 0, mean = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double e = predictions[i] - labels[i];
        sse += e * e;
        sae += std::abs(e);
        max_err = std::max(max_err, std::abs(e));
        mean += labels[i];
    }
    mean /= n;
    double sst = 0;
    for (double y : labels) {
        sst += (y - mean) * (y - mean);
    }
    MetricsReport r;
    r.n = labels.size();
    r.mse = sse / n;
    r.rmse = std::sqrt(r.mse);
    r.mae = sae / n;
    r.max_error = max_err;
    if (sst > 0) {
        r.r2 = 1.0 - sse / sst;
    }
    return r;
}

enum class Regime { OTM, ATM, ITM };

inline constexpr double kAtmLower = 0.95;
inline constexpr double kAtmUpper = 1.05;

/// OTM for m < 0.95, ATM for 0.95 <= m <= 1.05 (inclusive), ITM above.
[[nodiscard]] constexpr Regime classify_regime(double m) noexcept {
    if (m < kAtmLower) {
        return Regime::OTM;
    }
    return m <= kAtmUpper ? Regime::ATM : Regime::ITM;
}

struct RegimeBreakdown {
    std::optional<double> otm_mse, atm_mse, itm_mse; ///< empty for an empty regime
    std::size_t otm_count = 0, atm_count = 0, itm_count = 0;
    double lower = kAtmLower, upper = kAtmUpper;
};

[[nodiscard]] inline RegimeBreakdown regime_breakdown(std::span<const double> predictions,
                                                      std::span<const double> labels,
                                                      std::span<const MarketPoint> points) {
    if (predictions.size() != labels.size() || labels.size() != points.size()) {
        throw ValidationError("regime_breakdown: inputs are not aligned");
    }
    std::array<double, 3> sse{};
    std::array<std::size_t, 3> count{};
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto r = static_cast<std::size_t>(classify_regime(points[i].m));
        const double e = predictions[i] - labels[i];
        sse[r] += e * e;
        ++count[r];
    }
    auto mse = [&](std::size_t r) -> std::optional<double> {
        if (count[r] == 0) {
            return std::nullopt;
        }
        return sse[r] / static_cast<double>(count[r]);
    };
    RegimeBreakdown b;
    b.otm_mse = mse(0);
    b.atm_mse = mse(1);
    b.itm_mse = mse(2);
    b.otm_count = count[0];
    b.atm_count = count[1];
    b.itm_count = count[2];
    return b;
}

namespace detail {
inline nlohmann::json opt_json(const std::optional<double> &v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}
inline std::optional<double> json_opt(const nlohmann::json &j, const char *key) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return std::nullopt;
    }
    return j.at(key).get<double>();
}
} // namespace detail

inline nlohmann::json to_json(const MetricsReport &m) {
    return {{"mse", m.mse},   {"rmse", m.rmse}, {"mae", m.mae},
            {"r2", detail::opt_json(m.r2)}, {"max_error", m.max_error}, {"n", m.n}};
}

inline MetricsReport metrics_from_json(const nlohmann::json &j) {
    MetricsReport m;
    m.mse = j.at("mse").get<double>();
    m.rmse = j.at("rmse").get<double>();
    m.mae = j.at("mae").get<double>();
    m.r2 = detail::json_opt(j, "r2");
    m.max_error = j.at("max_error").get<double>();
    m.n = j.value("n", std::size_t{0});
    return m;
}

inline nlohmann::json to_json(const RegimeBreakdown &b) {
    return {{"otm_mse", detail::opt_json(b.otm_mse)},
            {"atm_mse", detail::opt_json(b.atm_mse)},
            {"itm_mse", detail::opt_json(b.itm_mse)},
            {"otm_count", b.otm_count},
            {"atm_count", b.atm_count},
            {"itm_count", b.itm_count},
            {"thresholds", {b.lower, b.upper}}};
}

inline RegimeBreakdown regime_from_json(const nlohmann::json &j) {
    RegimeBreakdown b;
    b.otm_mse = detail::json_opt(j, "otm_mse");
    b.atm_mse = detail::json_opt(j, "atm_mse");
    b.itm_mse = detail::json_opt(j, "itm_mse");
    b.otm_count = j.value("otm_count", std::size_t{0});
    b.atm_count = j.value("atm_count", std::size_t{0});
    b.itm_count = j.value("itm_count", std::size_t{0});
    return b;
}

} // namespace finqbit
