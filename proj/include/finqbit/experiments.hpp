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
 * Evaluation protocol: OLS baseline, shot-noise grids, stability tracks,
 * readout mitigation and shot-ladder convergence.
 *
 * Shot-grid aggregation conventions, per (R, N) cell over a point set:
 *  - mean_i, std_i: mean and sample std of the R per-repetition prices at point i;
 *  - mae       = average over points of |mean_i - BSM_i|;
 *  - std_dev   = average over points of std_i;
 *  - max_error = max over points of (1/R) sum_r |price_ri - BSM_i|;
 *  - r2        = R^2 of the mean curve against the BSM values.
 */

#pragma once

#include <cmath>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "finqbit/bsm.hpp"
#include "finqbit/dataset.hpp"
#include "finqbit/error.hpp"
#include "finqbit/metrics.hpp"
#include "finqbit/model.hpp"
#include "finqbit/parallel.hpp"
#include "finqbit/quantum.hpp"
#include "finqbit/random.hpp"
#include "finqbit/readout.hpp"

namespace finqbit {

// OLS ----------------------------------------------------------------------

struct OlsModel {
    /// Intercept, then one coefficient per feature in (m, T, r, sigma) order.
    std::array<double, 5> coef{};

    [[nodiscard]] double predict(const MarketPoint &x) const {
        double y = coef[0];
        for (std::size_t f = 0; f < 4; ++f) {
            y += coef[f + 1] * x[f];
        }
        return y;
    }
};

/// Least squares on a design with a leading column of ones. Throws
/// ValidationError if fewer rows than columns or the design is rank deficient.
[[nodiscard]] inline Eigen::VectorXd least_squares(const Eigen::MatrixXd &X,
                                                   const Eigen::VectorXd &y) {
    if (X.rows() != y.size()) {
        throw ValidationError("least_squares: design and label sizes differ");
    }
    if (X.rows() < X.cols()) {
        throw ValidationError("least_squares: need at least " + std::to_string(X.cols()) +
                              " samples");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < X.cols()) {
        throw ValidationError("least_squares: design matrix is rank deficient");
    }
    return qr.solve(y);
}

[[nodiscard]] inline Eigen::MatrixXd ols_design(std::span<const MarketPoint> points) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(points.size()), 5);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        X(row, 0) = 1.0;
        for (std::size_t f = 0; f < 4; ++f) {
            X(row, static_cast<Eigen::Index>(f + 1)) = points[i][f];
        }
    }
    return X;
}

[[nodiscard]] inline OlsModel ols_fit(const Dataset &train) {
    if (train.size() < 5) {
        throw ValidationError("ols_fit: need at least 5 samples");
    }
    const Eigen::VectorXd y =
        Eigen::Map<const Eigen::VectorXd>(train.labels.data(),
                                          static_cast<Eigen::Index>(train.labels.size()));
    const auto beta = least_squares(ols_design(train.points), y);
    OlsModel m;
    for (std::size_t k = 0; k < 5; ++k) {
        m.coef[k] = beta(static_cast<Eigen::Index>(k));
    }
    return m;
}

[[nodiscard]] inline std::vector<double> ols_predict(const OlsModel &model,
                                                     std::span<const MarketPoint> points) {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto &p : points) {
        out.push_back(model.predict(p));
    }
    return out;
}

inline nlohmann::json to_json(const OlsModel &m) {
    return {{"intercept", m.coef[0]},
            {"coefficients", {{"m", m.coef[1]}, {"T", m.coef[2]}, {"r", m.coef[3]},
                              {"sigma", m.coef[4]}}}};
}

// Shot grid ----------------------------------------------------------------

struct ShotGridConfig {
    std::size_t repetitions = 20;
    std::uint64_t shots = 500;
    std::vector<MarketPoint> points;
    std::uint64_t seed = 0;

    void validate() const {
        if (repetitions < 1) {
            throw ValidationError("shot grid: repetitions must be at least 1");
        }
        if (shots < 1) {
            throw ValidationError("shot grid: shots must be at least 1");
        }
        if (points.empty()) {
            throw ValidationError("shot grid: no evaluation points");
        }
        for (const auto &p : points) {
            validate_market_point(p);
        }
    }
};

struct ExperimentStats {
    std::size_t repetitions = 0;
    std::uint64_t shots = 0;
    double mae = 0;
    double std_dev = 0;
    double max_error = 0;
    std::optional<double> r2;
    std::vector<double> bsm;        ///< per point
    std::vector<double> mean_price; ///< per point
    std::vector<double> std_price;  ///< per point
    std::vector<std::vector<double>> prices; ///< [repetition][point]
};

/// The standard grid R in {20, 50} x N in {500, 2000, 5000}.
[[nodiscard]] inline std::vector<ShotGridConfig>
standard_shot_grid(const std::vector<MarketPoint> &points, std::uint64_t seed) {
    std::vector<ShotGridConfig> grid;
    for (std::size_t R : {20, 50}) {
        for (std::uint64_t N : {500, 2000, 5000}) {
            grid.push_back({R, N, points, seed});
        }
    }
    return grid;
}

/// Readout-qubit price from N shots. Repetition r at point i of the cell
/// (R, N) draws from derive_seed(seed, {kShots, R, N, r, i}).
[[nodiscard]] inline double sampled_price(const StateVector &state, std::uint64_t shots,
                                          std::uint64_t seed) {
    return clamp_price(estimate_expectation_from_counts(sample_shots(state, shots, seed), 0));
}

namespace detail {

inline std::vector<StateVector> prepare_states(const ModelParams &p,
                                               std::span<const MarketPoint> points) {
    p.validate();
    std::vector<StateVector> states;
    states.reserve(points.size());
    for (const auto &x : points) {
        states.push_back(p.ansatz.circuit(x).run(p.values));
    }
    return states;
}

inline void summarize(ExperimentStats &s) {
    const std::size_t P = s.bsm.size();
    const auto R = static_cast<double>(s.prices.size());
    s.mean_price.assign(P, 0.0);
    s.std_price.assign(P, 0.0);
    std::vector<double> mean_abs(P, 0.0);
    for (std::size_t i = 0; i < P; ++i) {
        for (const auto &rep : s.prices) {
            s.mean_price[i] += rep[i];
            mean_abs[i] += std::abs(rep[i] - s.bsm[i]);
        }
        s.mean_price[i] /= R;
        mean_abs[i] /= R;
        double ss = 0;
        for (const auto &rep : s.prices) {
            ss += (rep[i] - s.mean_price[i]) * (rep[i] - s.mean_price[i]);
        }
        s.std_price[i] = s.prices.size() > 1 ? std::sqrt(ss / (R - 1.0)) : 0.0;
    }
    s.mae = 0;
    s.std_dev = 0;
    s.max_error = 0;
    for (std::size_t i = 0; i < P; ++i) {
        s.mae += std::abs(s.mean_price[i] - s.bsm[i]);
        s.std_dev += s.std_price[i];
        s.max_error = std::max(s.max_error, mean_abs[i]);
    }
    s.mae /= static_cast<double>(P);
    s.std_dev /= static_cast<double>(P);
    s.r2 = compute_metrics(s.mean_price, s.bsm).r2;
}

} // namespace detail

[[nodiscard]] inline ExperimentStats run_shot_cell(const ModelParams &p, const ShotGridConfig &cfg,
                                                   std::size_t jobs = 1) {
    cfg.validate();
    const auto states = detail::prepare_states(p, cfg.points);
    ExperimentStats s;
    s.repetitions = cfg.repetitions;
    s.shots = cfg.shots;
    for (const auto &x : cfg.points) {
        s.bsm.push_back(bsm_price(x));
    }
    s.prices.assign(cfg.repetitions, std::vector<double>(cfg.points.size()));
    parallel_for(cfg.repetitions, jobs, [&](std::size_t r) {
        for (std::size_t i = 0; i < states.size(); ++i) {
            s.prices[r][i] = sampled_price(
                states[i], cfg.shots,
                derive_seed(cfg.seed, {stream::kShots, cfg.repetitions, cfg.shots, r, i}));
        }
    });
    detail::summarize(s);
    return s;
}

[[nodiscard]] inline std::vector<ExperimentStats>
run_shot_grid(const ModelParams &p, const std::vector<ShotGridConfig> &grid, std::size_t jobs = 1) {
    std::vector<ExperimentStats> out;
    out.reserve(grid.size());
    for (const auto &cfg : grid) {
        out.push_back(run_shot_cell(p, cfg, jobs));
    }
    return out;
}

/// Exact-mode counterpart of a grid cell: every repetition is the statevector price.
[[nodiscard]] inline ExperimentStats exact_cell(const ModelParams &p,
                                                const std::vector<MarketPoint> &points) {
    ExperimentStats s;
    s.repetitions = 1;
    s.shots = 0;
    s.prices.emplace_back();
    for (const auto &x : points) {
        s.bsm.push_back(bsm_price(x));
        s.prices[0].push_back(predict_price(x, p));
    }
    detail::summarize(s);
    return s;
}

inline nlohmann::json to_json(const ExperimentStats &s) {
    return {{"repetitions", s.repetitions},
            {"shots", s.shots},
            {"mae", s.mae},
            {"std_dev", s.std_dev},
            {"max_error", s.max_error},
            {"r2", detail::opt_json(s.r2)},
            {"bsm", s.bsm},
            {"mean_price", s.mean_price},
            {"std_price", s.std_price}};
}

inline nlohmann::json shot_grid_json(const std::vector<ExperimentStats> &cells) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto &c : cells) {
        arr.push_back(to_json(c));
    }
    return {{"schema_version", 1}, {"cells", arr}};
}

/// Columns: repetitions,shots,mae,std_dev,max_error,r2
inline void write_shot_grid_csv(std::ostream &os, const std::vector<ExperimentStats> &cells) {
    os << "repetitions,shots,mae,std_dev,max_error,r2\n";
    for (const auto &c : cells) {
        os << c.repetitions << ',' << c.shots << ',' << detail::format_real(c.mae) << ','
           << detail::format_real(c.std_dev) << ',' << detail::format_real(c.max_error) << ','
           << (c.r2 ? detail::format_real(*c.r2) : std::string("nan")) << '\n';
    }
}

// Readout mitigation -------------------------------------------------------

namespace detail {

inline Prob2 clamp_renormalize(Prob2 p) {
    p[0] = std::max(p[0], 0.0);
    p[1] = std::max(p[1], 0.0);
    const double s = p[0] + p[1];
    if (!(s > 0)) {
        throw ValidationError("mitigation produced an all-zero distribution");
    }
    return {p[0] / s, p[1] / s};
}

inline void check_distribution(const Prob2 &raw) {
    if (!std::isfinite(raw[0]) || !std::isfinite(raw[1]) || raw[0] < -1e-12 ||
        raw[1] < -1e-12 || std::abs(raw[0] + raw[1] - 1.0) > 1e-9) {
        throw ValidationError("mitigate_readout: raw input is not a probability vector");
    }
}

} // namespace detail

/// A^{-1} raw before clamping.
[[nodiscard]] inline Prob2 unclamped_mitigation(const Prob2 &raw,
                                                const std::array<double, 4> &inverse) {
    detail::check_distribution(raw);
    return apply_2x2(inverse, raw);
}

/// A^{-1} raw, negative entries clamped to 0, renormalized.
[[nodiscard]] inline Prob2 mitigate_readout(const Prob2 &raw, const std::array<double, 4> &inverse) {
    return detail::clamp_renormalize(unclamped_mitigation(raw, inverse));
}

[[nodiscard]] inline Prob2 mitigate_readout(const Prob2 &raw, const AssignmentMatrix &a) {
    return mitigate_readout(raw, a.inverse());
}

[[nodiscard]] inline double price_from_probs(const Prob2 &p) { return clamp_price(p[0] - p[1]); }

struct MitigationStudy {
    std::vector<double> truth;     ///< noiseless model price
    std::vector<double> corrupted; ///< after the forward channel
    std::vector<double> mitigated; ///< after inversion
    double mse_corrupted = 0;
    double mse_mitigated = 0;

    /// Relative MSE reduction, 1 - mse_mitigated / mse_corrupted.
    [[nodiscard]] double reduction() const {
        return mse_corrupted > 0 ? 1.0 - mse_mitigated / mse_corrupted : 0.0;
    }
};

/// Corrupts readout-qubit probabilities with A and mitigates with `inverse`.
/// shots == 0 uses exact probabilities; otherwise point i draws N shots from
/// derive_seed(seed, {kReadout, i}) and each shot is misread per A.
[[nodiscard]] inline MitigationStudy
mitigation_study(const ModelParams &p, std::span<const MarketPoint> points,
                 const AssignmentMatrix &A, const std::array<double, 4> &inverse,
                 std::uint64_t shots = 0, std::uint64_t seed = 0) {
    A.validate();
    if (points.empty()) {
        throw ValidationError("mitigation_study: no points");
    }
    const auto states = detail::prepare_states(p, points);
    MitigationStudy s;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const double z = expectation_z(states[i], 0);
        const Prob2 clean{(1.0 + z) / 2.0, (1.0 - z) / 2.0};
        Prob2 raw;
        if (shots == 0) {
            raw = apply_readout_noise(clean, A);
        } else {
            Rng rng(derive_seed(seed, {stream::kReadout, i}));
            const auto outcome = sample_shots(states[i], shots, rng.engine()());
            const auto n = corrupt_counts(marginal_counts(outcome, 0), A, rng);
            raw = {static_cast<double>(n[0]) / static_cast<double>(shots),
                   static_cast<double>(n[1]) / static_cast<double>(shots)};
        }
        s.truth.push_back(clamp_price(z));
        s.corrupted.push_back(price_from_probs(raw));
        s.mitigated.push_back(price_from_probs(mitigate_readout(raw, inverse)));
    }
    s.mse_corrupted = compute_metrics(s.corrupted, s.truth).mse;
    s.mse_mitigated = compute_metrics(s.mitigated, s.truth).mse;
    return s;
}

inline nlohmann::json to_json(const MitigationStudy &s) {
    return {{"schema_version", 1},
            {"mse_corrupted", s.mse_corrupted},
            {"mse_mitigated", s.mse_mitigated},
            {"reduction", s.reduction()},
            {"truth", s.truth},
            {"corrupted", s.corrupted},
            {"mitigated", s.mitigated}};
}

// Stability ----------------------------------------------------------------

struct StabilityTrack {
    std::vector<MarketPoint> points;
    std::vector<double> exact;               ///< noiseless exact price per point
    std::vector<std::vector<double>> series; ///< [point][repetition]
};

/// R sequential N-shot estimates per point. With `noise`, every shot of the
/// readout qubit is misread per A before estimation. shots == 0 gives the
/// exact price (with the channel's expected effect when noisy).
[[nodiscard]] inline StabilityTrack
stability_track(const ModelParams &p, const std::vector<MarketPoint> &points, std::size_t R,
                std::uint64_t shots, const std::optional<AssignmentMatrix> &noise,
                std::uint64_t seed) {
    if (R < 1) {
        throw ValidationError("stability_track: repetitions must be at least 1");
    }
    if (points.empty()) {
        throw ValidationError("stability_track: no points");
    }
    const auto states = detail::prepare_states(p, points);
    StabilityTrack t;
    t.points = points;
    t.series.assign(points.size(), std::vector<double>(R));
    for (std::size_t i = 0; i < states.size(); ++i) {
        const double z = expectation_z(states[i], 0);
        t.exact.push_back(clamp_price(z));
        for (std::size_t r = 0; r < R; ++r) {
            if (shots == 0) {
                Prob2 pr{(1.0 + z) / 2.0, (1.0 - z) / 2.0};
                if (noise) {
                    pr = apply_readout_noise(pr, *noise);
                }
                t.series[i][r] = price_from_probs(pr);
                continue;
            }
            Rng rng(derive_seed(seed, {stream::kShots, i, r}));
            auto n = marginal_counts(sample_shots(states[i], shots, rng.engine()()), 0);
            if (noise) {
                n = corrupt_counts(n, *noise, rng);
            }
            t.series[i][r] = clamp_price((static_cast<double>(n[0]) - static_cast<double>(n[1])) /
                                         static_cast<double>(shots));
        }
    }
    return t;
}

/// Columns: repetition,m,T,r,sigma,price,exact
inline void write_stability_csv(std::ostream &os, const StabilityTrack &t) {
    os << "repetition,m,T,r,sigma,price,exact\n";
    for (std::size_t i = 0; i < t.points.size(); ++i) {
        const auto &x = t.points[i];
        for (std::size_t r = 0; r < t.series[i].size(); ++r) {
            os << r << ',' << detail::format_real(x.m) << ',' << detail::format_real(x.T) << ','
               << detail::format_real(x.r) << ',' << detail::format_real(x.sigma) << ','
               << detail::format_real(t.series[i][r]) << ',' << detail::format_real(t.exact[i])
               << '\n';
        }
    }
}

inline nlohmann::json to_json(const StabilityTrack &t) {
    nlohmann::json pts = nlohmann::json::array();
    for (std::size_t i = 0; i < t.points.size(); ++i) {
        const auto &x = t.points[i];
        pts.push_back({{"m", x.m}, {"T", x.T}, {"r", x.r}, {"sigma", x.sigma},
                       {"exact", t.exact[i]}, {"series", t.series[i]}});
    }
    return {{"schema_version", 1}, {"points", pts}};
}

// Convergence --------------------------------------------------------------

struct ConvergenceRung {
    std::uint64_t shots = 0;
    double mean = 0;
    double std_dev = 0;
};

struct ConvergenceReport {
    MarketPoint point;
    double exact = 0;
    double bsm = 0;
    std::vector<ConvergenceRung> rungs;

    /// |mean(top) - mean(top - 1)| / |mean(top)|.
    [[nodiscard]] double top_fluctuation() const {
        if (rungs.size() < 2) {
            return 0.0;
        }
        const double a = rungs[rungs.size() - 1].mean;
        const double b = rungs[rungs.size() - 2].mean;
        return a != 0 ? std::abs(a - b) / std::abs(a) : std::abs(a - b);
    }
};

[[nodiscard]] inline std::vector<std::uint64_t> default_shot_ladder() {
    return {500, 1000, 2000, 3000, 4000, 5000};
}

/// Mean and sample std of R independent N-shot price estimates per rung.
/// Repetition r of rung N draws from derive_seed(seed, {kShots, N, r}).
[[nodiscard]] inline ConvergenceReport
convergence_analysis(const ModelParams &p, const MarketPoint &point,
                     const std::vector<std::uint64_t> &ladder, std::size_t R, std::uint64_t seed) {
    if (ladder.empty()) {
        throw ValidationError("convergence_analysis: empty shot ladder");
    }
    for (std::size_t k = 0; k < ladder.size(); ++k) {
        if (ladder[k] < 1 || (k > 0 && ladder[k] <= ladder[k - 1])) {
            throw ValidationError("convergence_analysis: shot ladder must be strictly ascending");
        }
    }
    if (R < 1) {
        throw ValidationError("convergence_analysis: repetitions must be at least 1");
    }
    const auto state = detail::prepare_states(p, std::span(&point, 1)).front();
    ConvergenceReport rep;
    rep.point = point;
    rep.exact = clamp_price(expectation_z(state, 0));
    rep.bsm = bsm_price(point);
    for (const auto N : ladder) {
        std::vector<double> v(R);
        for (std::size_t r = 0; r < R; ++r) {
            v[r] = sampled_price(state, N, derive_seed(seed, {stream::kShots, N, r}));
        }
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(R);
        double ss = 0;
        for (double x : v) {
            ss += (x - mean) * (x - mean);
        }
        rep.rungs.push_back({N, mean, R > 1 ? std::sqrt(ss / static_cast<double>(R - 1)) : 0.0});
    }
    return rep;
}

/// Columns: shots,mean,std_dev,exact,bsm
inline void write_convergence_csv(std::ostream &os, const ConvergenceReport &c) {
    os << "shots,mean,std_dev,exact,bsm\n";
    for (const auto &r : c.rungs) {
        os << r.shots << ',' << detail::format_real(r.mean) << ','
           << detail::format_real(r.std_dev) << ',' << detail::format_real(c.exact) << ','
           << detail::format_real(c.bsm) << '\n';
    }
}

inline nlohmann::json to_json(const ConvergenceReport &c) {
    nlohmann::json rungs = nlohmann::json::array();
    for (const auto &r : c.rungs) {
        rungs.push_back({{"shots", r.shots}, {"mean", r.mean}, {"std_dev", r.std_dev}});
    }
    return {{"schema_version", 1},
            {"point", {{"m", c.point.m}, {"T", c.point.T}, {"r", c.point.r},
                       {"sigma", c.point.sigma}}},
            {"exact", c.exact},
            {"bsm", c.bsm},
            {"top_fluctuation", c.top_fluctuation()},
            {"rungs", rungs}};
}

} // namespace finqbit
