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
 * Supervised fitting of circuit parameters to BSM labels.
 *
 * The loss is the MSE of the unclamped readout <Z_0>; the max(0, .) head is
 * applied only when predictions are reported. Validation MSE, which drives
 * early stopping and restart selection, uses the clamped prediction.
 */

#pragma once

#include <cmath>
#include <complex>
#include <algorithm>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "finqbit/dataset.hpp"
#include "finqbit/error.hpp"
#include "finqbit/metrics.hpp"
#include "finqbit/model.hpp"
#include "finqbit/parallel.hpp"
#include "finqbit/parametric.hpp"
#include "finqbit/random.hpp"

namespace finqbit {

inline constexpr int kSchemaVersion = 1;

inline void require_nonempty(const Dataset &d, const char *what) {
    if (d.empty()) {
        throw ValidationError(std::string(what) + ": empty dataset");
    }
    if (d.points.size() != d.labels.size()) {
        throw ValidationError(std::string(what) + ": points and labels differ in length");
    }
}

/// Mean of (<Z_0>(x_i) - y_i)^2 with the unclamped readout.
[[nodiscard]] inline double mse_loss(const ModelParams &p, const Dataset &d) {
    require_nonempty(d, "mse_loss");
    p.validate();
    double s = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double e = raw_output(p, d.points[i]) - d.labels[i];
        s += e * e;
    }
    return s / static_cast<double>(d.size());
}

/// MSE gradient assembled from per-sample shift-rule gradients of <Z_0>.
[[nodiscard]] inline std::vector<double> parameter_shift_gradient(const ModelParams &p,
                                                                  const Dataset &d) {
    require_nonempty(d, "parameter_shift_gradient");
    p.validate();
    std::vector<double> grad(p.values.size(), 0.0);
    const double scale = 2.0 / static_cast<double>(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto pc = p.ansatz.circuit(d.points[i]);
        const double resid = pc.expectation(p.values, 0) - d.labels[i];
        const auto g = parameter_shift_gradient(pc, p.values, 0);
        for (std::size_t k = 0; k < grad.size(); ++k) {
            grad[k] += scale * resid * g[k];
        }
    }
    return grad;
}

/// Loss and its gradient by reverse-mode sweeps, summed in index order.
inline double loss_and_gradient(const ModelParams &p, const Dataset &d,
                                std::span<const std::size_t> rows, std::span<double> grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(rows.size());
    std::vector<double> g(grad.size());
    double loss = 0;
    for (auto i : rows) {
        std::fill(g.begin(), g.end(), 0.0);
        const auto pc = p.ansatz.circuit(d.points[i]);
        const double z = adjoint_gradient(pc, p.values, g, 1.0, 0);
        const double resid = z - d.labels[i];
        loss += resid * resid;
        for (std::size_t k = 0; k < grad.size(); ++k) {
            grad[k] += 2.0 * inv_n * resid * g[k];
        }
    }
    return loss * inv_n;
}

/// MSE of clamped predictions.
[[nodiscard]] inline double clamped_mse(const ModelParams &p, const Dataset &d) {
    double s = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double e = clamp_price(raw_output(p, d.points[i])) - d.labels[i];
        s += e * e;
    }
    return s / static_cast<double>(d.size());
}

[[nodiscard]] inline std::vector<double> predict_all(const ModelParams &p,
                                                     std::span<const MarketPoint> points) {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto &x : points) {
        out.push_back(clamp_price(raw_output(p, x)));
    }
    return out;
}

class Adam {
  public:
    Adam(std::size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

    void set_learning_rate(double lr) noexcept { lr_ = lr; }

    void step(std::span<double> params, std::span<const double> grad) {
        ++t_;
        const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
            v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
            params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
        }
    }

  private:
    double lr_, beta1_, beta2_, eps_;
    std::vector<double> m_, v_;
    std::uint64_t t_ = 0;
};

struct TrainConfig {
    double learning_rate = 0.05;
    std::size_t max_iters = 1000;
    std::size_t batch = 0; ///< 0 = full batch
    std::size_t restarts = 5;
    std::uint64_t seed = 0;
    std::size_t early_stop_patience = 100;
    Ansatz target = Ansatz::finqbit();
    std::size_t jobs = 1;

    void validate() const {
        if (!(learning_rate > 0) || !std::isfinite(learning_rate)) {
            throw ValidationError("learning_rate must be positive");
        }
        if (max_iters < 1) {
            throw ValidationError("max_iters must be at least 1");
        }
        if (restarts < 1) {
            throw ValidationError("restarts must be at least 1");
        }
        (void)target.n_params();
    }
};

struct LossRecord {
    std::size_t iter;
    double train_mse;
    double val_mse;
};

struct TrainReport {
    ModelParams best_params;
    std::vector<LossRecord> loss_history; ///< of the selected restart
    MetricsReport final_metrics;          ///< clamped predictions on the held-out set
    std::size_t restart_index = 0;
    double best_val_mse = 0;
    std::vector<double> restart_val_mse; ///< best validation MSE per restart
};

/// Initial parameters: rotation angles ~ U(-pi, pi), encoding scalers 1.
[[nodiscard]] inline ModelParams initial_params(const Ansatz &a, std::uint64_t seed) {
    Rng rng(seed);
    ModelParams p{a, std::vector<double>(a.n_params())};
    for (auto &v : p.values) {
        v = rng.uniform(-std::numbers::pi, std::numbers::pi);
    }
    if (a.variant == Variant::Finqbit) {
        std::fill(p.values.begin() + FinqbitParams::kTheta, p.values.end(), 1.0);
    }
    return p;
}

namespace detail {

struct RestartResult {
    ModelParams best;
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<LossRecord> history;
};

inline RestartResult run_restart(const TrainConfig &cfg, const Dataset &train_set,
                                 const Dataset &val_set, std::size_t restart) {
    auto params = initial_params(cfg.target, derive_seed(cfg.seed, {stream::kInit, restart}));
    Rng batch_rng(derive_seed(cfg.seed, {stream::kInit, restart, 1}));
    Adam opt(params.values.size(), cfg.learning_rate);
    std::vector<double> grad(params.values.size());
    std::vector<std::size_t> rows(train_set.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    const bool full = cfg.batch == 0 || cfg.batch >= train_set.size();

    RestartResult res;
    res.best = params;
    double initial = 0;
    std::size_t diverging = 0, stale = 0;
    for (std::size_t it = 0; it < cfg.max_iters; ++it) {
        std::span<const std::size_t> batch(rows);
        if (!full) {
            std::shuffle(rows.begin(), rows.end(), batch_rng.engine());
            batch = batch.first(cfg.batch);
        }
        const double loss = loss_and_gradient(params, train_set, batch, grad);
        if (it == 0) {
            initial = loss;
        }
        diverging = (loss > 10.0 * initial || !std::isfinite(loss)) ? diverging + 1 : 0;
        if (diverging >= 50) {
            std::ostringstream os;
            os << "training diverged in restart " << restart << " at iteration " << it
               << ": loss " << loss << " vs initial " << initial;
            throw NonConvergence(os.str());
        }
        const double val = clamped_mse(params, val_set);
        res.history.push_back({it, loss, val});
        if (val < res.best_val) {
            res.best_val = val;
            res.best = params;
            stale = 0;
        } else if (++stale >= cfg.early_stop_patience) {
            break;
        }
        opt.step(params.values, grad);
    }
    return res;
}

} // namespace detail

/// Adam with restarts; keeps the restart whose best validation MSE is lowest.
[[nodiscard]] inline TrainReport train(const TrainConfig &cfg, const Dataset &train_set,
                                       const Dataset &val_set) {
    cfg.validate();
    require_nonempty(train_set, "train");
    require_nonempty(val_set, "train (validation)");
    std::vector<detail::RestartResult> results(cfg.restarts);
    parallel_for(cfg.restarts, cfg.jobs, [&](std::size_t r) {
        results[r] = detail::run_restart(cfg, train_set, val_set, r);
    });
    TrainReport rep;
    std::size_t best = 0;
    for (std::size_t r = 0; r < results.size(); ++r) {
        rep.restart_val_mse.push_back(results[r].best_val);
        if (results[r].best_val < results[best].best_val) {
            best = r;
        }
    }
    rep.restart_index = best;
    rep.best_params = std::move(results[best].best);
    rep.loss_history = std::move(results[best].history);
    rep.best_val_mse = results[best].best_val;
    rep.final_metrics = compute_metrics(predict_all(rep.best_params, val_set.points),
                                        val_set.labels);
    return rep;
}

// Fourier slices -----------------------------------------------------------

struct FourierSlice {
    std::size_t feature = 0;
    double period = 2 * std::numbers::pi; ///< sampled x-interval [0, period)
    std::vector<int> frequencies;         ///< -K..K
    std::vector<std::complex<double>> coefficients;

    [[nodiscard]] std::complex<double> at(int w) const {
        for (std::size_t i = 0; i < frequencies.size(); ++i) {
            if (frequencies[i] == w) {
                return coefficients[i];
            }
        }
        return 0.0;
    }

    /// Largest |c_w| over |w| > cutoff.
    [[nodiscard]] double tail_magnitude(int cutoff) const {
        double m = 0;
        for (std::size_t i = 0; i < frequencies.size(); ++i) {
            if (std::abs(frequencies[i]) > cutoff) {
                m = std::max(m, std::abs(coefficients[i]));
            }
        }
        return m;
    }
};

/// DFT of f along one feature sampled at x_k = k * period / n, k < n, with the
/// other features fixed at `base`. Frequencies are in units of 2 pi / period.
[[nodiscard]] inline FourierSlice
fourier_slice(const std::function<double(const MarketPoint &)> &f, const MarketPoint &base,
              std::size_t feature, std::size_t n_samples, double period,
              std::size_t max_frequency) {
    if (feature >= MarketPoint::kFeatures) {
        throw ValidationError("fourier_slice: feature index out of range");
    }
    if (n_samples < 2 * max_frequency + 1) {
        throw ValidationError("fourier_slice: undersampled, need at least " +
                              std::to_string(2 * max_frequency + 1) + " samples");
    }
    if (!(period > 0) || !std::isfinite(period)) {
        throw ValidationError("fourier_slice: period must be positive");
    }
    std::vector<double> samples(n_samples);
    for (std::size_t k = 0; k < n_samples; ++k) {
        MarketPoint x = base;
        x[feature] = period * static_cast<double>(k) / static_cast<double>(n_samples);
        samples[k] = f(x);
    }
    FourierSlice s;
    s.feature = feature;
    s.period = period;
    const int K = static_cast<int>((n_samples - 1) / 2);
    for (int w = -K; w <= K; ++w) {
        std::complex<double> c = 0;
        for (std::size_t k = 0; k < n_samples; ++k) {
            const double ang = -2.0 * std::numbers::pi * w * static_cast<double>(k) /
                               static_cast<double>(n_samples);
            c += samples[k] * std::polar(1.0, ang);
        }
        s.frequencies.push_back(w);
        s.coefficients.push_back(c / static_cast<double>(n_samples));
    }
    return s;
}

/// Number of encoding gates that inject `feature` (with nonzero scale) and
/// the mean magnitude of their scalers.
struct EncodingProfile {
    std::size_t gates = 0;
    double mean_scale = 1.0;
};

[[nodiscard]] inline EncodingProfile encoding_profile(const ModelParams &p, std::size_t feature) {
    p.validate();
    if (p.ansatz.variant != Variant::Finqbit) {
        return {static_cast<std::size_t>(p.ansatz.layers), 1.0};
    }
    EncodingProfile e;
    double sum = 0;
    for (std::size_t k = 0; k < FinqbitParams::kLayers; ++k) {
        const double phi = p.values[FinqbitParams::kTheta + 4 * k + feature];
        if (phi != 0.0) {
            ++e.gates;
            sum += std::abs(phi);
        }
    }
    e.mean_scale = e.gates > 0 ? sum / static_cast<double>(e.gates) : 1.0;
    return e;
}

/// Slice of the unclamped model output over [0, 2 pi / mean scaler).
[[nodiscard]] inline FourierSlice fourier_slice(const ModelParams &p, const MarketPoint &base,
                                                std::size_t feature, std::size_t n_samples) {
    if (feature >= MarketPoint::kFeatures) {
        throw ValidationError("fourier_slice: feature index out of range");
    }
    const auto prof = encoding_profile(p, feature);
    return fourier_slice([&](const MarketPoint &x) { return raw_output(p, x); }, base, feature,
                         n_samples, 2 * std::numbers::pi / prof.mean_scale, prof.gates);
}

// JSON ---------------------------------------------------------------------

inline nlohmann::json to_json(const TrainConfig &c) {
    return {{"schema_version", kSchemaVersion},
            {"learning_rate", c.learning_rate},
            {"max_iters", c.max_iters},
            {"batch", c.batch == 0 ? nlohmann::json("full") : nlohmann::json(c.batch)},
            {"restarts", c.restarts},
            {"seed", c.seed},
            {"early_stop_patience", c.early_stop_patience},
            {"variant", variant_name(c.target.variant)},
            {"L", c.target.layers},
            {"jobs", c.jobs}};
}

/// Reads the keys present in `j` over `base`.
inline TrainConfig train_config_from_json(const nlohmann::json &j, TrainConfig base = {}) {
    try {
        if (j.contains("schema_version") && j.at("schema_version").get<int>() != kSchemaVersion) {
            throw ValidationError("unsupported config schema_version");
        }
        base.learning_rate = j.value("learning_rate", base.learning_rate);
        base.max_iters = j.value("max_iters", base.max_iters);
        if (j.contains("batch")) {
            const auto &b = j.at("batch");
            base.batch = b.is_string() ? 0 : b.get<std::size_t>();
        }
        base.restarts = j.value("restarts", base.restarts);
        base.seed = j.value("seed", base.seed);
        base.early_stop_patience = j.value("early_stop_patience", base.early_stop_patience);
        if (j.contains("variant")) {
            base.target.variant = parse_variant(j.at("variant").get<std::string>());
            if (base.target.variant == Variant::Finqbit) {
                base.target.layers = 3;
            }
        }
        base.target.layers = j.value("L", base.target.layers);
        base.jobs = j.value("jobs", base.jobs);
    } catch (const nlohmann::json::exception &e) {
        throw ValidationError(std::string("invalid training config: ") + e.what());
    }
    return base;
}

inline nlohmann::json to_json(const TrainReport &r) {
    nlohmann::json hist = nlohmann::json::array();
    for (const auto &h : r.loss_history) {
        hist.push_back({h.iter, h.train_mse, h.val_mse});
    }
    return {{"schema_version", kSchemaVersion},
            {"best_params", to_json(r.best_params)},
            {"restart_index", r.restart_index},
            {"best_val_mse", r.best_val_mse},
            {"restart_val_mse", r.restart_val_mse},
            {"final_metrics", to_json(r.final_metrics)},
            {"loss_history", hist}};
}

inline void write_loss_history_csv(std::ostream &os, const TrainReport &r) {
    os << "iter,train_mse,val_mse\n";
    for (const auto &h : r.loss_history) {
        os << h.iter << ',' << detail::format_real(h.train_mse) << ','
           << detail::format_real(h.val_mse) << '\n';
    }
}

} // namespace finqbit
