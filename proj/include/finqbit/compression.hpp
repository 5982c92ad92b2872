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
 * Compression of a bound finQbit circuit (8 CX) into a 3-CX block.
 *
 * The canonical block is a universal two-qubit template (time order):
 *
 *     U3(q0) U3(q1)              angles 0..5
 *     CX(1->0)
 *     Ry(q1)                     angle 6
 *     CX(0->1)
 *     Rz(q0) Ry(q1)              angles 7, 8
 *     CX(1->0)
 *     U3(q0) U3(q1)              angles 9..14
 *
 * The middle section realizes every nonlocal class exp(i(a XX + b YY + c ZZ))
 * up to local unitaries, so the template spans U(4) modulo global phase.
 *
 * Fits minimize d(U, V) = 1 - |Tr(V^dagger U)| / 4 with Adam, then polish the
 * best restart with Levenberg-Marquardt on the residual e^{-i alpha} V - U,
 * whose squared Frobenius norm at the optimal alpha is exactly 8 d.
 */

#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "finqbit/bsm.hpp"
#include "finqbit/error.hpp"
#include "finqbit/model.hpp"
#include "finqbit/parallel.hpp"
#include "finqbit/parametric.hpp"
#include "finqbit/quantum.hpp"
#include "finqbit/random.hpp"
#include "finqbit/training.hpp"

namespace finqbit {

inline constexpr std::size_t kCanonicalAngles = 15;

[[nodiscard]] inline ParametricCircuit canonical_template() {
    ParametricCircuit pc(2, kCanonicalAngles);
    pc.add_u3(0, 0);
    pc.add_u3(1, 3);
    pc.add_cnot(1, 0);
    pc.add_rotation(GateKind::RY, 1, 6);
    pc.add_cnot(0, 1);
    pc.add_rotation(GateKind::RZ, 0, 7);
    pc.add_rotation(GateKind::RY, 1, 8);
    pc.add_cnot(1, 0);
    pc.add_u3(0, 9);
    pc.add_u3(1, 12);
    return pc;
}

struct CanonicalAnsatz {
    std::array<double, kCanonicalAngles> angles{};

    [[nodiscard]] CircuitDescription circuit() const { return canonical_template().bind(angles); }
    [[nodiscard]] Eigen::MatrixXcd unitary() const { return circuit_unitary(circuit()); }
};

struct CompressionResult {
    CanonicalAnsatz ansatz;
    double distance = 1.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::size_t restart = 0;
};

/// circuit_unitary of the finQbit circuit bound at (x, p).
[[nodiscard]] inline Eigen::MatrixXcd bound_unitary(const MarketPoint &x, const FinqbitParams &p) {
    return circuit_unitary(build_finqbit_circuit(x, p));
}

/// 1 - |Tr(V^dagger U)| / dim, clamped to [0, 1].
[[nodiscard]] inline double phase_invariant_distance(const Eigen::MatrixXcd &U,
                                                     const Eigen::MatrixXcd &V) {
    if (U.rows() != V.rows() || U.cols() != V.cols() || U.rows() != U.cols()) {
        throw ValidationError("phase_invariant_distance: shape mismatch");
    }
    if (unitarity_defect(U) > 1e-8 || unitarity_defect(V) > 1e-8) {
        throw ValidationError("phase_invariant_distance: input is not unitary");
    }
    const double f = std::abs((V.adjoint() * U).trace()) / static_cast<double>(U.rows());
    return std::clamp(1.0 - f, 0.0, 1.0);
}

struct FitOptions {
    std::size_t restarts = 20;
    std::size_t max_iters = 2000;
    double learning_rate = 0.1;
    std::size_t polish_iters = 100;
    std::size_t jobs = 1;
};

namespace detail {

/// Tr(T^dagger V(a)).
inline Complex overlap(const ParametricCircuit &pc, const Eigen::MatrixXcd &target,
                       std::span<const double> a) {
    const auto v = circuit_unitary(pc.bind(a));
    return (target.adjoint() * v).trace();
}

/// Distance and its gradient. Every angle enters linearly through one
/// exp(-i a P / 2) factor, so dV/da_k = V(a + pi e_k) / 2.
inline double distance_and_gradient(const ParametricCircuit &pc, const Eigen::MatrixXcd &target,
                                    std::span<double> a, std::span<double> grad) {
    const Complex g = overlap(pc, target, a);
    const double mag = std::abs(g);
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double saved = a[k];
        a[k] = saved + std::numbers::pi;
        const Complex dg = 0.5 * overlap(pc, target, a);
        a[k] = saved;
        grad[k] = mag > 0 ? -(std::conj(g) * dg).real() / (4.0 * mag) : 0.0;
    }
    return std::clamp(1.0 - mag / 4.0, 0.0, 1.0);
}

inline double distance_at(const ParametricCircuit &pc, const Eigen::MatrixXcd &target,
                          std::span<const double> a) {
    return std::clamp(1.0 - std::abs(overlap(pc, target, a)) / 4.0, 0.0, 1.0);
}

/// Levenberg-Marquardt on r(a, alpha) = e^{-i alpha} V(a) - T, split into
/// real and imaginary parts.
inline double polish(const ParametricCircuit &pc, const Eigen::MatrixXcd &target,
                     std::array<double, kCanonicalAngles> &a, std::size_t iters) {
    constexpr Eigen::Index kP = kCanonicalAngles + 1;
    auto residual = [&](const std::array<double, kCanonicalAngles> &ang, double alpha,
                        Eigen::MatrixXcd *v_out) {
        Eigen::MatrixXcd v = circuit_unitary(pc.bind(ang));
        if (v_out != nullptr) {
            *v_out = v;
        }
        const Eigen::MatrixXcd r = std::polar(1.0, -alpha) * v - target;
        Eigen::VectorXd out(32);
        for (Eigen::Index i = 0; i < 16; ++i) {
            out(i) = r(i / 4, i % 4).real();
            out(16 + i) = r(i / 4, i % 4).imag();
        }
        return out;
    };
    double alpha = std::arg((target.adjoint() * circuit_unitary(pc.bind(a))).trace());
    double mu = 1e-3;
    Eigen::MatrixXcd v;
    Eigen::VectorXd r = residual(a, alpha, &v);
    double cost = r.squaredNorm();
    for (std::size_t it = 0; it < iters && cost > 1e-30; ++it) {
        Eigen::MatrixXd J(32, kP);
        const Complex phase = std::polar(1.0, -alpha);
        for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(kCanonicalAngles); ++k) {
            auto shifted = a;
            shifted[static_cast<std::size_t>(k)] += std::numbers::pi;
            const Eigen::MatrixXcd dv = 0.5 * phase * circuit_unitary(pc.bind(shifted));
            for (Eigen::Index i = 0; i < 16; ++i) {
                J(i, k) = dv(i / 4, i % 4).real();
                J(16 + i, k) = dv(i / 4, i % 4).imag();
            }
        }
        const Eigen::MatrixXcd dalpha = Complex(0, -1) * phase * v;
        for (Eigen::Index i = 0; i < 16; ++i) {
            J(i, kP - 1) = dalpha(i / 4, i % 4).real();
            J(16 + i, kP - 1) = dalpha(i / 4, i % 4).imag();
        }
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        const Eigen::VectorXd Jtr = J.transpose() * r;
        bool improved = false;
        for (int tries = 0; tries < 20 && !improved; ++tries) {
            Eigen::MatrixXd A = JtJ;
            A.diagonal().array() += mu * (1.0 + JtJ.diagonal().array());
            const Eigen::VectorXd step = A.ldlt().solve(-Jtr);
            auto trial = a;
            for (std::size_t k = 0; k < kCanonicalAngles; ++k) {
                trial[k] += step(static_cast<Eigen::Index>(k));
            }
            const double trial_alpha = alpha + step(kP - 1);
            Eigen::MatrixXcd trial_v;
            const Eigen::VectorXd trial_r = residual(trial, trial_alpha, &trial_v);
            const double trial_cost = trial_r.squaredNorm();
            if (trial_cost < cost) {
                a = trial;
                alpha = trial_alpha;
                r = trial_r;
                v = trial_v;
                cost = trial_cost;
                mu = std::max(mu * 0.1, 1e-12);
                improved = true;
            } else {
                mu *= 10.0;
            }
        }
        if (!improved) {
            break;
        }
    }
    return distance_at(pc, target, a);
}

} // namespace detail

/// Fits the canonical block to `target` (4x4 unitary). Restarts stop early
/// once a fit reaches `tol`; the best fit is always returned, with
/// `converged` false when its distance stays above `tol`.
[[nodiscard]] inline CompressionResult fit_canonical(const Eigen::MatrixXcd &target,
                                                     std::uint64_t seed, double tol = 1e-6,
                                                     const FitOptions &opt = {}) {
    if (target.rows() != 4 || target.cols() != 4) {
        throw ValidationError("fit_canonical: target must be 4x4");
    }
    if (unitarity_defect(target) > 1e-8) {
        throw ValidationError("fit_canonical: target is not unitary");
    }
    if (!(tol > 0)) {
        throw ValidationError("fit_canonical: tol must be positive");
    }
    const auto pc = canonical_template();
    CompressionResult best;
    best.distance = std::numeric_limits<double>::infinity();
    std::size_t total_iters = 0;
    for (std::size_t r = 0; r < std::max<std::size_t>(opt.restarts, 1); ++r) {
        Rng rng(derive_seed(seed, {stream::kCompression, r}));
        std::array<double, kCanonicalAngles> a{};
        for (auto &v : a) {
            v = rng.uniform(-std::numbers::pi, std::numbers::pi);
        }
        Adam adam(kCanonicalAngles, opt.learning_rate);
        std::array<double, kCanonicalAngles> grad{};
        double d = 1.0;
        std::size_t it = 0;
        for (; it < opt.max_iters; ++it) {
            d = detail::distance_and_gradient(pc, target, a, grad);
            if (d <= std::min(tol, 1e-5)) {
                break;
            }
            // Geometric decay from lr to lr / 1000 over the budget.
            adam.set_learning_rate(opt.learning_rate *
                                   std::pow(1e-3, static_cast<double>(it) /
                                                      static_cast<double>(opt.max_iters)));
            adam.step(a, grad);
        }
        total_iters += it;
        d = detail::distance_at(pc, target, a);
        if (d < 1e-2) {
            d = detail::polish(pc, target, a, opt.polish_iters);
        }
        if (d < best.distance) {
            best.ansatz.angles = a;
            best.distance = d;
            best.restart = r;
        }
        if (best.distance <= tol) {
            break;
        }
    }
    best.iterations = total_iters;
    best.converged = best.distance <= tol;
    return best;
}

struct CompressedPoint {
    MarketPoint point;
    CircuitDescription original;
    CircuitDescription compressed;
    CompressionResult result;
    double original_z = 0;   ///< exact <Z_0> of the 8-CX circuit
    double compressed_z = 0; ///< exact <Z_0> of the 3-CX circuit
};

/// One fitted 3-CX circuit per point; point i uses seed derive_seed(seed, {i}).
[[nodiscard]] inline std::vector<CompressedPoint>
compress_benchmark_suite(const FinqbitParams &p, std::span<const MarketPoint> points,
                         std::uint64_t seed = 0, double tol = 1e-6, const FitOptions &opt = {}) {
    std::vector<CompressedPoint> out(points.size());
    parallel_for(points.size(), opt.jobs, [&](std::size_t i) {
        auto &cp = out[i];
        cp.point = points[i];
        cp.original = build_finqbit_circuit(points[i], p);
        cp.result = fit_canonical(circuit_unitary(cp.original), derive_seed(seed, {i}), tol, opt);
        cp.compressed = cp.result.ansatz.circuit();
        cp.original_z = expectation_z(run_circuit(cp.original), 0);
        cp.compressed_z = expectation_z(run_circuit(cp.compressed), 0);
    });
    return out;
}

/// Moneyness grid used for device-style benchmarks: T = 1, r = 0.05, sigma = 0.2.
[[nodiscard]] inline std::vector<MarketPoint> benchmark_points() {
    std::vector<MarketPoint> pts;
    for (double m : {0.8, 0.9, 1.0, 1.1, 1.2}) {
        pts.push_back({m, 1.0, 0.05, 0.2});
    }
    return pts;
}

inline nlohmann::json to_json(const CompressionResult &r) {
    return {{"schema_version", kSchemaVersion},
            {"angles", r.ansatz.angles},
            {"distance", r.distance},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"restart", r.restart}};
}

} // namespace finqbit
