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
 * Single-qubit readout assignment channel.
 *
 * A(i, j) is the probability of reading outcome i when the qubit was
 * prepared in j, so columns sum to one and p_read = A p_true.
 */

#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "finqbit/error.hpp"
#include "finqbit/quantum.hpp"
#include "finqbit/random.hpp"

namespace finqbit {

using Prob2 = std::array<double, 2>;

struct AssignmentMatrix {
    /// Row-major: {A00, A01, A10, A11}.
    std::array<double, 4> a{1.0, 0.0, 0.0, 1.0};

    [[nodiscard]] double operator()(int i, int j) const {
        return a[static_cast<std::size_t>(2 * i + j)];
    }

    static AssignmentMatrix identity() { return {}; }

    /// Calibrated on a superconducting device; prepared-0 reads 0 with
    /// probability 0.976, prepared-1 reads 1 with probability 0.9274.
    static AssignmentMatrix rigetti_ankaa3() { return {{0.976, 0.0726, 0.024, 0.9274}}; }

    /// Inverse as printed alongside the calibration above (5 decimals).
    static constexpr std::array<double, 4> kRigettiAnkaa3PrintedInverse{
        1.02657, -0.08036, -0.02657, 1.08036};

    [[nodiscard]] double determinant() const { return a[0] * a[3] - a[1] * a[2]; }

    [[nodiscard]] bool is_column_stochastic(double tol = 1e-9) const {
        for (double v : a) {
            if (!(v >= -tol && v <= 1.0 + tol)) {
                return false;
            }
        }
        return std::abs(a[0] + a[2] - 1.0) <= tol && std::abs(a[1] + a[3] - 1.0) <= tol;
    }

    [[nodiscard]] std::array<double, 4> inverse() const {
        const double det = determinant();
        if (std::abs(det) < 1e-12) {
            throw ValidationError("assignment matrix is singular");
        }
        return {a[3] / det, -a[1] / det, -a[2] / det, a[0] / det};
    }

    void validate() const {
        if (!is_column_stochastic()) {
            throw ValidationError("assignment matrix is not column-stochastic");
        }
    }
};

[[nodiscard]] inline Prob2 apply_2x2(const std::array<double, 4> &m, const Prob2 &p) {
    return {m[0] * p[0] + m[1] * p[1], m[2] * p[0] + m[3] * p[1]};
}

/// Forward channel p' = A p on the readout qubit's outcome distribution.
[[nodiscard]] inline Prob2 apply_readout_noise(const Prob2 &p, const AssignmentMatrix &A) {
    A.validate();
    if (std::abs(p[0] + p[1] - 1.0) > 1e-9 || p[0] < -1e-12 || p[1] < -1e-12) {
        throw ValidationError("apply_readout_noise: input is not a probability vector");
    }
    return apply_2x2(A.a, p);
}

/// Per-shot misreads of marginal counts {n0, n1}: each true 0 flips to 1 with
/// probability A10, each true 1 flips to 0 with probability A01.
[[nodiscard]] inline std::array<std::uint64_t, 2>
corrupt_counts(const std::array<std::uint64_t, 2> &n, const AssignmentMatrix &A, Rng &rng) {
    A.validate();
    std::binomial_distribution<std::uint64_t> flip0(n[0], std::clamp(A(1, 0), 0.0, 1.0));
    std::binomial_distribution<std::uint64_t> flip1(n[1], std::clamp(A(0, 1), 0.0, 1.0));
    const auto f0 = flip0(rng.engine());
    const auto f1 = flip1(rng.engine());
    return {n[0] - f0 + f1, n[1] - f1 + f0};
}

} // namespace finqbit
