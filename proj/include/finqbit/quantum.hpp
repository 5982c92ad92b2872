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
 * Dense statevector simulation for registers of up to four qubits.
 *
 * Conventions used throughout the project:
 *  - Basis index bits are big-endian in qubit number: qubit 0 is the most
 *    significant bit, so |q0 q1> = |10> is index 2 on two qubits. Bitstrings
 *    in shot counts are printed q0 first.
 *  - Rotations are R_P(a) = exp(-i a P / 2).
 *  - U3(theta, phi, lambda) = Rz(phi) Ry(theta) Rz(lambda). This differs from
 *    the OpenQASM u3 only by the global phase exp(i (phi + lambda) / 2).
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "finqbit/error.hpp"
#include "finqbit/random.hpp"

namespace finqbit {

using Complex = std::complex<double>;

inline constexpr int kMaxQubits = 4;

enum class GateKind : std::uint8_t { RX, RY, RZ, U3, CNOT };

[[nodiscard]] constexpr int angle_count(GateKind k) noexcept {
    switch (k) {
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ: return 1;
    case GateKind::U3: return 3;
    case GateKind::CNOT: return 0;
    }
    return 0;
}

[[nodiscard]] constexpr std::string_view gate_name(GateKind k) noexcept {
    switch (k) {
    case GateKind::RX: return "rx";
    case GateKind::RY: return "ry";
    case GateKind::RZ: return "rz";
    case GateKind::U3: return "u3";
    case GateKind::CNOT: return "cx";
    }
    return "?";
}

/// One gate. For CNOT, targets = {control, target}; rotations use targets[0].
struct GateSpec {
    GateKind kind = GateKind::RX;
    std::array<int, 2> targets{0, -1};
    std::array<double, 3> angles{0.0, 0.0, 0.0};

    static GateSpec rx(int q, double a) { return {GateKind::RX, {q, -1}, {a, 0, 0}}; }
    static GateSpec ry(int q, double a) { return {GateKind::RY, {q, -1}, {a, 0, 0}}; }
    static GateSpec rz(int q, double a) { return {GateKind::RZ, {q, -1}, {a, 0, 0}}; }
    static GateSpec u3(int q, double theta, double phi, double lambda) {
        return {GateKind::U3, {q, -1}, {theta, phi, lambda}};
    }
    static GateSpec cnot(int control, int target) {
        return {GateKind::CNOT, {control, target}, {0, 0, 0}};
    }

    [[nodiscard]] bool is_two_qubit() const noexcept { return kind == GateKind::CNOT; }

    /// Throws ValidationError if the gate is malformed for an n-qubit register.
    void validate(int n_qubits) const {
        auto in_range = [&](int q) { return q >= 0 && q < n_qubits; };
        if (kind == GateKind::CNOT) {
            if (!in_range(targets[0]) || !in_range(targets[1])) {
                throw ValidationError("cx: qubit index out of range");
            }
            if (targets[0] == targets[1]) {
                throw ValidationError("cx: control and target must differ");
            }
        } else if (!in_range(targets[0])) {
            throw ValidationError(std::string(gate_name(kind)) +
                                  ": qubit index out of range");
        }
    }

    friend bool operator==(const GateSpec &, const GateSpec &) = default;
};

/// Row-major 2x2 complex matrix.
using Mat2 = std::array<Complex, 4>;

[[nodiscard]] inline Mat2 matmul(const Mat2 &a, const Mat2 &b) noexcept {
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

[[nodiscard]] inline Mat2 rx_matrix(double a) {
    const double c = std::cos(a / 2), s = std::sin(a / 2);
    return {Complex(c, 0), Complex(0, -s), Complex(0, -s), Complex(c, 0)};
}

[[nodiscard]] inline Mat2 ry_matrix(double a) {
    const double c = std::cos(a / 2), s = std::sin(a / 2);
    return {Complex(c, 0), Complex(-s, 0), Complex(s, 0), Complex(c, 0)};
}

[[nodiscard]] inline Mat2 rz_matrix(double a) {
    const Complex e = std::polar(1.0, -a / 2);
    return {e, Complex(0, 0), Complex(0, 0), std::conj(e)};
}

/// Rz(phi) Ry(theta) Rz(lambda), written out.
[[nodiscard]] inline Mat2 u3_matrix(double theta, double phi, double lambda) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    const double sum = (phi + lambda) / 2, diff = (phi - lambda) / 2;
    return {c * std::polar(1.0, -sum), -s * std::polar(1.0, -diff),
            s * std::polar(1.0, diff), c * std::polar(1.0, sum)};
}

/// 2x2 matrix of a single-qubit gate.
[[nodiscard]] inline Mat2 gate_matrix(const GateSpec &g) {
    switch (g.kind) {
    case GateKind::RX: return rx_matrix(g.angles[0]);
    case GateKind::RY: return ry_matrix(g.angles[0]);
    case GateKind::RZ: return rz_matrix(g.angles[0]);
    case GateKind::U3: return u3_matrix(g.angles[0], g.angles[1], g.angles[2]);
    case GateKind::CNOT: break;
    }
    throw ValidationError("gate_matrix: cx is not a single-qubit gate");
}

/// Derivative of a single-qubit gate matrix with respect to angle `slot`.
/// Every angle enters through one exp(-i a P / 2) factor, so the derivative
/// equals the gate with that angle advanced by pi, halved.
[[nodiscard]] inline Mat2 gate_matrix_derivative(const GateSpec &g, int slot) {
    GateSpec shifted = g;
    shifted.angles[static_cast<std::size_t>(slot)] += std::numbers::pi;
    Mat2 m = gate_matrix(shifted);
    for (auto &v : m) {
        v *= 0.5;
    }
    return m;
}

struct CircuitDescription {
    int n_qubits = 1;
    std::vector<GateSpec> gates;

    void validate() const {
        if (n_qubits < 1) {
            throw ValidationError("circuit needs at least one qubit");
        }
        for (const auto &g : gates) {
            g.validate(n_qubits);
        }
    }

    [[nodiscard]] std::size_t cnot_count() const noexcept {
        std::size_t n = 0;
        for (const auto &g : gates) {
            n += g.kind == GateKind::CNOT ? 1 : 0;
        }
        return n;
    }

    [[nodiscard]] std::size_t count(GateKind k) const noexcept {
        std::size_t n = 0;
        for (const auto &g : gates) {
            n += g.kind == k ? 1 : 0;
        }
        return n;
    }

    friend bool operator==(const CircuitDescription &,
                           const CircuitDescription &) = default;
};

/// Amplitudes of an n-qubit register, n <= kMaxQubits, stored inline.
class StateVector {
  public:
    explicit StateVector(int n_qubits = 1) : n_(n_qubits) {
        if (n_qubits < 1 || n_qubits > kMaxQubits) {
            throw CapabilityError("statevector supports 1 to " +
                                  std::to_string(kMaxQubits) + " qubits");
        }
        amps_[0] = 1.0;
    }

    /// Computational basis state |index>.
    static StateVector basis(int n_qubits, std::size_t index) {
        StateVector s(n_qubits);
        if (index >= s.dim()) {
            throw ValidationError("basis index out of range");
        }
        s.amps_[0] = 0.0;
        s.amps_[index] = 1.0;
        return s;
    }

    static StateVector from_amplitudes(std::span<const Complex> amps) {
        int n = 0;
        while ((std::size_t{1} << static_cast<unsigned>(n)) < amps.size()) {
            ++n;
        }
        if ((std::size_t{1} << static_cast<unsigned>(n)) != amps.size() || n < 1) {
            throw ValidationError("amplitude count must be a power of two >= 2");
        }
        StateVector s(n);
        std::copy(amps.begin(), amps.end(), s.amps_.begin());
        return s;
    }

    [[nodiscard]] int n_qubits() const noexcept { return n_; }
    [[nodiscard]] std::size_t dim() const noexcept {
        return std::size_t{1} << static_cast<unsigned>(n_);
    }
    [[nodiscard]] std::span<const Complex> amplitudes() const noexcept {
        return {amps_.data(), dim()};
    }
    [[nodiscard]] std::span<Complex> amplitudes() noexcept {
        return {amps_.data(), dim()};
    }
    [[nodiscard]] const Complex &operator[](std::size_t i) const { return amps_[i]; }

    [[nodiscard]] double norm() const noexcept {
        double s = 0;
        for (std::size_t i = 0; i < dim(); ++i) {
            s += std::norm(amps_[i]);
        }
        return std::sqrt(s);
    }

    [[nodiscard]] std::vector<double> probabilities() const {
        std::vector<double> p(dim());
        for (std::size_t i = 0; i < dim(); ++i) {
            p[i] = std::norm(amps_[i]);
        }
        return p;
    }

    /// Bit mask of `qubit` inside a basis index.
    [[nodiscard]] std::size_t mask(int qubit) const noexcept {
        return std::size_t{1} << static_cast<unsigned>(n_ - 1 - qubit);
    }

    void apply_matrix(int qubit, const Mat2 &u) noexcept {
        const auto stride = mask(qubit);
        for (std::size_t i = 0; i < dim(); ++i) {
            if ((i & stride) != 0) {
                continue;
            }
            const Complex a0 = amps_[i];
            const Complex a1 = amps_[i | stride];
            amps_[i] = u[0] * a0 + u[1] * a1;
            amps_[i | stride] = u[2] * a0 + u[3] * a1;
        }
    }

    void apply_cnot(int control, int target) noexcept {
        const auto cm = mask(control);
        const auto tm = mask(target);
        for (std::size_t i = 0; i < dim(); ++i) {
            if ((i & cm) != 0 && (i & tm) == 0) {
                std::swap(amps_[i], amps_[i | tm]);
            }
        }
    }

    /// In-place application; the gate must already be valid for this register.
    void apply(const GateSpec &g) {
        if (g.kind == GateKind::CNOT) {
            apply_cnot(g.targets[0], g.targets[1]);
        } else {
            apply_matrix(g.targets[0], gate_matrix(g));
        }
    }

    /// In-place application of the adjoint gate.
    void apply_adjoint(const GateSpec &g) {
        if (g.kind == GateKind::CNOT) {
            apply_cnot(g.targets[0], g.targets[1]);
            return;
        }
        const Mat2 u = gate_matrix(g);
        apply_matrix(g.targets[0], {std::conj(u[0]), std::conj(u[2]),
                                    std::conj(u[1]), std::conj(u[3])});
    }

    friend bool operator==(const StateVector &, const StateVector &) = default;

  private:
    int n_;
    std::array<Complex, std::size_t{1} << kMaxQubits> amps_{};
};

/// <a|b>.
[[nodiscard]] inline Complex inner(const StateVector &a, const StateVector &b) {
    Complex s = 0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        s += std::conj(a[i]) * b[i];
    }
    return s;
}

/// Returns U_g |s>.
[[nodiscard]] inline StateVector apply_gate(StateVector s, const GateSpec &g) {
    g.validate(s.n_qubits());
    s.apply(g);
    return s;
}

/// Runs the circuit on |0...0>.
[[nodiscard]] inline StateVector run_circuit(const CircuitDescription &c) {
    c.validate();
    StateVector s(c.n_qubits);
    for (const auto &g : c.gates) {
        s.apply(g);
    }
    return s;
}

[[nodiscard]] inline StateVector run_circuit(const CircuitDescription &c,
                                             StateVector s) {
    c.validate();
    if (s.n_qubits() != c.n_qubits) {
        throw ValidationError("state and circuit register sizes differ");
    }
    for (const auto &g : c.gates) {
        s.apply(g);
    }
    return s;
}

/// Full 2^n x 2^n unitary; column j is the circuit applied to |j>.
[[nodiscard]] inline Eigen::MatrixXcd circuit_unitary(const CircuitDescription &c) {
    if (c.n_qubits > kMaxQubits) {
        throw CapabilityError("circuit_unitary supports at most " +
                              std::to_string(kMaxQubits) + " qubits");
    }
    c.validate();
    const auto dim = std::size_t{1} << static_cast<unsigned>(c.n_qubits);
    Eigen::MatrixXcd u(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t j = 0; j < dim; ++j) {
        auto s = StateVector::basis(c.n_qubits, j);
        for (const auto &g : c.gates) {
            s.apply(g);
        }
        for (std::size_t i = 0; i < dim; ++i) {
            u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s[i];
        }
    }
    return u;
}

/// max |(U^dagger U - I)_ij|.
[[nodiscard]] inline double unitarity_defect(const Eigen::MatrixXcd &u) {
    const auto id = Eigen::MatrixXcd::Identity(u.rows(), u.cols());
    return (u.adjoint() * u - id).cwiseAbs().maxCoeff();
}

/// Sum over basis states of (+1 if qubit bit is 0 else -1) |a_i|^2.
[[nodiscard]] inline double expectation_z(const StateVector &s, int qubit) {
    if (qubit < 0 || qubit >= s.n_qubits()) {
        throw ValidationError("expectation_z: qubit index out of range");
    }
    const auto m = s.mask(qubit);
    double e = 0;
    for (std::size_t i = 0; i < s.dim(); ++i) {
        e += ((i & m) == 0 ? 1.0 : -1.0) * std::norm(s[i]);
    }
    return e;
}

/// Multiset of measured bitstrings.
struct ShotOutcome {
    std::map<std::string, std::uint64_t> counts; ///< bitstring (q0 first) -> count
    std::uint64_t n_shots = 0;
};

[[nodiscard]] inline std::string bitstring(std::size_t index, int n_qubits) {
    std::string s(static_cast<std::size_t>(n_qubits), '0');
    for (int q = 0; q < n_qubits; ++q) {
        if ((index >> static_cast<unsigned>(n_qubits - 1 - q)) & 1U) {
            s[static_cast<std::size_t>(q)] = '1';
        }
    }
    return s;
}

/// Draws `n` outcomes from a probability vector by sequential conditional
/// binomials. Returns per-outcome counts aligned with `probs`.
[[nodiscard]] inline std::vector<std::uint64_t>
multinomial_counts(std::span<const double> probs, std::uint64_t n, Rng &rng) {
    std::vector<std::uint64_t> counts(probs.size(), 0);
    double remaining_p = 1.0;
    std::uint64_t remaining_n = n;
    for (std::size_t i = 0; i + 1 < probs.size() && remaining_n > 0; ++i) {
        const double p = remaining_p > 0 ? std::clamp(probs[i] / remaining_p, 0.0, 1.0) : 0.0;
        std::binomial_distribution<std::uint64_t> draw(remaining_n, p);
        const auto k = p >= 1.0 ? remaining_n : draw(rng.engine());
        counts[i] = k;
        remaining_n -= k;
        remaining_p -= probs[i];
    }
    if (!probs.empty()) {
        counts.back() += remaining_n;
    }
    return counts;
}

/// Full-register multinomial sample with probabilities |a_i|^2.
[[nodiscard]] inline ShotOutcome sample_shots(const StateVector &s,
                                              std::uint64_t n_shots,
                                              std::uint64_t seed) {
    if (n_shots == 0) {
        throw ValidationError("sample_shots: n_shots must be at least 1");
    }
    Rng rng(seed);
    const auto probs = s.probabilities();
    const auto counts = multinomial_counts(probs, n_shots, rng);
    ShotOutcome out;
    out.n_shots = n_shots;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] > 0) {
            out.counts[bitstring(i, s.n_qubits())] = counts[i];
        }
    }
    return out;
}

/// Counts of 0 and 1 on one qubit, marginalized over the others.
[[nodiscard]] inline std::array<std::uint64_t, 2>
marginal_counts(const ShotOutcome &o, int qubit) {
    std::array<std::uint64_t, 2> n{0, 0};
    for (const auto &[bits, c] : o.counts) {
        if (qubit < 0 || static_cast<std::size_t>(qubit) >= bits.size()) {
            throw ValidationError("marginal_counts: qubit index out of range");
        }
        n[bits[static_cast<std::size_t>(qubit)] == '1' ? 1 : 0] += c;
    }
    return n;
}

/// (n0 - n1) / n_shots on the given qubit.
[[nodiscard]] inline double estimate_expectation_from_counts(const ShotOutcome &o,
                                                             int qubit) {
    if (o.n_shots == 0) {
        throw ValidationError("empty shot outcome");
    }
    const auto n = marginal_counts(o, qubit);
    return (static_cast<double>(n[0]) - static_cast<double>(n[1])) /
           static_cast<double>(o.n_shots);
}

} // namespace finqbit
