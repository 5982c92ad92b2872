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
 * Circuits whose gate angles are affine in a flat parameter vector.
 *
 * Each angle slot of each gate is `offset + scale * params[param]`, or just
 * `offset` when the slot is not trainable. Encoding gates bind a scaler
 * with scale = feature value; fixed data rotations use the offset.
 *
 * Two exact gradient routes are provided for d<Z_q>/d params:
 *  - parameter_shift_gradient: two shifted circuit evaluations per slot;
 *  - adjoint_gradient: one forward and one reverse sweep.
 */

#pragma once

#include <numbers>
#include <span>
#include <vector>

#include "finqbit/error.hpp"
#include "finqbit/quantum.hpp"

namespace finqbit {

struct AngleBinding {
    int param = -1;
    double scale = 1.0;
    double offset = 0.0;

    [[nodiscard]] double value(std::span<const double> params) const {
        return param < 0 ? offset
                         : offset + scale * params[static_cast<std::size_t>(param)];
    }
};

struct ParametricGate {
    GateSpec gate;
    std::array<AngleBinding, 3> bind{};
};

class ParametricCircuit {
  public:
    ParametricCircuit() = default;
    ParametricCircuit(int n_qubits, std::size_t n_params)
        : n_qubits_(n_qubits), n_params_(n_params) {}

    [[nodiscard]] int n_qubits() const noexcept { return n_qubits_; }
    [[nodiscard]] std::size_t n_params() const noexcept { return n_params_; }
    [[nodiscard]] const std::vector<ParametricGate> &gates() const noexcept { return gates_; }

    /// Fixed-angle gate.
    void add(const GateSpec &g) {
        ParametricGate pg{g, {}};
        for (std::size_t a = 0; a < 3; ++a) {
            pg.bind[a].offset = g.angles[a];
        }
        gates_.push_back(pg);
    }

    /// Single-angle rotation bound to `param` with the given scale.
    void add_rotation(GateKind kind, int qubit, int param, double scale = 1.0) {
        ParametricGate pg{{kind, {qubit, -1}, {0, 0, 0}}, {}};
        pg.bind[0] = {param, scale, 0.0};
        gates_.push_back(pg);
    }

    /// U3 with three consecutive trainable angles starting at `first_param`.
    void add_u3(int qubit, int first_param) {
        ParametricGate pg{GateSpec::u3(qubit, 0, 0, 0), {}};
        for (int a = 0; a < 3; ++a) {
            pg.bind[static_cast<std::size_t>(a)] = {first_param + a, 1.0, 0.0};
        }
        gates_.push_back(pg);
    }

    void add_cnot(int control, int target) { add(GateSpec::cnot(control, target)); }

    [[nodiscard]] GateSpec bound_gate(const ParametricGate &pg,
                                      std::span<const double> params) const {
        GateSpec g = pg.gate;
        const int k = angle_count(g.kind);
        for (int a = 0; a < k; ++a) {
            g.angles[static_cast<std::size_t>(a)] =
                pg.bind[static_cast<std::size_t>(a)].value(params);
        }
        return g;
    }

    [[nodiscard]] CircuitDescription bind(std::span<const double> params) const {
        check(params);
        CircuitDescription c{n_qubits_, {}};
        c.gates.reserve(gates_.size());
        for (const auto &pg : gates_) {
            c.gates.push_back(bound_gate(pg, params));
        }
        return c;
    }

    [[nodiscard]] StateVector run(std::span<const double> params) const {
        check(params);
        StateVector s(n_qubits_);
        for (const auto &pg : gates_) {
            s.apply(bound_gate(pg, params));
        }
        return s;
    }

    [[nodiscard]] double expectation(std::span<const double> params, int qubit = 0) const {
        return expectation_z(run(params), qubit);
    }

    void check(std::span<const double> params) const {
        if (params.size() != n_params_) {
            throw ValidationError("parameter vector has " + std::to_string(params.size()) +
                                  " entries, circuit expects " +
                                  std::to_string(n_params_));
        }
    }

  private:
    int n_qubits_ = 1;
    std::size_t n_params_ = 0;
    std::vector<ParametricGate> gates_;
};

/// d<Z_qubit>/d params by the two-term shift rule applied to every bound
/// angle slot: d<Z>/da = (<Z>(a + pi/2) - <Z>(a - pi/2)) / 2, accumulated
/// into params with the chain-rule factor `scale`.
[[nodiscard]] inline std::vector<double>
parameter_shift_gradient(const ParametricCircuit &pc, std::span<const double> params,
                         int qubit = 0) {
    auto circuit = pc.bind(params);
    std::vector<double> grad(pc.n_params(), 0.0);
    const auto &gates = pc.gates();
    for (std::size_t gi = 0; gi < gates.size(); ++gi) {
        const int k = angle_count(gates[gi].gate.kind);
        for (int a = 0; a < k; ++a) {
            const auto &b = gates[gi].bind[static_cast<std::size_t>(a)];
            if (b.param < 0 || b.scale == 0.0) {
                continue;
            }
            auto &angle = circuit.gates[gi].angles[static_cast<std::size_t>(a)];
            const double saved = angle;
            angle = saved + std::numbers::pi / 2;
            const double plus = expectation_z(run_circuit(circuit), qubit);
            angle = saved - std::numbers::pi / 2;
            const double minus = expectation_z(run_circuit(circuit), qubit);
            angle = saved;
            grad[static_cast<std::size_t>(b.param)] += b.scale * 0.5 * (plus - minus);
        }
    }
    return grad;
}

/// Reverse-mode gradient of <Z_qubit>. Returns the expectation; adds
/// `weight * d<Z>/d params` into `grad`.
inline double adjoint_gradient(const ParametricCircuit &pc, std::span<const double> params,
                               std::span<double> grad, double weight = 1.0, int qubit = 0) {
    pc.check(params);
    if (grad.size() != pc.n_params()) {
        throw ValidationError("gradient buffer size mismatch");
    }
    const auto &gates = pc.gates();
    std::vector<GateSpec> bound;
    bound.reserve(gates.size());
    StateVector psi(pc.n_qubits());
    for (const auto &pg : gates) {
        bound.push_back(pc.bound_gate(pg, params));
        psi.apply(bound.back());
    }
    const double value = expectation_z(psi, qubit);

    // lambda = Z_q psi
    StateVector lambda = psi;
    {
        const auto m = lambda.mask(qubit);
        auto amps = lambda.amplitudes();
        for (std::size_t i = 0; i < amps.size(); ++i) {
            if ((i & m) != 0) {
                amps[i] = -amps[i];
            }
        }
    }
    for (std::size_t gi = gates.size(); gi-- > 0;) {
        const auto &g = bound[gi];
        psi.apply_adjoint(g);
        const int k = angle_count(g.kind);
        for (int a = 0; a < k; ++a) {
            const auto &b = gates[gi].bind[static_cast<std::size_t>(a)];
            if (b.param < 0 || b.scale == 0.0) {
                continue;
            }
            StateVector d = psi;
            d.apply_matrix(g.targets[0], gate_matrix_derivative(g, a));
            const double dz = 2.0 * inner(lambda, d).real();
            grad[static_cast<std::size_t>(b.param)] += weight * b.scale * dz;
        }
        lambda.apply_adjoint(g);
    }
    return value;
}

} // namespace finqbit
