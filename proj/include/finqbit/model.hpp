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
 * Pricing ansaetze: the 2-qubit finQbit circuit and the 4-qubit
 * baseline / Fourier re-uploading circuits.
 *
 * finQbit (time order, left to right):
 *
 *     W1 S1 W2 S2 W3 S3 W4
 *     W_k = U3(q0) U3(q1) ; CX(0->1) ; CX(1->0)
 *     S_k = per qubit Rx(phi_i * x_i) ; Ry(phi_j * x_j)
 *
 * where (i, j) per qubit and layer follow PermutationSchedule. The flat
 * parameter vector is theta[0..23] then phi[0..11], with
 * theta[6k + 3q + a] the a-th U3 angle of qubit q in block k and
 * phi[4k + f] the scaler of feature f (order m, T, r, sigma) in layer k.
 *
 * 4-qubit circuits put feature f on qubit f as Ry(x_f). A variational
 * block is Ry Rz Ry on every qubit then the CX ring 0->1->2->3->0;
 * theta[12b + 3q + a] is angle a of qubit q in block b.
 *  - baseline: L x [S ; W]            (12 L parameters, 4 L CX)
 *  - fourier:  W0 ; L x [S ; W]       (12 (L + 1) parameters, 4 (L + 1) CX)
 */

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "finqbit/bsm.hpp"
#include "finqbit/error.hpp"
#include "finqbit/parametric.hpp"
#include "finqbit/quantum.hpp"

namespace finqbit {

/// Features fed to one qubit in one encoding layer: Rx gets `rx`, Ry gets `ry`.
struct QubitEncoding {
    Feature rx;
    Feature ry;
};

using EncodingLayer = std::array<QubitEncoding, 2>;

struct PermutationSchedule {
    int version = 1;
    std::array<EncodingLayer, 3> layers{};

    /// Layer used for re-uploading stage k (0-based); stages past the third
    /// cycle through the three layouts.
    [[nodiscard]] const EncodingLayer &layer(std::size_t k) const {
        return layers[k % layers.size()];
    }

    /// True when every layer consumes each of the four features exactly once.
    [[nodiscard]] bool is_complete() const {
        for (const auto &layer : layers) {
            std::array<int, 4> seen{};
            for (const auto &q : layer) {
                ++seen[static_cast<std::size_t>(q.rx)];
                ++seen[static_cast<std::size_t>(q.ry)];
            }
            if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; })) {
                return false;
            }
        }
        return true;
    }
};

inline constexpr PermutationSchedule kFinqbitSchedule{
    1,
    {{
        {{{Feature::M, Feature::Sigma}, {Feature::T, Feature::R}}},
        {{{Feature::T, Feature::M}, {Feature::R, Feature::Sigma}}},
        {{{Feature::M, Feature::T}, {Feature::R, Feature::Sigma}}},
    }}};

struct FinqbitParams {
    static constexpr std::size_t kBlocks = 4;
    static constexpr std::size_t kLayers = 3;
    static constexpr std::size_t kTheta = kBlocks * 2 * 3;
    static constexpr std::size_t kPhi = kLayers * 4;
    static constexpr std::size_t kTotal = kTheta + kPhi;

    std::array<double, kTheta> theta{};
    std::array<double, kPhi> phi{};

    [[nodiscard]] std::vector<double> flat() const {
        std::vector<double> v(theta.begin(), theta.end());
        v.insert(v.end(), phi.begin(), phi.end());
        return v;
    }

    static FinqbitParams from_flat(std::span<const double> v) {
        if (v.size() != kTotal) {
            throw ValidationError("finQbit expects " + std::to_string(kTotal) +
                                  " parameters, got " + std::to_string(v.size()));
        }
        FinqbitParams p;
        std::copy_n(v.begin(), kTheta, p.theta.begin());
        std::copy_n(v.begin() + kTheta, kPhi, p.phi.begin());
        return p;
    }

    friend bool operator==(const FinqbitParams &, const FinqbitParams &) = default;
};

namespace detail {

inline void add_finqbit_w_block(ParametricCircuit &pc, std::size_t block) {
    const auto base = static_cast<int>(block * 6);
    pc.add_u3(0, base);
    pc.add_u3(1, base + 3);
    pc.add_cnot(0, 1);
    pc.add_cnot(1, 0);
}

inline void add_4q_w_block(ParametricCircuit &pc, std::size_t block) {
    for (int q = 0; q < 4; ++q) {
        const auto base = static_cast<int>(block * 12) + 3 * q;
        pc.add_rotation(GateKind::RY, q, base);
        pc.add_rotation(GateKind::RZ, q, base + 1);
        pc.add_rotation(GateKind::RY, q, base + 2);
    }
    for (int q = 0; q < 4; ++q) {
        pc.add_cnot(q, (q + 1) % 4);
    }
}

inline void add_4q_encoding(ParametricCircuit &pc, const MarketPoint &x) {
    for (int q = 0; q < 4; ++q) {
        pc.add(GateSpec::ry(q, x[static_cast<std::size_t>(q)]));
    }
}

} // namespace detail

/// finQbit circuit with angles bound to parameter indices; encoding slots
/// carry the feature values of `x` as chain-rule scales.
[[nodiscard]] inline ParametricCircuit
finqbit_template(const MarketPoint &x, const PermutationSchedule &schedule = kFinqbitSchedule) {
    ParametricCircuit pc(2, FinqbitParams::kTotal);
    const auto phi0 = static_cast<int>(FinqbitParams::kTheta);
    for (std::size_t k = 0; k < FinqbitParams::kLayers; ++k) {
        detail::add_finqbit_w_block(pc, k);
        const auto &layer = schedule.layer(k);
        for (int q = 0; q < 2; ++q) {
            const auto &enc = layer[static_cast<std::size_t>(q)];
            const auto fi = static_cast<std::size_t>(enc.rx);
            const auto fj = static_cast<std::size_t>(enc.ry);
            pc.add_rotation(GateKind::RX, q, phi0 + static_cast<int>(4 * k + fi), x[fi]);
            pc.add_rotation(GateKind::RY, q, phi0 + static_cast<int>(4 * k + fj), x[fj]);
        }
    }
    detail::add_finqbit_w_block(pc, FinqbitParams::kLayers);
    return pc;
}

[[nodiscard]] inline CircuitDescription build_finqbit_circuit(const MarketPoint &x,
                                                              const FinqbitParams &p) {
    const auto flat = p.flat();
    return finqbit_template(x).bind(flat);
}

enum class Variant : std::uint8_t { Finqbit, Baseline4, Fourier4 };

[[nodiscard]] inline std::string variant_name(Variant v) {
    switch (v) {
    case Variant::Finqbit: return "finqbit";
    case Variant::Baseline4: return "baseline";
    case Variant::Fourier4: return "fourier";
    }
    return "?";
}

[[nodiscard]] inline Variant parse_variant(const std::string &s) {
    if (s == "finqbit") return Variant::Finqbit;
    if (s == "baseline" || s == "baseline4") return Variant::Baseline4;
    if (s == "fourier" || s == "fourier4") return Variant::Fourier4;
    throw ValidationError("unknown variant '" + s + "'");
}

struct FourQubitParams {
    Variant variant = Variant::Baseline4;
    int L = 1;
    std::vector<double> theta;

    [[nodiscard]] static std::size_t expected_size(Variant v, int L) {
        if (L < 1) {
            throw ValidationError("layer count must be at least 1");
        }
        const auto blocks = static_cast<std::size_t>(v == Variant::Fourier4 ? L + 1 : L);
        return 12 * blocks;
    }

    void validate() const {
        if (variant == Variant::Finqbit) {
            throw ValidationError("FourQubitParams cannot hold finQbit parameters");
        }
        if (theta.size() != expected_size(variant, L)) {
            throw ValidationError(variant_name(variant) + " L=" + std::to_string(L) +
                                  " expects " + std::to_string(expected_size(variant, L)) +
                                  " parameters, got " + std::to_string(theta.size()));
        }
    }
};

[[nodiscard]] inline ParametricCircuit baseline4_template(const MarketPoint &x, int L) {
    ParametricCircuit pc(4, FourQubitParams::expected_size(Variant::Baseline4, L));
    for (int k = 0; k < L; ++k) {
        detail::add_4q_encoding(pc, x);
        detail::add_4q_w_block(pc, static_cast<std::size_t>(k));
    }
    return pc;
}

[[nodiscard]] inline ParametricCircuit fourier4_template(const MarketPoint &x, int L) {
    ParametricCircuit pc(4, FourQubitParams::expected_size(Variant::Fourier4, L));
    detail::add_4q_w_block(pc, 0);
    for (int k = 1; k <= L; ++k) {
        detail::add_4q_encoding(pc, x);
        detail::add_4q_w_block(pc, static_cast<std::size_t>(k));
    }
    return pc;
}

[[nodiscard]] inline CircuitDescription build_4q_baseline(const MarketPoint &x,
                                                          const FourQubitParams &p) {
    if (p.variant != Variant::Baseline4) {
        throw ValidationError("build_4q_baseline: parameters are for another variant");
    }
    p.validate();
    return baseline4_template(x, p.L).bind(p.theta);
}

[[nodiscard]] inline CircuitDescription build_4q_fourier(const MarketPoint &x,
                                                         const FourQubitParams &p) {
    if (p.variant != Variant::Fourier4) {
        throw ValidationError("build_4q_fourier: parameters are for another variant");
    }
    p.validate();
    return fourier4_template(x, p.L).bind(p.theta);
}

/// Architecture selector: which circuit family and how many layers.
struct Ansatz {
    Variant variant = Variant::Finqbit;
    int layers = 3;

    static Ansatz finqbit() { return {Variant::Finqbit, 3}; }
    static Ansatz baseline(int L) { return {Variant::Baseline4, L}; }
    static Ansatz fourier(int L) { return {Variant::Fourier4, L}; }

    [[nodiscard]] std::size_t n_params() const {
        return variant == Variant::Finqbit ? FinqbitParams::kTotal
                                           : FourQubitParams::expected_size(variant, layers);
    }

    [[nodiscard]] ParametricCircuit circuit(const MarketPoint &x) const {
        switch (variant) {
        case Variant::Finqbit: return finqbit_template(x);
        case Variant::Baseline4: return baseline4_template(x, layers);
        case Variant::Fourier4: return fourier4_template(x, layers);
        }
        throw ValidationError("unknown variant");
    }

    [[nodiscard]] std::string label() const {
        return variant == Variant::Finqbit ? "finqbit"
                                           : variant_name(variant) + "-L" + std::to_string(layers);
    }

    friend bool operator==(const Ansatz &, const Ansatz &) = default;
};

/// Trained (or initial) parameters of any ansatz.
struct ModelParams {
    Ansatz ansatz;
    std::vector<double> values;

    void validate() const {
        if (values.size() != ansatz.n_params()) {
            throw ValidationError(ansatz.label() + " expects " +
                                  std::to_string(ansatz.n_params()) + " parameters, got " +
                                  std::to_string(values.size()));
        }
    }

    static ModelParams from(const FinqbitParams &p) { return {Ansatz::finqbit(), p.flat()}; }
    static ModelParams from(const FourQubitParams &p) {
        p.validate();
        return {{p.variant, p.L}, p.theta};
    }

    [[nodiscard]] FinqbitParams finqbit() const {
        if (ansatz.variant != Variant::Finqbit) {
            throw ValidationError("parameters are not finQbit parameters");
        }
        return FinqbitParams::from_flat(values);
    }
};

/// Unclamped readout expectation <Z_0>.
[[nodiscard]] inline double raw_output(const ModelParams &p, const MarketPoint &x) {
    return p.ansatz.circuit(x).expectation(p.values, 0);
}

/// Price head: max(0, <Z_0>).
[[nodiscard]] inline double clamp_price(double z) { return std::max(0.0, z); }

/// Shot-based evaluation mode. `shots == 0` means exact statevector.
struct EvalMode {
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;

    static EvalMode exact() { return {}; }
    static EvalMode sampled(std::uint64_t n, std::uint64_t seed) { return {n, seed}; }
};

[[nodiscard]] inline double predict_price(const MarketPoint &x, const ModelParams &p,
                                          EvalMode mode = EvalMode::exact()) {
    p.validate();
    const auto state = p.ansatz.circuit(x).run(p.values);
    if (mode.shots == 0) {
        return clamp_price(expectation_z(state, 0));
    }
    const auto outcome = sample_shots(state, mode.shots, mode.seed);
    return clamp_price(estimate_expectation_from_counts(outcome, 0));
}

[[nodiscard]] inline double predict_price(const MarketPoint &x, const FinqbitParams &p,
                                          EvalMode mode = EvalMode::exact()) {
    return predict_price(x, ModelParams::from(p), mode);
}

// JSON -------------------------------------------------------------------

inline nlohmann::json to_json(const ModelParams &p) {
    p.validate();
    nlohmann::json j;
    if (p.ansatz.variant == Variant::Finqbit) {
        const auto fp = p.finqbit();
        j["theta"] = fp.theta;
        j["phi"] = fp.phi;
        j["schedule_version"] = kFinqbitSchedule.version;
    } else {
        j["variant"] = variant_name(p.ansatz.variant);
        j["L"] = p.ansatz.layers;
        j["theta"] = p.values;
    }
    return j;
}

inline ModelParams model_params_from_json(const nlohmann::json &j) {
    try {
        if (j.contains("phi")) {
            const auto version = j.value("schedule_version", 1);
            if (version != kFinqbitSchedule.version) {
                throw ValidationError("unsupported schedule_version " + std::to_string(version));
            }
            auto theta = j.at("theta").get<std::vector<double>>();
            auto phi = j.at("phi").get<std::vector<double>>();
            if (theta.size() != FinqbitParams::kTheta || phi.size() != FinqbitParams::kPhi) {
                throw ValidationError("finQbit parameters need 24 theta and 12 phi values");
            }
            theta.insert(theta.end(), phi.begin(), phi.end());
            return {Ansatz::finqbit(), theta};
        }
        FourQubitParams p;
        p.variant = parse_variant(j.at("variant").get<std::string>());
        p.L = j.at("L").get<int>();
        p.theta = j.at("theta").get<std::vector<double>>();
        return ModelParams::from(p);
    } catch (const nlohmann::json::exception &e) {
        throw ValidationError(std::string("invalid parameter JSON: ") + e.what());
    }
}

} // namespace finqbit
