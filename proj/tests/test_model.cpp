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

#include <random>

#include "finqbit/model.hpp"
#include "oracles.hpp"

using namespace finqbit;
using Catch::Approx;

namespace {

FinqbitParams random_finqbit(std::mt19937_64 &g) {
    std::uniform_real_distribution<double> ang(-3.2, 3.2), sc(-2.0, 2.0);
    FinqbitParams p;
    for (auto &t : p.theta) t = ang(g);
    for (auto &f : p.phi) f = sc(g);
    return p;
}

MarketPoint random_point(std::mt19937_64 &g) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return {0.8 + 0.4 * u(g), 0.2 + 0.9 * u(g), 0.02 + 0.08 * u(g), 0.01 + 0.99 * u(g)};
}

double phase_free_diff(const Eigen::MatrixXcd &a, const Eigen::MatrixXcd &b) {
    const Complex t = (b.adjoint() * a).trace();
    return (a - (t / std::abs(t)) * b).cwiseAbs().maxCoeff();
}

/// 4-qubit layered circuit written out with dense matrices.
Eigen::MatrixXcd four_qubit_oracle(const MarketPoint &x, const std::vector<double> &theta,
                                   int L, bool fourier) {
    Eigen::MatrixXcd U = Eigen::MatrixXcd::Identity(16, 16);
    auto apply = [&](const Eigen::MatrixXcd &g) { U = (g * U).eval(); };
    auto block = [&](int b) {
        for (int q = 0; q < 4; ++q) {
            const auto k = static_cast<std::size_t>(12 * b + 3 * q);
            apply(oracle::embed(4, q,
                                oracle::rot('Y', theta[k + 2]) * oracle::rot('Z', theta[k + 1]) *
                                    oracle::rot('Y', theta[k])));
        }
        for (int q = 0; q < 4; ++q) {
            apply(oracle::cnot(4, q, (q + 1) % 4));
        }
    };
    auto encode = [&] {
        for (int q = 0; q < 4; ++q) {
            apply(oracle::embed(4, q, oracle::rot('Y', x[static_cast<std::size_t>(q)])));
        }
    };
    if (fourier) {
        block(0);
    }
    for (int k = 0; k < L; ++k) {
        encode();
        block(fourier ? k + 1 : k);
    }
    return U;
}

} // namespace

TEST_CASE("finQbit circuit structure", "[model]") {
    std::mt19937_64 g(1);
    const auto c = build_finqbit_circuit(random_point(g), random_finqbit(g));
    CHECK(c.n_qubits == 2);
    CHECK(c.cnot_count() == 8);
    CHECK(c.count(GateKind::U3) == 8);
    CHECK(c.count(GateKind::RX) == 6);
    CHECK(c.count(GateKind::RY) == 6);
    CHECK(c.gates.size() == 28);
    CHECK(FinqbitParams::kTotal == 36);
}

TEST_CASE("finQbit matches an independently assembled unitary", "[model][oracle]") {
    std::mt19937_64 g(2);
    for (int trial = 0; trial < 25; ++trial) {
        const auto p = random_finqbit(g);
        const auto x = random_point(g);
        const std::vector<double> theta(p.theta.begin(), p.theta.end());
        const std::vector<double> phi(p.phi.begin(), p.phi.end());
        const auto ref = oracle::finqbit_unitary({x.m, x.T, x.r, x.sigma}, theta, phi);
        const auto u = circuit_unitary(build_finqbit_circuit(x, p));
        CHECK(phase_free_diff(u, ref) < 1e-12);
        CHECK(raw_output(ModelParams::from(p), x) ==
              Approx(oracle::z_expectation(ref, 2, 0)).margin(1e-12));
    }
}

TEST_CASE("finQbit at zero angles reduces to its entanglers", "[model]") {
    const auto u = circuit_unitary(build_finqbit_circuit({1.0, 1.0, 0.05, 0.2}, FinqbitParams{}));
    const Eigen::MatrixXcd pair = oracle::cnot(2, 1, 0) * oracle::cnot(2, 0, 1);
    Eigen::MatrixXcd ref = Eigen::MatrixXcd::Identity(4, 4);
    for (int b = 0; b < 4; ++b) {
        ref = (pair * ref).eval();
    }
    CHECK((u - ref).cwiseAbs().maxCoeff() < 1e-15);
    // The entangler pair is a 3-cycle on basis states, so four of them equal one.
    CHECK((ref - pair).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("permutation schedule covers every feature once per layer", "[model]") {
    CHECK(kFinqbitSchedule.is_complete());
    for (std::size_t k = 0; k < 3; ++k) {
        std::array<int, 4> seen{};
        for (const auto &q : kFinqbitSchedule.layer(k)) {
            ++seen[static_cast<std::size_t>(q.rx)];
            ++seen[static_cast<std::size_t>(q.ry)];
        }
        CHECK(seen == std::array<int, 4>{1, 1, 1, 1});
    }
}

TEST_CASE("finQbit parameter flattening round trips", "[model]") {
    std::mt19937_64 g(3);
    const auto p = random_finqbit(g);
    CHECK(FinqbitParams::from_flat(p.flat()) == p);
    CHECK_THROWS_AS(FinqbitParams::from_flat(std::vector<double>(35)), ValidationError);
}

TEST_CASE("4-qubit ansatz sizes", "[model]") {
    CHECK(Ansatz::baseline(1).n_params() == 12);
    CHECK(Ansatz::baseline(3).n_params() == 36);
    CHECK(Ansatz::fourier(2).n_params() == 36);
    CHECK_THROWS_AS(Ansatz::baseline(0).n_params(), ValidationError);
    const auto c = baseline4_template({1, 1, 0.05, 0.2}, 2).bind(std::vector<double>(24, 0.1));
    CHECK(c.cnot_count() == 8);
    CHECK(c.n_qubits == 4);
}

TEST_CASE("4-qubit circuits match dense construction", "[model][oracle]") {
    std::mt19937_64 g(4);
    std::uniform_real_distribution<double> ang(-3.2, 3.2);
    for (const bool fourier : {false, true}) {
        for (int L = 1; L <= 3; ++L) {
            const auto a = fourier ? Ansatz::fourier(L) : Ansatz::baseline(L);
            std::vector<double> theta(a.n_params());
            for (auto &t : theta) t = ang(g);
            const auto x = random_point(g);
            const auto ref = four_qubit_oracle(x, theta, L, fourier);
            INFO("fourier " << fourier << " L " << L);
            CHECK(raw_output({a, theta}, x) ==
                  Approx(oracle::z_expectation(ref, 4, 0)).margin(1e-12));
        }
    }
}

TEST_CASE("single-layer 4-qubit baseline cannot see m", "[model][property]") {
    // Propagating Z_0 back through the CX ring gives Z_1 Z_2 Z_3 on a product
    // state, so the moneyness encoding on qubit 0 never reaches the readout.
    std::mt19937_64 g(5);
    std::uniform_real_distribution<double> ang(-3.2, 3.2);
    std::vector<double> theta(12);
    for (auto &t : theta) t = ang(g);
    const ModelParams p{Ansatz::baseline(1), theta};
    const double ref = raw_output(p, {1.0, 0.5, 0.05, 0.3});
    CHECK(raw_output(p, {0.8, 0.5, 0.05, 0.3}) == Approx(ref).margin(1e-13));
    CHECK(raw_output(p, {1.2, 0.5, 0.05, 0.3}) == Approx(ref).margin(1e-13));
    CHECK(std::abs(raw_output(p, {1.0, 0.9, 0.05, 0.3}) - ref) > 1e-6);
    CHECK(std::abs(raw_output(p, {1.0, 0.5, 0.09, 0.3}) - ref) > 1e-6);
}

TEST_CASE("predicted prices stay in [0, 1]", "[model][property]") {
    std::mt19937_64 g(6);
    for (int trial = 0; trial < 300; ++trial) {
        const auto p = ModelParams::from(random_finqbit(g));
        const double price = predict_price(random_point(g), p);
        CHECK(price >= 0.0);
        CHECK(price <= 1.0);
    }
    CHECK(clamp_price(-0.3) == 0.0);
    CHECK(clamp_price(0.4) == 0.4);
}

TEST_CASE("shot-mode prediction is seeded and close to exact", "[model][sampling]") {
    std::mt19937_64 g(7);
    const auto p = ModelParams::from(random_finqbit(g));
    const MarketPoint x{1.0, 1.0, 0.05, 0.2};
    const auto a = predict_price(x, p, EvalMode::sampled(4000, 9));
    CHECK(a == predict_price(x, p, EvalMode::sampled(4000, 9)));
    const double z = raw_output(p, x);
    CHECK(std::abs(a - clamp_price(z)) < 5.0 / std::sqrt(4000.0));
}

TEST_CASE("parameter JSON round trips", "[model][json]") {
    std::mt19937_64 g(8);
    const auto fp = ModelParams::from(random_finqbit(g));
    const auto back = model_params_from_json(nlohmann::json::parse(to_json(fp).dump()));
    CHECK(back.ansatz == fp.ansatz);
    CHECK(back.values == fp.values);

    const ModelParams b{Ansatz::fourier(2), std::vector<double>(36, 0.25)};
    const auto b2 = model_params_from_json(to_json(b));
    CHECK(b2.ansatz == b.ansatz);
    CHECK(b2.values == b.values);
}

TEST_CASE("parameter JSON validation", "[model][json][error]") {
    using nlohmann::json;
    CHECK_THROWS_AS(model_params_from_json(json{{"theta", std::vector<double>(24)},
                                                {"phi", std::vector<double>(11)}}),
                    ValidationError);
    CHECK_THROWS_AS(model_params_from_json(json{{"theta", std::vector<double>(24)},
                                                {"phi", std::vector<double>(12)},
                                                {"schedule_version", 2}}),
                    ValidationError);
    CHECK_THROWS_AS(model_params_from_json(json{{"variant", "ring"}, {"L", 1},
                                                {"theta", std::vector<double>(12)}}),
                    ValidationError);
    CHECK_THROWS_AS(model_params_from_json(json{{"variant", "baseline"}, {"L", 2},
                                                {"theta", std::vector<double>(12)}}),
                    ValidationError);
    CHECK_THROWS_AS(parse_variant("cnn"), ValidationError);
}
