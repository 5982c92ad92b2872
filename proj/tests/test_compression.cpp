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

#include "finqbit/compression.hpp"
#include "oracles.hpp"

using namespace finqbit;
using Catch::Approx;

namespace {

/// The 3-CX template assembled from dense gates in time order.
Eigen::MatrixXcd template_oracle(const std::array<double, 15> &a) {
    auto u3 = [](double t, double p, double l) {
        return Eigen::Matrix2cd(oracle::rot('Z', p) * oracle::rot('Y', t) * oracle::rot('Z', l));
    };
    Eigen::MatrixXcd U = Eigen::MatrixXcd::Identity(4, 4);
    auto apply = [&](const Eigen::MatrixXcd &g) { U = (g * U).eval(); };
    apply(oracle::embed(2, 0, u3(a[0], a[1], a[2])));
    apply(oracle::embed(2, 1, u3(a[3], a[4], a[5])));
    apply(oracle::cnot(2, 1, 0));
    apply(oracle::embed(2, 1, oracle::rot('Y', a[6])));
    apply(oracle::cnot(2, 0, 1));
    apply(oracle::embed(2, 0, oracle::rot('Z', a[7])));
    apply(oracle::embed(2, 1, oracle::rot('Y', a[8])));
    apply(oracle::cnot(2, 1, 0));
    apply(oracle::embed(2, 0, u3(a[9], a[10], a[11])));
    apply(oracle::embed(2, 1, u3(a[12], a[13], a[14])));
    return U;
}

std::array<double, 15> random_angles(std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> u(-3.2, 3.2);
    std::array<double, 15> a{};
    for (auto &v : a) v = u(g);
    return a;
}

FinqbitParams trained_like(std::uint64_t seed) {
    return FinqbitParams::from_flat(initial_params(Ansatz::finqbit(), seed).values);
}

} // namespace

TEST_CASE("canonical template shape", "[compression]") {
    const auto pc = canonical_template();
    CHECK(pc.n_params() == 15);
    const auto c = CanonicalAnsatz{}.circuit();
    CHECK(c.cnot_count() == 3);
    CHECK(c.n_qubits == 2);
}

TEST_CASE("canonical template matches dense construction", "[compression][oracle]") {
    for (std::uint64_t s = 1; s <= 10; ++s) {
        const CanonicalAnsatz a{random_angles(s)};
        const Eigen::MatrixXcd diff = a.unitary() - template_oracle(a.angles);
        CHECK(diff.cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("phase-invariant distance", "[compression]") {
    const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(4, 4);
    CHECK(phase_invariant_distance(I, I) == 0.0);
    CHECK(phase_invariant_distance(I, oracle::cnot(2, 0, 1)) == Approx(0.5).margin(1e-15));
    const auto U = oracle::haar_unitary(4, 3);
    const auto V = oracle::haar_unitary(4, 4);
    const double d = phase_invariant_distance(U, V);
    CHECK(phase_invariant_distance(std::polar(1.0, 0.7) * U, V) == Approx(d).margin(1e-14));
    CHECK(phase_invariant_distance(V, U) == Approx(d).margin(1e-14));
    CHECK(phase_invariant_distance(U, U) < 1e-15);
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
}

TEST_CASE("distance input validation", "[compression][error]") {
    const Eigen::MatrixXcd I4 = Eigen::MatrixXcd::Identity(4, 4);
    CHECK_THROWS_AS(phase_invariant_distance(I4, Eigen::MatrixXcd::Identity(2, 2)),
                    ValidationError);
    CHECK_THROWS_AS(phase_invariant_distance(I4, 1.1 * I4), ValidationError);
    CHECK_THROWS_AS(fit_canonical(2.0 * I4, 1), ValidationError);
    CHECK_THROWS_AS(fit_canonical(Eigen::MatrixXcd::Identity(2, 2), 1), ValidationError);
    CHECK_THROWS_AS(fit_canonical(I4, 1, 0.0), ValidationError);
}

TEST_CASE("distance gradient agrees with finite differences", "[compression][oracle]") {
    const auto pc = canonical_template();
    const auto target = oracle::haar_unitary(4, 9);
    auto a = random_angles(2);
    std::array<double, 15> grad{};
    detail::distance_and_gradient(pc, target, a, grad);
    const auto fd = oracle::fd_gradient(
        [&](const std::vector<double> &v) {
            return 1.0 - std::abs((target.adjoint() * template_oracle(
                                       [&] {
                                           std::array<double, 15> b{};
                                           std::copy(v.begin(), v.end(), b.begin());
                                           return b;
                                       }()))
                                      .trace()) /
                             4.0;
        },
        std::vector<double>(a.begin(), a.end()), 1e-5);
    for (std::size_t k = 0; k < 15; ++k) {
        CHECK(grad[k] == Approx(fd[k]).margin(1e-8));
    }
}

TEST_CASE("fitting recovers the identity", "[compression]") {
    const auto r = fit_canonical(Eigen::MatrixXcd::Identity(4, 4), 1);
    CHECK(r.converged);
    CHECK(r.distance <= 1e-10);
    CHECK(phase_invariant_distance(r.ansatz.unitary(), Eigen::MatrixXcd::Identity(4, 4)) <= 1e-10);
}

TEST_CASE("any two-qubit unitary fits three CNOTs", "[compression][property]") {
    for (std::uint64_t s = 100; s < 120; ++s) {
        const auto target = oracle::haar_unitary(4, s);
        const auto r = fit_canonical(target, s);
        INFO("target seed " << s << " distance " << r.distance);
        CHECK(r.converged);
        CHECK(r.distance <= 1e-6);
        // The reported distance is that of the returned angles.
        CHECK(phase_invariant_distance(target, template_oracle(r.ansatz.angles)) ==
              Approx(r.distance).margin(1e-12));
    }
}

TEST_CASE("refitting a fitted circuit is a fixed point", "[compression]") {
    const auto first = fit_canonical(oracle::haar_unitary(4, 55), 3);
    const auto again = fit_canonical(first.ansatz.unitary(), 4);
    CHECK(again.converged);
    CHECK(phase_invariant_distance(again.ansatz.unitary(), first.ansatz.unitary()) <= 1e-6);
}

TEST_CASE("fitting is seeded", "[compression]") {
    const auto target = oracle::haar_unitary(4, 21);
    const auto a = fit_canonical(target, 5);
    const auto b = fit_canonical(target, 5);
    CHECK(a.ansatz.angles == b.ansatz.angles);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("an exhausted budget reports non-convergence", "[compression]") {
    FitOptions opt;
    opt.restarts = 1;
    opt.max_iters = 1;
    opt.polish_iters = 0;
    const auto r = fit_canonical(oracle::haar_unitary(4, 31), 2, 1e-12, opt);
    CHECK_FALSE(r.converged);
    CHECK(r.distance > 1e-12);
}

TEST_CASE("bound finQbit unitary", "[compression]") {
    const auto p = trained_like(7);
    const MarketPoint x{1.0, 1.0, 0.05, 0.2};
    const auto U = bound_unitary(x, p);
    CHECK(unitarity_defect(U) < 1e-13);
    const std::vector<double> theta(p.theta.begin(), p.theta.end());
    const std::vector<double> phi(p.phi.begin(), p.phi.end());
    CHECK(phase_invariant_distance(U, oracle::finqbit_unitary({1.0, 1.0, 0.05, 0.2}, theta, phi)) <
          1e-14);
    // Different moneyness gives a different gate.
    CHECK(phase_invariant_distance(U, bound_unitary({0.8, 1.0, 0.05, 0.2}, p)) > 1e-6);
}

TEST_CASE("compressed circuits reproduce the readout", "[compression][property]") {
    const auto p = trained_like(11);
    const auto pts = benchmark_points();
    REQUIRE(pts.size() == 5);
    const auto suite = compress_benchmark_suite(p, pts, 1);
    for (const auto &cp : suite) {
        CHECK(cp.original.cnot_count() == 8);
        CHECK(cp.compressed.cnot_count() == 3);
        CHECK(cp.result.converged);
        // ||U - e^{ia} V||_F^2 = 8 d at the optimal phase, and a readout
        // changes by at most twice the state distance.
        CHECK(std::abs(cp.original_z - cp.compressed_z) <=
              4.0 * std::sqrt(2.0 * cp.result.distance) + 1e-12);
        CHECK(std::abs(cp.original_z - cp.compressed_z) < 1e-5);
    }
}

TEST_CASE("compression result JSON", "[compression][json]") {
    CompressionResult r;
    r.distance = 1e-9;
    r.converged = true;
    const auto j = to_json(r);
    CHECK(j.at("angles").size() == 15);
    CHECK(j.at("converged") == true);
}
