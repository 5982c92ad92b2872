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
 * Seeded random streams.
 *
 * Every random quantity in the project is drawn from an `Rng` whose seed is
 * derived from the user seed and a path of stream labels:
 *
 *     derive_seed(seed, {stream::kDataset, column})
 *
 * Derivation folds each label into the state with the SplitMix64 finalizer,
 * so adding a stream never perturbs the draws of another. The engine is
 * std::mt19937_64; uniform doubles use the top 53 bits of one draw, which
 * keeps dataset generation independent of the standard library's
 * distribution implementations.
 */

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace finqbit {

namespace stream {
inline constexpr std::uint64_t kDataset = 0x01;
inline constexpr std::uint64_t kTestSplit = 0x02;
inline constexpr std::uint64_t kInit = 0x10;
inline constexpr std::uint64_t kShots = 0x20;
inline constexpr std::uint64_t kReadout = 0x21;
inline constexpr std::uint64_t kCompression = 0x30;
} // namespace stream

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30U)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27U)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31U);
}

[[nodiscard]] constexpr std::uint64_t
derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t s = splitmix64(seed);
    for (auto label : path) {
        s = splitmix64(s ^ splitmix64(label + 0x632BE59BD9B4E019ULL));
    }
    return s;
}

class Rng {
  public:
    using engine_type = std::mt19937_64;

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform01() {
        return static_cast<double>(engine_() >> 11U) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi].
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    engine_type &engine() noexcept { return engine_; }

  private:
    engine_type engine_;
};

} // namespace finqbit
