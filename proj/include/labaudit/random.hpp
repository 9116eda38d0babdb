// Copyright 2026 The labaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Deterministic, platform-independent random streams.
//
// Every stochastic stage draws from a `Rng` seeded with a 64-bit value.
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard; the standard *distributions* are not, so the conversions to
// uniform doubles, bounded integers and normals are implemented here.
//
// Sub-seed schedule (part of the external contract):
//
//   key   = "<stage>/<epsilon>/<trial>"        e.g. "rr/0.5/2", "canary/*/0"
//   h     = FNV-1a-64(key bytes)
//   seed  = SplitMix64Finalize(h XOR uint64(master_seed))
//
// `epsilon` is the canonical budget string ("inf", "0.5", ...) or "*" for
// stages that do not depend on the privacy budget.

#ifndef LABAUDIT_RANDOM_HPP_
#define LABAUDIT_RANDOM_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <string_view>

namespace labaudit {

inline constexpr std::uint64_t SplitMix64Finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t DeriveSeed(std::int64_t master_seed, std::string_view stage,
                                std::string_view epsilon, int trial) {
  std::string key;
  key.reserve(stage.size() + epsilon.size() + 16);
  key.append(stage).append("/").append(epsilon).append("/").append(
      std::to_string(trial));
  return SplitMix64Finalize(Fnv1a64(key) ^
                            static_cast<std::uint64_t>(master_seed));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer on [0, bound). `bound` must be positive.
  std::uint64_t Below(std::uint64_t bound) {
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  bool FairBit() { return (engine_() >> 63) != 0; }

  // Standard normal via Box-Muller (cosine branch only).
  double Normal() {
    const double u1 = 1.0 - Uniform();  // (0, 1]
    const double u2 = Uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double UniformIn(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace labaudit

#endif  // LABAUDIT_RANDOM_HPP_
