// Copyright 2026 The dlbandit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DLBANDIT_RNG_H_
#define DLBANDIT_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace dlbandit {

// SplitMix64: a tiny 64-bit generator satisfying UniformRandomBitGenerator.
// Used both as the per-substream engine and as the key-mixing function.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// Channels of randomness. Every draw in a realization is keyed by
// (seed, channel, agent, round) so that execution order never matters.
enum class Channel : std::uint64_t {
  kRealization = 1,
  kEnvironment = 2,
  kGraph = 3,
  kRewardNoise = 4,
  kSafetyNoise = 5,
  kThompson = 6,
  kArms = 7,
};

// Derives a child seed from a parent seed and a sequence of keys.
inline std::uint64_t derive_seed(std::uint64_t parent,
                                 std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = SplitMix64::mix(parent ^ 0x6A09E667F3BCC909ULL);
  for (std::uint64_t k : keys) {
    h = SplitMix64::mix(h + 0x9E3779B97F4A7C15ULL + SplitMix64::mix(k));
  }
  return h;
}

inline SplitMix64 make_stream(std::uint64_t parent, Channel channel,
                              std::uint64_t a = 0, std::uint64_t b = 0) {
  return SplitMix64(
      derive_seed(parent, {static_cast<std::uint64_t>(channel), a, b}));
}

}  // namespace dlbandit

#endif  // DLBANDIT_RNG_H_
