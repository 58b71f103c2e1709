/*
   Copyright 2026 The ldalfm Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ldalfm {

/// Seedable generator with a fixed, platform-independent output stream.
///
/// Algorithm (version 1): the raw engine is std::mt19937_64, whose output
/// sequence is pinned by the C++ standard. The distributions are implemented
/// here instead of using <random>'s, whose algorithms are unspecified:
///   - uniform():  top 53 bits of one engine draw, scaled by 2^-53, in [0, 1).
///   - below(n):   unbiased modulo with rejection of the top partial range.
///   - normal():   Box-Muller, both values of each pair are used.
class Rng {
 public:
  static constexpr int kAlgorithmVersion = 1;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Sub-seed for a named pipeline stage: mix64(seed ^ fnv1a(tag)).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace ldalfm
