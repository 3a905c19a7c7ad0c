// Copyright 2026 The CLEIT Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CLEIT_RNG_HPP
#define CLEIT_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

#include "cleit/tensor.hpp"

namespace cleit {

/// Seeded random stream with a platform-independent value sequence.
///
/// Only the raw 64-bit engine output is taken from the standard library
/// (its sequence is fixed by the standard); every distribution is derived
/// here so that identical seeds give identical draws on any toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  // Unbiased integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);

  Matrix normal_matrix(Index rows, Index cols, double stddev = 1.0);

  /// Independent stream keyed by name; does not advance this stream.
  Rng fork(std::string_view stream) const;

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[uniform_index(i)]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace cleit

#endif  // CLEIT_RNG_HPP
