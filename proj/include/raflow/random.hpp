// Copyright 2026 The raflow Authors. All Rights Reserved.
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

#ifndef RAFLOW_RANDOM_HPP
#define RAFLOW_RANDOM_HPP

#include <array>
#include <cstdint>

namespace raflow {

/// xoshiro256** keyed by (seed, stream).
///
/// The 256-bit state is filled by splitmix64 from a key that mixes seed and
/// stream, so equal (seed, stream) pairs give the same sequence on every
/// platform, and distinct streams (one per episode) are independent of the
/// order in which they are consumed. Normal variates use Box-Muller and cache
/// the second value of each pair.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform01();
  double standard_normal();
  double normal(double mean, double stddev) { return mean + stddev * standard_normal(); }
  /// 1 with probability p. DomainError unless 0 <= p <= 1.
  int bernoulli(double p);
  /// Uniform integer on [0, n).
  std::uint64_t uniform_index(std::uint64_t n);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace raflow

#endif  // RAFLOW_RANDOM_HPP
