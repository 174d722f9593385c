// Copyright 2026 The pcache Authors.
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

#ifndef PCACHE_RANDOM_H_
#define PCACHE_RANDOM_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace pcache {

// All randomness in the library flows through a 64-bit Mersenne twister and
// the helpers below, so results are identical across standard libraries
// (std::uniform_*_distribution is implementation-defined).
using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t Mix64(std::uint64_t x);

// Seed for sub-stream `stream` of a run seeded with `seed`.
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream);

// Uniform double in [0, 1) with 53 random bits.
double UniformUnit(Rng& rng);

// Uniform integer in [0, n). n must be positive.
std::size_t UniformIndex(Rng& rng, std::size_t n);

// Index i drawn with probability weights[i] / sum(weights). `cumulative` must
// be the inclusive prefix sum of the weights with a positive last entry.
std::size_t SampleCumulative(Rng& rng, std::span<const double> cumulative);

}  // namespace pcache

#endif  // PCACHE_RANDOM_H_
