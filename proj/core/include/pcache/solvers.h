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

#ifndef PCACHE_SOLVERS_H_
#define PCACHE_SOLVERS_H_

#include <cstddef>
#include <string>
#include <vector>

#include "pcache/objective.h"

namespace pcache {

enum class Algorithm { kOptimal, kG1, kG2 };

struct SolverOptions {
  std::size_t g2_rounds = 3;
  // Stop G2 once a full round leaves the placement unchanged.
  bool g2_early_stop = false;
  // Largest H * F accepted by exhaustive search.
  std::size_t optimal_max_ground_set = 25;
};

struct StepRecord {
  enum class Kind { kAdd, kRemove };
  Kind kind;
  Element element;
  double delta;       // gain for additions, loss for removals
  double value;       // objective after the step
  std::size_t round;  // 0 for initialization / G1
};

struct SolverResult {
  Placement placement;
  double value = 0.0;  // unnormalized objective
  double seconds = 0.0;
  std::vector<StepRecord> log;
};

// Exhaustive search over every per-holder subset of size <= capacity. The
// first maximum found in enumeration order wins. Throws
// std::invalid_argument when H * F exceeds the configured bound.
SolverResult SolveOptimal(const CachingProblem& problem,
                          const SolverOptions& options = {});

// Forward greedy: add the best-gain element until every holder is full.
// Ties go to the lowest holder, then the lowest file.
SolverResult SolveG1(const CachingProblem& problem,
                     const SolverOptions& options = {});

// Initialize each holder with its top-ranked files, then run rounds of H
// greedy removals followed by H greedy additions.
SolverResult SolveG2(const CachingProblem& problem,
                     const SolverOptions& options = {});

SolverResult Solve(const CachingProblem& problem, Algorithm algorithm,
                   const SolverOptions& options = {});

// Base stations cache the most popular files; users are placed by
// `algorithm` on the users-only problem. Value is reported on `problem`.
SolverResult SolveHybridNaive(const CachingProblem& problem, Algorithm algorithm,
                              const SolverOptions& options = {});

// Users and base stations placed jointly by `algorithm`.
SolverResult SolveHybridJoint(const CachingProblem& problem, Algorithm algorithm,
                              const SolverOptions& options = {});

// Highest-scoring `count` files for `holder`, ties to the lower index.
std::vector<std::size_t> TopRankedFiles(const CachingProblem& problem,
                                        std::size_t holder, std::size_t count);

}  // namespace pcache

#endif  // PCACHE_SOLVERS_H_
