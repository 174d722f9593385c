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

#ifndef PCACHE_TESTS_SUPPORT_TEST_SUPPORT_H_
#define PCACHE_TESTS_SUPPORT_TEST_SUPPORT_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pcache/grid.h"
#include "pcache/objective.h"
#include "pcache/random.h"
#include "pcache/ratings.h"

namespace pcache::testing {

// Raw inputs of a caching instance, kept separate from CachingProblem so
// oracles can evaluate formulas without going through the library.
struct RawInstance {
  std::vector<double> activity;   // N
  Grid<double> preference;        // N x F
  std::vector<double> popularity; // F
  Grid<double> contact;           // N x H
  std::vector<std::size_t> capacity;

  std::size_t n_users() const { return activity.size(); }
  std::size_t n_files() const { return popularity.size(); }
  std::size_t n_holders() const { return capacity.size(); }
};

struct RandomInstanceOptions {
  std::size_t n_users = 4;
  std::size_t n_files = 4;
  std::size_t n_fbs = 0;
  std::size_t cache_size = 1;
  std::size_t fbs_cache_size = 0;
  // Probability that an off-diagonal contact is exactly zero.
  double zero_contact = 0.2;
  bool self_contact = true;
};

RawInstance RandomInstance(Rng& rng, const RandomInstanceOptions& options);
CachingProblem ToProblem(const RawInstance& raw, PreferenceModel model);

// Objective by direct triple loop over users, files and member holders.
double NaiveObjective(const RawInstance& raw, PreferenceModel model,
                      const std::vector<Element>& members);

// Uniformly random feasible placement.
std::vector<Element> RandomFeasibleSet(Rng& rng, const RawInstance& raw);

// Random partially observed rating matrix with ids "u<k>" / "i<a>".
RatingMatrix RandomRatings(Rng& rng, std::size_t n_users, std::size_t n_files,
                           double observed_fraction);

// Ordinary least squares fit y = a + b x.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
};
LinearFit FitLine(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace pcache::testing

#endif  // PCACHE_TESTS_SUPPORT_TEST_SUPPORT_H_
