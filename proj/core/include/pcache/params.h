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

#ifndef PCACHE_PARAMS_H_
#define PCACHE_PARAMS_H_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcache/collaborative_filter.h"
#include "pcache/grid.h"
#include "pcache/ratings.h"

namespace pcache {

// Request model learned from ratings: how often each user is active, what
// each user asks for, and what the population as a whole asks for.
struct LearnedParams {
  std::vector<double> activity;  // P(u_k) = n_k / horizon
  Grid<double> preference;       // P(f_a | u_k), rows sum to 1
  std::vector<double> popularity;  // P(f_a), sums to 1
  std::size_t horizon = 0;
  std::vector<std::string> user_ids;
  std::vector<std::string> item_ids;

  std::size_t n_users() const { return activity.size(); }
  std::size_t n_files() const { return popularity.size(); }
};

// n_k / horizon from per-user given-rating counts. Throws
// std::invalid_argument if horizon < max n_k or horizon == 0.
std::vector<double> LearnActivity(std::span<const std::size_t> given_counts,
                                  std::size_t horizon);
std::vector<double> LearnActivity(const RatingMatrix& m, std::size_t horizon);

// r_ka / sum_i r_ki over the completed matrix.
Grid<double> LearnPreferences(const CompleteRatingMatrix& c);

// sum_k r_ka / sum_k sum_i r_ki over the completed matrix.
std::vector<double> LearnPopularity(const CompleteRatingMatrix& c);

// Full learning step. Activity counts come from `given` (which may differ from
// the matrix that was completed, e.g. before masking); horizon defaults to the
// largest count so the most active user has activity 1.
LearnedParams LearnParams(const RatingMatrix& given,
                          const CompleteRatingMatrix& complete,
                          std::optional<std::size_t> horizon = std::nullopt);

// Plain-text table:
//   pcache-params 1
//   dims <N> <F> horizon <T>
//   items <id> ...
//   popularity <F values>
//   <N lines: user_id activity pref_1 ... pref_F>
void WriteParams(std::ostream& out, const LearnedParams& p);
LearnedParams ReadParams(std::istream& in);

}  // namespace pcache

#endif  // PCACHE_PARAMS_H_
