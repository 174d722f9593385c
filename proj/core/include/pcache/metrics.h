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

#ifndef PCACHE_METRICS_H_
#define PCACHE_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

#include "pcache/mobility.h"
#include "pcache/objective.h"

namespace pcache {

struct MetricsReport {
  double h_avg = 0.0;
  double o_avg = 1.0;
  double lambda_hat = 0.0;
  double capacity = 0.0;
  std::optional<double> mc_h_avg;
  std::optional<double> mc_stderr;
};

// Normalized average hit ratio of `placement` under the problem's weights.
// Throws std::domain_error("no active users") when sum P(u_i) is zero.
double AnalyticHitRatio(const CachingProblem& problem, const Placement& placement);

// Average outage probability, summed directly over miss products.
double AnalyticOutage(const CachingProblem& problem, const Placement& placement);

// lambda_hat * (1 - o_avg). Throws std::invalid_argument if lambda_hat < 0.
double OutageCapacity(double lambda_hat, double o_avg);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t events = 0;
};

// Request/delivery simulation over the trajectory: each event draws a slot
// uniformly, a requester by activity and a file by that requester's
// preference row (common weights use popularity). A hit needs the requester
// to hold the file, or a holder of it within `distance` in that slot.
// Holders >= N are base stations at `fbs_positions`. Events are processed in
// fixed-size chunks with derived seeds, so the result does not depend on the
// thread count.
MonteCarloEstimate MonteCarloHitRatio(const CachingProblem& problem,
                                      const Placement& placement,
                                      const Trajectory& traj, double distance,
                                      std::span<const Point> fbs_positions,
                                      std::size_t n_events, std::uint64_t seed,
                                      std::size_t threads = 0);

MetricsReport Evaluate(const CachingProblem& problem, const Placement& placement,
                       double lambda_hat);

}  // namespace pcache

#endif  // PCACHE_METRICS_H_
