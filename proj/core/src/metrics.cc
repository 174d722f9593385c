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

#include "pcache/metrics.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

#include "pcache/random.h"

namespace pcache {
namespace {

constexpr std::size_t kChunkEvents = 4096;

double Normalizer(const CachingProblem& problem) {
  const double m = problem.ActivitySum();
  if (!(m > 0.0)) throw std::domain_error("no active users");
  return m;
}

void CheckShape(const CachingProblem& problem, const Placement& placement) {
  if (placement.n_files() != problem.n_files() ||
      placement.n_holders() != problem.n_holders()) {
    throw std::invalid_argument("placement does not match problem");
  }
}

}  // namespace

double AnalyticHitRatio(const CachingProblem& problem, const Placement& placement) {
  CheckShape(problem, placement);
  const double m = Normalizer(problem);
  return ObjectiveState(problem, placement).Value() / m;
}

double AnalyticOutage(const CachingProblem& problem, const Placement& placement) {
  CheckShape(problem, placement);
  const double m = Normalizer(problem);
  double outage = 0.0;
  for (std::size_t i = 0; i < problem.n_users(); ++i) {
    for (std::size_t a = 0; a < problem.n_files(); ++a) {
      double miss = 1.0;
      for (std::size_t h : placement.HoldersOf(a)) miss *= 1.0 - problem.contact(i, h);
      outage += problem.weight(i, a) * miss;
    }
  }
  return outage / m;
}

double OutageCapacity(double lambda_hat, double o_avg) {
  if (lambda_hat < 0.0) throw std::invalid_argument("negative lambda");
  return lambda_hat * (1.0 - o_avg);
}

MonteCarloEstimate MonteCarloHitRatio(const CachingProblem& problem,
                                      const Placement& placement,
                                      const Trajectory& traj, double distance,
                                      std::span<const Point> fbs_positions,
                                      std::size_t n_events, std::uint64_t seed,
                                      std::size_t threads) {
  CheckShape(problem, placement);
  if (n_events == 0) throw std::invalid_argument("n_events must be positive");
  if (traj.n_users() != problem.n_users() || traj.slots() == 0) {
    throw std::invalid_argument("trajectory does not match problem");
  }
  if (fbs_positions.size() != problem.n_fbs()) {
    throw std::invalid_argument("base station positions do not match problem");
  }
  const std::size_t n = problem.n_users();
  const std::size_t f = problem.n_files();

  std::vector<double> user_cdf(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) user_cdf[i] = acc += problem.activity()[i];
  if (!(acc > 0.0)) throw std::domain_error("no active users");
  // File distribution per requester, matching the problem's weight model.
  Grid<double> file_cdf(n, f);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t a = 0; a < f; ++a) file_cdf(i, a) = s += problem.weight(i, a);
  }

  const double d2 = distance * distance;
  auto within = [&](Point p, Point q) {
    double dx = std::abs(p.x - q.x);
    double dy = std::abs(p.y - q.y);
    dx = std::min(dx, 1.0 - dx);
    dy = std::min(dy, 1.0 - dy);
    return dx * dx + dy * dy <= d2;
  };

  const std::size_t n_chunks = (n_events + kChunkEvents - 1) / kChunkEvents;
  std::vector<std::size_t> hits(n_chunks, 0);
  auto run_chunk = [&](std::size_t c) {
    Rng rng(DeriveSeed(seed, c));
    const std::size_t begin = c * kChunkEvents;
    const std::size_t end = std::min(n_events, begin + kChunkEvents);
    std::size_t h_count = 0;
    for (std::size_t k = begin; k < end; ++k) {
      const std::size_t t = UniformIndex(rng, traj.slots());
      const std::size_t i = SampleCumulative(rng, user_cdf);
      const std::size_t a = SampleCumulative(rng, file_cdf.row(i));
      const Point me = traj.at(t, i);
      for (std::size_t h : placement.HoldersOf(a)) {
        const Point there = h < n ? traj.at(t, h) : fbs_positions[h - n];
        if (h == i || within(me, there)) {
          ++h_count;
          break;
        }
      }
    }
    hits[c] = h_count;
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n_chunks);
  if (threads <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t c = w; c < n_chunks; c += threads) run_chunk(c);
      });
    }
  }

  std::size_t total = 0;
  for (std::size_t h : hits) total += h;
  MonteCarloEstimate est;
  est.events = n_events;
  est.mean = static_cast<double>(total) / static_cast<double>(n_events);
  est.std_error = std::sqrt(est.mean * (1.0 - est.mean) / static_cast<double>(n_events));
  return est;
}

MetricsReport Evaluate(const CachingProblem& problem, const Placement& placement,
                       double lambda_hat) {
  MetricsReport r;
  r.h_avg = AnalyticHitRatio(problem, placement);
  r.o_avg = AnalyticOutage(problem, placement);
  r.lambda_hat = lambda_hat;
  r.capacity = OutageCapacity(lambda_hat, r.o_avg);
  return r;
}

}  // namespace pcache
