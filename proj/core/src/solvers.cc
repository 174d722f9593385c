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

#include "pcache/solvers.h"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>

namespace pcache {
namespace {

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::size_t EffectiveCapacity(const CachingProblem& p, std::size_t holder) {
  return std::min(p.capacity(holder), p.n_files());
}

SolverResult Finish(const ObjectiveState& state, std::vector<StepRecord> log,
                    Clock::time_point start) {
  SolverResult r;
  r.placement = state.placement();
  r.value = state.Value();
  r.log = std::move(log);
  r.seconds = SecondsSince(start);
  return r;
}

// Subsets of {0..n_files-1} with at most `cap` members, as bitmasks in
// lexicographic order of their sorted member lists.
void EnumerateSubsets(std::size_t n_files, std::size_t cap, std::uint32_t mask,
                      std::size_t next, std::size_t size,
                      std::vector<std::uint32_t>& out) {
  out.push_back(mask);
  if (size == cap) return;
  for (std::size_t f = next; f < n_files; ++f) {
    EnumerateSubsets(n_files, cap, mask | (std::uint32_t{1} << f), f + 1,
                     size + 1, out);
  }
}

class ExhaustiveSearch {
 public:
  explicit ExhaustiveSearch(const CachingProblem& p)
      : p_(p),
        n_(p.n_users()),
        f_(p.n_files()),
        h_(p.n_holders()),
        subsets_(h_),
        miss_(h_ + 1, Grid<double>(f_, n_, 1.0)),
        choice_(h_, 0),
        best_choice_(h_, 0) {
    for (std::size_t h = 0; h < h_; ++h) {
      EnumerateSubsets(f_, EffectiveCapacity(p, h), 0, 0, 0, subsets_[h]);
    }
  }

  std::vector<std::uint32_t> Run() {
    if (h_ > 0) Visit(0);
    return best_choice_;
  }

 private:
  void Visit(std::size_t h) {
    if (h + 1 == h_) {
      VisitLast(h);
      return;
    }
    auto p = p_.ContactsOfHolder(h);
    for (std::uint32_t mask : subsets_[h]) {
      Grid<double>& next = miss_[h + 1];
      next = miss_[h];
      for (std::size_t a = 0; a < f_; ++a) {
        if (!(mask >> a & 1u)) continue;
        auto row = next.row(a);
        for (std::size_t i = 0; i < n_; ++i) row[i] *= 1.0 - p[i];
      }
      choice_[h] = mask;
      Visit(h + 1);
    }
  }

  // The last holder only changes per-file sums, so each file's contribution
  // with and without it is computed once.
  void VisitLast(std::size_t h) {
    auto p = p_.ContactsOfHolder(h);
    const Grid<double>& miss = miss_[h];
    std::vector<double> without(f_, 0.0);
    std::vector<double> with(f_, 0.0);
    for (std::size_t a = 0; a < f_; ++a) {
      auto w = p_.WeightsOfFile(a);
      auto m = miss.row(a);
      for (std::size_t i = 0; i < n_; ++i) {
        without[a] += w[i] * (1.0 - m[i]);
        with[a] += w[i] * (1.0 - m[i] * (1.0 - p[i]));
      }
    }
    for (std::uint32_t mask : subsets_[h]) {
      double v = 0.0;
      for (std::size_t a = 0; a < f_; ++a) v += (mask >> a & 1u) ? with[a] : without[a];
      if (v > best_) {
        best_ = v;
        choice_[h] = mask;
        best_choice_ = choice_;
      }
    }
  }

  const CachingProblem& p_;
  std::size_t n_, f_, h_;
  std::vector<std::vector<std::uint32_t>> subsets_;
  std::vector<Grid<double>> miss_;
  std::vector<std::uint32_t> choice_;
  std::vector<std::uint32_t> best_choice_;
  double best_ = -std::numeric_limits<double>::infinity();
};

struct Candidate {
  Element element;
  double score = 0.0;
  bool found = false;
};

Candidate BestAddition(const ObjectiveState& state,
                       const std::vector<std::size_t>& holders) {
  const CachingProblem& p = state.problem();
  Candidate best;
  for (std::size_t h : holders) {
    if (state.placement().Load(h) >= EffectiveCapacity(p, h)) continue;
    for (std::size_t a = 0; a < p.n_files(); ++a) {
      const Element e{h, a};
      if (state.placement().Contains(e)) continue;
      const double g = state.MarginalGain(e);
      if (!best.found || g > best.score) best = {e, g, true};
    }
  }
  return best;
}

// Marginal losses of current members. A member's loss depends only on the
// miss column of its file, so a mutation refreshes one column.
class LossTable {
 public:
  explicit LossTable(const ObjectiveState& state)
      : state_(state),
        loss_(state.problem().n_holders(), state.problem().n_files(), 0.0),
        tracked_(state.problem().n_files()) {
    for (std::size_t a = 0; a < state.problem().n_files(); ++a) Refresh(a);
  }

  void Refresh(std::size_t file) {
    for (std::size_t h : tracked_[file]) ordered_.erase({loss_(h, file), {h, file}});
    tracked_[file] = state_.placement().HoldersOf(file);
    for (std::size_t h : tracked_[file]) {
      loss_(h, file) = state_.MarginalLoss({h, file});
      ordered_.insert({loss_(h, file), {h, file}});
    }
  }

  // Lowest loss; ties go to the lowest holder, then the lowest file.
  Candidate Worst() const {
    if (ordered_.empty()) return {};
    const auto& [loss, element] = *ordered_.begin();
    return {element, loss, true};
  }

 private:
  const ObjectiveState& state_;
  Grid<double> loss_;
  std::vector<std::vector<std::size_t>> tracked_;  // holders per file in ordered_
  std::set<std::pair<double, Element>> ordered_;
};

}  // namespace

std::vector<std::size_t> TopRankedFiles(const CachingProblem& problem,
                                        std::size_t holder, std::size_t count) {
  std::vector<std::size_t> files(problem.n_files());
  std::iota(files.begin(), files.end(), std::size_t{0});
  std::vector<double> score(files.size());
  for (std::size_t a : files) score[a] = problem.RankScore(holder, a);
  count = std::min(count, files.size());
  std::partial_sort(files.begin(), files.begin() + count, files.end(),
                    [&](std::size_t x, std::size_t y) {
                      return score[x] != score[y] ? score[x] > score[y] : x < y;
                    });
  files.resize(count);
  return files;
}

SolverResult SolveOptimal(const CachingProblem& problem,
                          const SolverOptions& options) {
  const auto start = Clock::now();
  if (problem.n_holders() * problem.n_files() > options.optimal_max_ground_set) {
    throw std::invalid_argument("instance too large for exhaustive search");
  }
  ExhaustiveSearch search(problem);
  const std::vector<std::uint32_t> choice = search.Run();
  ObjectiveState state(problem);
  for (std::size_t h = 0; h < choice.size(); ++h) {
    for (std::size_t a = 0; a < problem.n_files(); ++a) {
      if (choice[h] >> a & 1u) state.Add({h, a});
    }
  }
  return Finish(state, {}, start);
}

SolverResult SolveG1(const CachingProblem& problem, const SolverOptions&) {
  const auto start = Clock::now();
  ObjectiveState state(problem);
  std::vector<std::size_t> open;
  std::size_t steps = 0;
  for (std::size_t h = 0; h < problem.n_holders(); ++h) {
    const std::size_t cap = EffectiveCapacity(problem, h);
    if (cap > 0) open.push_back(h);
    steps += cap;
  }
  std::vector<StepRecord> log;
  log.reserve(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const Candidate best = BestAddition(state, open);
    if (!best.found) break;
    state.Add(best.element);
    log.push_back({StepRecord::Kind::kAdd, best.element, best.score,
                   state.Value(), 0});
    const std::size_t h = best.element.holder;
    if (state.placement().Load(h) >= EffectiveCapacity(problem, h)) {
      open.erase(std::find(open.begin(), open.end(), h));
    }
  }
  return Finish(state, std::move(log), start);
}

SolverResult SolveG2(const CachingProblem& problem,
                     const SolverOptions& options) {
  const auto start = Clock::now();
  ObjectiveState state(problem);
  std::vector<StepRecord> log;
  for (std::size_t h = 0; h < problem.n_holders(); ++h) {
    for (std::size_t a :
         TopRankedFiles(problem, h, EffectiveCapacity(problem, h))) {
      const double before = state.Value();
      state.Add({h, a});
      log.push_back({StepRecord::Kind::kAdd, {h, a}, state.Value() - before,
                     state.Value(), 0});
    }
  }
  std::vector<std::size_t> all(problem.n_holders());
  std::iota(all.begin(), all.end(), std::size_t{0});

  LossTable losses(state);
  for (std::size_t round = 1; round <= options.g2_rounds; ++round) {
    std::optional<Placement> before;
    if (options.g2_early_stop) before = state.placement();
    std::size_t removed = 0;
    for (std::size_t k = 0; k < problem.n_holders(); ++k) {
      const Candidate worst = losses.Worst();
      if (!worst.found) break;
      state.Remove(worst.element);
      losses.Refresh(worst.element.file);
      log.push_back({StepRecord::Kind::kRemove, worst.element, worst.score,
                     state.Value(), round});
      ++removed;
    }
    for (std::size_t k = 0; k < removed; ++k) {
      const Candidate best = BestAddition(state, all);
      if (!best.found) break;
      state.Add(best.element);
      losses.Refresh(best.element.file);
      log.push_back({StepRecord::Kind::kAdd, best.element, best.score,
                     state.Value(), round});
    }
    if (options.g2_early_stop && state.placement() == *before) break;
  }
  return Finish(state, std::move(log), start);
}

SolverResult Solve(const CachingProblem& problem, Algorithm algorithm,
                   const SolverOptions& options) {
  switch (algorithm) {
    case Algorithm::kOptimal:
      return SolveOptimal(problem, options);
    case Algorithm::kG1:
      return SolveG1(problem, options);
    case Algorithm::kG2:
      return SolveG2(problem, options);
  }
  throw std::invalid_argument("unknown algorithm");
}

SolverResult SolveHybridNaive(const CachingProblem& problem, Algorithm algorithm,
                              const SolverOptions& options) {
  const auto start = Clock::now();
  const CachingProblem users = problem.UsersOnly();
  SolverResult user_result = Solve(users, algorithm, options);
  ObjectiveState state(problem);
  for (const Element& e : user_result.placement.Members()) state.Add(e);
  for (std::size_t h = problem.n_users(); h < problem.n_holders(); ++h) {
    for (std::size_t a :
         TopRankedFiles(problem, h, EffectiveCapacity(problem, h))) {
      state.Add({h, a});
    }
  }
  return Finish(state, std::move(user_result.log), start);
}

SolverResult SolveHybridJoint(const CachingProblem& problem, Algorithm algorithm,
                              const SolverOptions& options) {
  return Solve(problem, algorithm, options);
}

}  // namespace pcache
