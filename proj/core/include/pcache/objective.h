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

#ifndef PCACHE_OBJECTIVE_H_
#define PCACHE_OBJECTIVE_H_

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "pcache/grid.h"
#include "pcache/mobility.h"
#include "pcache/params.h"

namespace pcache {

// Request weights used by the objective: each user's own preference row, or
// the global popularity for every user (the common-preference baseline).
enum class PreferenceModel { kPersonalized, kCommon };

// One caching configuration: `holder` stores `file`. Holders are the N users
// (indices 0..N-1) followed by the L femto base stations (N..N+L-1).
struct Element {
  std::size_t holder = 0;
  std::size_t file = 0;
  friend auto operator<=>(const Element&, const Element&) = default;
};

// Hit-ratio maximization instance. Requesters are always the N users;
// holders are users plus base stations, each with its own cache capacity.
class CachingProblem {
 public:
  // contact is N x H (requester x holder); capacity has H entries.
  CachingProblem(std::vector<double> activity, Grid<double> preference,
                 std::vector<double> popularity, const Grid<double>& contact,
                 std::vector<std::size_t> capacity, PreferenceModel model);

  // Users as holders with capacity `user_capacity`; when the contact model
  // has base stations they join as holders with `fbs_capacity`.
  static CachingProblem FromModel(const LearnedParams& params,
                                  const ContactModel& contacts,
                                  PreferenceModel model, std::size_t user_capacity,
                                  std::size_t fbs_capacity = 0);

  std::size_t n_users() const { return activity_.size(); }
  std::size_t n_files() const { return popularity_.size(); }
  std::size_t n_holders() const { return capacity_.size(); }
  std::size_t n_fbs() const { return n_holders() - n_users(); }
  PreferenceModel model() const { return model_; }

  // w(i, a) = P(u_i) * P(f_a | u_i), or P(u_i) * P(f_a) in the common model.
  double weight(std::size_t user, std::size_t file) const {
    return weight_by_file_(file, user);
  }
  double contact(std::size_t user, std::size_t holder) const {
    return contact_by_holder_(holder, user);
  }
  std::size_t capacity(std::size_t holder) const { return capacity_[holder]; }
  const std::vector<std::size_t>& capacities() const { return capacity_; }

  const std::vector<double>& activity() const { return activity_; }
  const Grid<double>& preference() const { return preference_; }
  const std::vector<double>& popularity() const { return popularity_; }
  double ActivitySum() const;

  // Preference score a holder ranks files by when seeding its cache: the
  // user's own preference row (personalized) or popularity (common, and
  // every base station).
  double RankScore(std::size_t holder, std::size_t file) const;

  // File-major weights and holder-major contacts, contiguous over users.
  std::span<const double> WeightsOfFile(std::size_t file) const {
    return weight_by_file_.row(file);
  }
  std::span<const double> ContactsOfHolder(std::size_t holder) const {
    return contact_by_holder_.row(holder);
  }

  // Same instance with a different weight model.
  CachingProblem WithModel(PreferenceModel model) const;
  // Same instance with the base stations dropped.
  CachingProblem UsersOnly() const;

 private:
  void BuildWeights();

  std::vector<double> activity_;
  Grid<double> preference_;
  std::vector<double> popularity_;
  std::vector<std::size_t> capacity_;
  PreferenceModel model_;
  Grid<double> weight_by_file_;     // F x N
  Grid<double> contact_by_holder_;  // H x N
};

class CapacityError : public std::runtime_error {
 public:
  CapacityError() : std::runtime_error("holder cache full") {}
};

// Set of (holder, file) pairs with per-holder capacity bookkeeping.
class Placement {
 public:
  Placement() = default;
  Placement(std::size_t n_files, std::vector<std::size_t> capacity);

  std::size_t n_holders() const { return capacity_.size(); }
  std::size_t n_files() const { return n_files_; }
  std::size_t size() const { return size_; }
  bool Contains(Element e) const { return cached_(e.holder, e.file) != 0; }
  std::size_t Load(std::size_t holder) const { return load_[holder]; }
  std::size_t Capacity(std::size_t holder) const { return capacity_[holder]; }
  bool HasRoom(std::size_t holder) const { return load_[holder] < capacity_[holder]; }
  const std::vector<std::size_t>& HoldersOf(std::size_t file) const {
    return holders_[file];
  }

  // Throws std::invalid_argument for duplicates / out-of-range elements and
  // CapacityError when the holder is full.
  void Add(Element e);
  // Throws std::invalid_argument if e is not a member.
  void Remove(Element e);

  // Members ordered by holder, then file.
  std::vector<Element> Members() const;
  // True if every holder is within capacity (always true for placements
  // built through Add; useful for deserialized ones).
  bool Feasible() const;

  friend bool operator==(const Placement& a, const Placement& b) {
    return a.n_files_ == b.n_files_ && a.capacity_ == b.capacity_ &&
           a.cached_ == b.cached_;
  }

 private:
  std::size_t n_files_ = 0;
  std::vector<std::size_t> capacity_;
  std::vector<std::size_t> load_;
  Grid<unsigned char> cached_;
  std::vector<std::vector<std::size_t>> holders_;  // per file
  std::size_t size_ = 0;
};

// Incrementally maintained hit-ratio objective
//   G(V) = sum_i sum_a w(i,a) * (1 - miss(i,a)),
//   miss(i,a) = prod over holders h of a in V of (1 - p(i,h)),
// reported without the 1 / sum P(u_i) normalization. Holds a reference to
// the problem, which must outlive the state. Marginal queries are const and
// may run concurrently between mutations.
class ObjectiveState {
 public:
  explicit ObjectiveState(const CachingProblem& problem);
  ObjectiveState(const CachingProblem& problem, const Placement& placement);

  const CachingProblem& problem() const { return *problem_; }
  const Placement& placement() const { return placement_; }
  double Value() const { return value_; }
  double miss(std::size_t user, std::size_t file) const {
    return miss_by_file_(file, user);
  }

  // G(V + e) - G(V). Throws std::invalid_argument if e is already in V.
  double MarginalGain(Element e) const;
  // G(V) - G(V - e). Throws std::invalid_argument if e is not in V.
  double MarginalLoss(Element e) const;

  void Add(Element e);
  void Remove(Element e);

  // G(V) evaluated from scratch from the members.
  double Recompute() const;

 private:
  double MissWithout(std::size_t user, std::size_t file, std::size_t holder) const;

  const CachingProblem* problem_;
  Placement placement_;
  Grid<double> miss_by_file_;  // F x N
  double value_ = 0.0;
};

// CSV with header "holder,file" and one member per row (holder and file
// indices; holders >= N are base stations).
void WritePlacementCsv(std::ostream& out, const Placement& p);
Placement ReadPlacementCsv(std::istream& in, std::size_t n_files,
                           std::vector<std::size_t> capacity);

}  // namespace pcache

#endif  // PCACHE_OBJECTIVE_H_
