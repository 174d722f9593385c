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

#include "pcache/objective.h"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>

namespace pcache {

CachingProblem::CachingProblem(std::vector<double> activity,
                               Grid<double> preference,
                               std::vector<double> popularity,
                               const Grid<double>& contact,
                               std::vector<std::size_t> capacity,
                               PreferenceModel model)
    : activity_(std::move(activity)),
      preference_(std::move(preference)),
      popularity_(std::move(popularity)),
      capacity_(std::move(capacity)),
      model_(model) {
  const std::size_t n = activity_.size();
  const std::size_t f = popularity_.size();
  if (preference_.rows() != n || preference_.cols() != f) {
    throw std::invalid_argument("preference shape does not match N x F");
  }
  if (capacity_.size() < n) {
    throw std::invalid_argument("fewer holders than users");
  }
  if (contact.rows() != n || contact.cols() != capacity_.size()) {
    throw std::invalid_argument("contact shape does not match N x H");
  }
  for (double p : contact.data()) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("contact probability outside [0, 1]");
    }
  }
  contact_by_holder_ = contact.Transposed();
  BuildWeights();
}

void CachingProblem::BuildWeights() {
  weight_by_file_ = Grid<double>(n_files(), n_users());
  for (std::size_t a = 0; a < n_files(); ++a) {
    for (std::size_t i = 0; i < n_users(); ++i) {
      const double pref = model_ == PreferenceModel::kPersonalized
                              ? preference_(i, a)
                              : popularity_[a];
      weight_by_file_(a, i) = activity_[i] * pref;
    }
  }
}

CachingProblem CachingProblem::FromModel(const LearnedParams& params,
                                         const ContactModel& contacts,
                                         PreferenceModel model,
                                         std::size_t user_capacity,
                                         std::size_t fbs_capacity) {
  const std::size_t n = params.n_users();
  if (contacts.n_users() != n) {
    throw std::invalid_argument("contact model and parameters disagree on N");
  }
  const std::size_t l = contacts.n_fbs();
  Grid<double> contact(n, n + l);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t h = 0; h < n; ++h) contact(i, h) = contacts.user_user(i, h);
    for (std::size_t j = 0; j < l; ++j) contact(i, n + j) = contacts.user_fbs(i, j);
  }
  std::vector<std::size_t> capacity(n + l, fbs_capacity);
  std::fill(capacity.begin(), capacity.begin() + n, user_capacity);
  return CachingProblem(params.activity, params.preference, params.popularity,
                        contact, std::move(capacity), model);
}

double CachingProblem::ActivitySum() const {
  double m = 0.0;
  for (double v : activity_) m += v;
  return m;
}

double CachingProblem::RankScore(std::size_t holder, std::size_t file) const {
  if (holder < n_users() && model_ == PreferenceModel::kPersonalized) {
    return preference_(holder, file);
  }
  return popularity_[file];
}

CachingProblem CachingProblem::WithModel(PreferenceModel model) const {
  CachingProblem out = *this;
  out.model_ = model;
  out.BuildWeights();
  return out;
}

CachingProblem CachingProblem::UsersOnly() const {
  const std::size_t n = n_users();
  Grid<double> contact(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t h = 0; h < n; ++h) contact(i, h) = this->contact(i, h);
  }
  std::vector<std::size_t> capacity(capacity_.begin(), capacity_.begin() + n);
  return CachingProblem(activity_, preference_, popularity_, contact,
                        std::move(capacity), model_);
}

Placement::Placement(std::size_t n_files, std::vector<std::size_t> capacity)
    : n_files_(n_files),
      capacity_(std::move(capacity)),
      load_(capacity_.size(), 0),
      cached_(capacity_.size(), n_files, 0),
      holders_(n_files) {}

void Placement::Add(Element e) {
  if (e.holder >= n_holders() || e.file >= n_files_) {
    throw std::invalid_argument("element out of range");
  }
  if (Contains(e)) throw std::invalid_argument("element already cached");
  if (!HasRoom(e.holder)) throw CapacityError();
  cached_(e.holder, e.file) = 1;
  ++load_[e.holder];
  holders_[e.file].push_back(e.holder);
  ++size_;
}

void Placement::Remove(Element e) {
  if (e.holder >= n_holders() || e.file >= n_files_ || !Contains(e)) {
    throw std::invalid_argument("element not cached");
  }
  cached_(e.holder, e.file) = 0;
  --load_[e.holder];
  auto& hs = holders_[e.file];
  hs.erase(std::find(hs.begin(), hs.end(), e.holder));
  --size_;
}

std::vector<Element> Placement::Members() const {
  std::vector<Element> out;
  out.reserve(size_);
  for (std::size_t h = 0; h < n_holders(); ++h) {
    for (std::size_t a = 0; a < n_files_; ++a) {
      if (cached_(h, a)) out.push_back({h, a});
    }
  }
  return out;
}

bool Placement::Feasible() const {
  for (std::size_t h = 0; h < n_holders(); ++h) {
    if (load_[h] > capacity_[h]) return false;
  }
  return true;
}

ObjectiveState::ObjectiveState(const CachingProblem& problem)
    : problem_(&problem),
      placement_(problem.n_files(), problem.capacities()),
      miss_by_file_(problem.n_files(), problem.n_users(), 1.0) {}

ObjectiveState::ObjectiveState(const CachingProblem& problem,
                               const Placement& placement)
    : ObjectiveState(problem) {
  if (placement.n_files() != problem.n_files() ||
      placement.n_holders() != problem.n_holders()) {
    throw std::invalid_argument("placement does not match problem");
  }
  for (const Element& e : placement.Members()) Add(e);
}

double ObjectiveState::MarginalGain(Element e) const {
  if (placement_.Contains(e)) throw std::invalid_argument("element already cached");
  auto w = problem_->WeightsOfFile(e.file);
  auto p = problem_->ContactsOfHolder(e.holder);
  auto miss = miss_by_file_.row(e.file);
  double gain = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) gain += w[i] * miss[i] * p[i];
  return gain;
}

double ObjectiveState::MissWithout(std::size_t user, std::size_t file,
                                   std::size_t holder) const {
  double prod = 1.0;
  for (std::size_t h : placement_.HoldersOf(file)) {
    if (h != holder) prod *= 1.0 - problem_->contact(user, h);
  }
  return prod;
}

double ObjectiveState::MarginalLoss(Element e) const {
  if (!placement_.Contains(e)) throw std::invalid_argument("element not cached");
  auto w = problem_->WeightsOfFile(e.file);
  auto p = problem_->ContactsOfHolder(e.holder);
  auto miss = miss_by_file_.row(e.file);
  double loss = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (p[i] == 0.0) continue;
    const double without =
        p[i] < 1.0 ? miss[i] / (1.0 - p[i]) : MissWithout(i, e.file, e.holder);
    loss += w[i] * (without - miss[i]);
  }
  return loss;
}

void ObjectiveState::Add(Element e) {
  const double gain = MarginalGain(e);
  placement_.Add(e);
  auto p = problem_->ContactsOfHolder(e.holder);
  auto miss = miss_by_file_.row(e.file);
  for (std::size_t i = 0; i < miss.size(); ++i) miss[i] *= 1.0 - p[i];
  value_ += gain;
}

void ObjectiveState::Remove(Element e) {
  const double loss = MarginalLoss(e);
  placement_.Remove(e);
  auto p = problem_->ContactsOfHolder(e.holder);
  auto miss = miss_by_file_.row(e.file);
  for (std::size_t i = 0; i < miss.size(); ++i) {
    if (p[i] == 0.0) continue;
    // The holder is no longer a member, so MissWithout sees the new set.
    miss[i] = p[i] < 1.0 ? miss[i] / (1.0 - p[i]) : MissWithout(i, e.file, e.holder);
  }
  value_ -= loss;
}

double ObjectiveState::Recompute() const {
  double total = 0.0;
  for (std::size_t a = 0; a < problem_->n_files(); ++a) {
    const auto& holders = placement_.HoldersOf(a);
    if (holders.empty()) continue;
    for (std::size_t i = 0; i < problem_->n_users(); ++i) {
      double prod = 1.0;
      for (std::size_t h : holders) prod *= 1.0 - problem_->contact(i, h);
      total += problem_->weight(i, a) * (1.0 - prod);
    }
  }
  return total;
}

void WritePlacementCsv(std::ostream& out, const Placement& p) {
  out << "holder,file\n";
  for (const Element& e : p.Members()) out << e.holder << ',' << e.file << '\n';
}

Placement ReadPlacementCsv(std::istream& in, std::size_t n_files,
                           std::vector<std::size_t> capacity) {
  Placement p(n_files, std::move(capacity));
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (line == "holder,file") continue;
    }
    std::istringstream row(line);
    Element e;
    char comma = 0;
    if (!(row >> e.holder >> comma >> e.file) || comma != ',') {
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": expected holder,file");
    }
    p.Add(e);
  }
  return p;
}

}  // namespace pcache
