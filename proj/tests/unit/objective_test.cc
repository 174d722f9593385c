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

#include <numeric>
#include <sstream>
#include <vector>

#include "gtest/gtest.h"
#include "test_support.h"

namespace pcache {
namespace {

using testing::NaiveObjective;
using testing::RandomFeasibleSet;
using testing::RandomInstance;
using testing::RandomInstanceOptions;
using testing::ToProblem;

constexpr PreferenceModel kModels[] = {PreferenceModel::kPersonalized,
                                       PreferenceModel::kCommon};

Placement Build(const CachingProblem& problem, const std::vector<Element>& members) {
  Placement p(problem.n_files(), problem.capacities());
  for (const Element& e : members) p.Add(e);
  return p;
}

TEST(CachingProblemTest, WeightsFollowModel) {
  Rng rng(1);
  const auto raw = RandomInstance(rng, {3, 4});
  const CachingProblem personal = ToProblem(raw, PreferenceModel::kPersonalized);
  const CachingProblem common = personal.WithModel(PreferenceModel::kCommon);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t a = 0; a < 4; ++a) {
      EXPECT_EQ(personal.weight(i, a), raw.activity[i] * raw.preference(i, a));
      EXPECT_EQ(common.weight(i, a), raw.activity[i] * raw.popularity[a]);
      EXPECT_EQ(personal.RankScore(i, a), raw.preference(i, a));
      EXPECT_EQ(common.RankScore(i, a), raw.popularity[a]);
    }
  }
}

TEST(CachingProblemTest, RejectsBadShapesAndProbabilities) {
  Rng rng(2);
  auto raw = RandomInstance(rng, {3, 3});
  raw.contact(0, 1) = 1.5;
  EXPECT_THROW(ToProblem(raw, PreferenceModel::kPersonalized), std::invalid_argument);
  raw = RandomInstance(rng, {3, 3});
  raw.capacity.pop_back();
  EXPECT_THROW(ToProblem(raw, PreferenceModel::kPersonalized), std::invalid_argument);
}

TEST(CachingProblemTest, FromModelAppendsBaseStations) {
  LearnedParams params;
  params.activity = {1.0, 0.5};
  params.preference = Grid<double>(2, 2, 0.5);
  params.popularity = {0.5, 0.5};
  ContactModel contacts;
  contacts.user_user = Grid<double>(2, 2, 1.0);
  contacts.user_fbs = Grid<double>(2, 1, 0.25);
  contacts.fbs_positions = {{0.5, 0.5}};
  const CachingProblem p =
      CachingProblem::FromModel(params, contacts, PreferenceModel::kPersonalized, 3, 7);
  EXPECT_EQ(p.n_holders(), 3u);
  EXPECT_EQ(p.n_fbs(), 1u);
  EXPECT_EQ(p.capacities(), (std::vector<std::size_t>{3, 3, 7}));
  EXPECT_EQ(p.contact(1, 2), 0.25);
  EXPECT_EQ(p.UsersOnly().n_holders(), 2u);
  EXPECT_EQ(p.ActivitySum(), 1.5);
}

TEST(PlacementTest, CapacityAndMembership) {
  Placement p(3, {1, 2});
  p.Add({0, 2});
  EXPECT_THROW(p.Add({0, 1}), CapacityError);
  EXPECT_THROW(p.Add({0, 2}), std::invalid_argument);
  EXPECT_THROW(p.Add({2, 0}), std::invalid_argument);
  EXPECT_THROW(p.Add({1, 3}), std::invalid_argument);
  p.Add({1, 2});
  p.Add({1, 0});
  EXPECT_EQ(p.size(), 3u);
  EXPECT_EQ(p.HoldersOf(2), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(p.Members(), (std::vector<Element>{{0, 2}, {1, 0}, {1, 2}}));
  EXPECT_FALSE(p.HasRoom(1));
  EXPECT_THROW(p.Remove({0, 0}), std::invalid_argument);
  p.Remove({1, 2});
  EXPECT_TRUE(p.HasRoom(1));
  EXPECT_EQ(p.HoldersOf(2), (std::vector<std::size_t>{0}));
  EXPECT_TRUE(p.Feasible());
}

TEST(ObjectiveTest, EmptyPlacementIsZero) {
  Rng rng(3);
  const CachingProblem problem = ToProblem(RandomInstance(rng, {}), PreferenceModel::kPersonalized);
  EXPECT_EQ(ObjectiveState(problem).Value(), 0.0);
}

TEST(ObjectiveTest, AllSelfHitsGiveActivitySum) {
  // User i prefers only file i and caches it.
  const std::size_t n = 4;
  Grid<double> pref(n, n, 0.0), contact(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    pref(i, i) = 1.0;
    contact(i, i) = 1.0;
  }
  const std::vector<double> activity = {0.1, 0.7, 0.4, 1.0};
  const CachingProblem problem(activity, pref, std::vector<double>(n, 0.25), contact,
                               std::vector<std::size_t>(n, 1),
                               PreferenceModel::kPersonalized);
  ObjectiveState s(problem);
  for (std::size_t i = 0; i < n; ++i) s.Add({i, i});
  EXPECT_NEAR(s.Value(), 2.2, 1e-15);
}

TEST(ObjectiveTest, MatchesNaiveTripleLoop) {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    RandomInstanceOptions o;
    o.n_users = 3 + trial % 3;
    o.n_files = 3 + trial % 4;
    o.n_fbs = trial % 2;
    o.cache_size = 2;
    o.fbs_cache_size = 3;
    const auto raw = RandomInstance(rng, o);
    const auto members = RandomFeasibleSet(rng, raw);
    for (PreferenceModel model : kModels) {
      const CachingProblem problem = ToProblem(raw, model);
      const ObjectiveState s(problem, Build(problem, members));
      const double expected = NaiveObjective(raw, model, members);
      EXPECT_NEAR(s.Value(), expected, 1e-12);
      EXPECT_NEAR(s.Recompute(), expected, 1e-12);
    }
  }
}

TEST(MarginalTest, FirstCopyAndUnreachableHolder) {
  Rng rng(5);
  RandomInstanceOptions o;
  o.n_users = 4;
  o.n_files = 3;
  auto raw = RandomInstance(rng, o);
  for (std::size_t i = 0; i < 4; ++i) raw.contact(i, 2) = 0.0;
  const CachingProblem problem = ToProblem(raw, PreferenceModel::kPersonalized);
  ObjectiveState s(problem);
  double first = 0.0;
  for (std::size_t i = 0; i < 4; ++i) first += problem.weight(i, 1) * raw.contact(i, 0);
  EXPECT_NEAR(s.MarginalGain({0, 1}), first, 1e-15);
  EXPECT_EQ(s.MarginalGain({2, 1}), 0.0);
  s.Add({0, 1});
  EXPECT_NEAR(s.MarginalLoss({0, 1}), first, 1e-15);
  s.Add({2, 0});
  EXPECT_EQ(s.MarginalLoss({2, 0}), 0.0);
  EXPECT_THROW(s.MarginalGain({0, 1}), std::invalid_argument);
  EXPECT_THROW(s.MarginalLoss({1, 1}), std::invalid_argument);
}

TEST(MarginalTest, MatchDefinitionalDifferences) {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    RandomInstanceOptions o;
    o.n_users = 4;
    o.n_files = 5;
    o.n_fbs = trial % 2;
    o.cache_size = 3;
    o.fbs_cache_size = 2;
    const auto raw = RandomInstance(rng, o);
    const auto members = RandomFeasibleSet(rng, raw);
    const CachingProblem problem = ToProblem(raw, PreferenceModel::kPersonalized);
    const Placement base = Build(problem, members);
    const ObjectiveState s(problem, base);
    const double g = NaiveObjective(raw, PreferenceModel::kPersonalized, members);
    for (std::size_t h = 0; h < problem.n_holders(); ++h) {
      for (std::size_t a = 0; a < problem.n_files(); ++a) {
        std::vector<Element> other = members;
        const Element e{h, a};
        if (base.Contains(e)) {
          std::erase(other, e);
          EXPECT_NEAR(s.MarginalLoss(e),
                      g - NaiveObjective(raw, PreferenceModel::kPersonalized, other), 1e-9);
        } else {
          other.push_back(e);
          EXPECT_NEAR(s.MarginalGain(e),
                      NaiveObjective(raw, PreferenceModel::kPersonalized, other) - g, 1e-12);
        }
      }
    }
  }
}

TEST(ObjectiveStateTest, AddThenRemoveRestores) {
  Rng rng(7);
  const auto raw = RandomInstance(rng, {5, 5, 0, 2});
  const CachingProblem problem = ToProblem(raw, PreferenceModel::kPersonalized);
  ObjectiveState s(problem, Build(problem, {{0, 1}, {1, 1}, {3, 4}}));
  const double before = s.Value();
  s.Add({2, 1});
  s.Remove({2, 1});
  EXPECT_NEAR(s.Value(), before, 1e-9);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t a = 0; a < 5; ++a) {
      EXPECT_NEAR(s.miss(i, a), ObjectiveState(problem, s.placement()).miss(i, a), 1e-12);
    }
  }
}

TEST(ObjectiveStateTest, CapacityIsEnforced) {
  Rng rng(8);
  const auto raw = RandomInstance(rng, {2, 5, 0, 2});
  const CachingProblem problem = ToProblem(raw, PreferenceModel::kPersonalized);
  ObjectiveState s(problem);
  s.Add({0, 0});
  s.Add({0, 1});
  EXPECT_THROW(s.Add({0, 2}), CapacityError);
  EXPECT_EQ(s.placement().size(), 2u);
}

TEST(ObjectiveStateTest, RandomWalkTracksRecompute) {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    RandomInstanceOptions o;
    o.n_users = 5;
    o.n_files = 6;
    o.n_fbs = 1;
    o.cache_size = 2;
    o.fbs_cache_size = 3;
    const auto raw = RandomInstance(rng, o);
    const CachingProblem problem = ToProblem(raw, PreferenceModel::kPersonalized);
    ObjectiveState s(problem);
    for (int step = 0; step < 50; ++step) {
      const Element e{UniformIndex(rng, problem.n_holders()),
                      UniformIndex(rng, problem.n_files())};
      if (s.placement().Contains(e)) {
        s.Remove(e);
      } else if (s.placement().HasRoom(e.holder)) {
        s.Add(e);
      }
      ASSERT_NEAR(s.Value(), s.Recompute(), 1e-9);
    }
  }
}

TEST(PlacementCsvTest, RoundTrip) {
  Placement p(4, {2, 2, 1});
  p.Add({0, 3});
  p.Add({2, 0});
  p.Add({1, 3});
  std::stringstream s;
  WritePlacementCsv(s, p);
  EXPECT_EQ(s.str(), "holder,file\n0,3\n1,3\n2,0\n");
  EXPECT_EQ(ReadPlacementCsv(s, 4, {2, 2, 1}), p);
  std::stringstream over("holder,file\n2,0\n2,1\n");
  EXPECT_ANY_THROW(ReadPlacementCsv(over, 4, {2, 2, 1}));
}

}  // namespace
}  // namespace pcache
