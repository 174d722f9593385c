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

#include "pcache/experiment.h"

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"

namespace pcache {
namespace {

ExperimentConfig Small() {
  std::istringstream in(R"(# tiny synthetic run
dataset = synthetic
synthetic_users = 60
synthetic_items = 50
min_user_ratings = 5
min_item_raters = 5
users = 5
files = 5
cells = 400
slots = 100
distance = 0.2
seeds = 1, 2
solvers = opt-p3, g1-p3, g2-p3, g1-p4
sweep = cache_size
sweep_values = 1:3
)");
  return ParseConfig(in);
}

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> Fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::size_t Column(const std::string& name) {
  const auto header = Fields(ResultsHeader());
  return std::find(header.begin(), header.end(), name) - header.begin();
}

TEST(ConfigTest, ParsesKeysCommentsAndRanges) {
  const ExperimentConfig cfg = Small();
  EXPECT_EQ(cfg.synthetic.n_users, 60u);
  EXPECT_EQ(cfg.prefilter.min_item_raters, 5u);
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{1, 2}));
  EXPECT_EQ(cfg.solvers.size(), 4u);
  EXPECT_EQ(cfg.sweep_values, (std::vector<double>{1, 2, 3}));
  EXPECT_NO_THROW(Validate(cfg));

  ExperimentConfig c;
  ApplySetting(c, "sweep_values", "0.05:0.15:0.025");
  ASSERT_EQ(c.sweep_values.size(), 5u);
  EXPECT_NEAR(c.sweep_values.back(), 0.15, 1e-12);
  ApplySetting(c, "cf_threshold", "0.2");
  EXPECT_EQ(c.cf_policy.kind, NeighborhoodPolicy::Kind::kThreshold);
  ApplySetting(c, "g2_early_stop", "true");
  EXPECT_TRUE(c.g2_early_stop);
}

TEST(ConfigTest, RejectsBadInput) {
  ExperimentConfig c;
  EXPECT_THROW(ApplySetting(c, "no_such_key", "1"), std::invalid_argument);
  EXPECT_THROW(ApplySetting(c, "users", "many"), std::invalid_argument);
  EXPECT_THROW(ApplySetting(c, "cf_method", "svd"), std::invalid_argument);
  std::istringstream bad("users 5\n");
  EXPECT_THROW(ParseConfig(bad), std::invalid_argument);

  c = Small();
  c.solvers = {"g3-p3"};
  EXPECT_THROW(Validate(c), std::invalid_argument);
  c = Small();
  c.sweep = "seeds";
  EXPECT_THROW(Validate(c), std::invalid_argument);
  c = Small();
  c.fbs = 3;
  EXPECT_THROW(Validate(c), std::invalid_argument);
}

TEST(ConfigTest, EveryKeyIsAccepted) {
  const auto keys = ConfigKeys();
  EXPECT_NE(std::find(keys.begin(), keys.end(), "sweep_values"), keys.end());
  EXPECT_NE(std::find(keys.begin(), keys.end(), "mc_events"), keys.end());
}

TEST(SolverLabelTest, ParsesAllForms) {
  EXPECT_EQ(ParseSolverLabel("opt-p3").algorithm, Algorithm::kOptimal);
  EXPECT_EQ(ParseSolverLabel("g1-p4").formulation, Formulation::kCommon);
  EXPECT_EQ(ParseSolverLabel("n-g2-p3").formulation, Formulation::kHybridNaive);
  const SolverSpec j = ParseSolverLabel("j-g1-p5");
  EXPECT_EQ(j.algorithm, Algorithm::kG1);
  EXPECT_EQ(j.formulation, Formulation::kHybridJoint);
  EXPECT_THROW(ParseSolverLabel("g1-p5"), std::invalid_argument);
  EXPECT_THROW(ParseSolverLabel("j-g1-p3"), std::invalid_argument);
}

TEST(RunExperimentTest, RowCountOrderAndDeterminism) {
  const ExperimentConfig cfg = Small();
  std::ostringstream a, b;
  const RunSummary s = RunExperiment(cfg, a);
  RunExperiment(cfg, b);
  EXPECT_EQ(s.rows, 3u * 2u * 4u);
  EXPECT_EQ(s.errors, 0u);
  const auto lines = Lines(a.str());
  ASSERT_EQ(lines.size(), 1u + s.rows);
  EXPECT_EQ(lines[0], ResultsHeader());
  const std::size_t h = Column("h_avg"), seconds = Column("seconds");
  const auto b_lines = Lines(b.str());
  for (std::size_t k = 1; k < lines.size(); ++k) {
    auto x = Fields(lines[k]), y = Fields(b_lines[k]);
    x[seconds].clear();
    y[seconds].clear();
    EXPECT_EQ(x, y);
  }
  // Optimal hit ratio cannot drop as the cache grows.
  std::map<std::string, double> last;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto f = Fields(lines[k]);
    if (f[Column("solver")] != "opt-p3") continue;
    const std::string seed = f[Column("seed")];
    const double v = std::stod(f[h]);
    if (last.contains(seed)) EXPECT_GE(v, last[seed] - 1e-12);
    last[seed] = v;
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(RunExperimentTest, SinglePointSingleSeed) {
  ExperimentConfig cfg = Small();
  cfg.seeds = {4};
  cfg.solvers = {"g1-p3"};
  cfg.sweep_values = {2};
  std::ostringstream out;
  EXPECT_EQ(RunExperiment(cfg, out).rows, 1u);
  EXPECT_EQ(Lines(out.str()).size(), 2u);
}

TEST(RunExperimentTest, ResumeReusesFinishedPairs) {
  ExperimentConfig cfg = Small();
  cfg.solvers = {"g1-p3", "g2-p3"};
  std::ostringstream full;
  RunExperiment(cfg, full);
  const auto lines = Lines(full.str());

  // Keep the header and the first three rows; the third row leaves its
  // (point, seed) pair incomplete.
  std::string partial;
  for (std::size_t k = 0; k < 4; ++k) partial += lines[k] + "\n";
  std::istringstream previous(partial);
  cfg.resume = true;
  std::ostringstream resumed;
  const RunSummary s = RunExperiment(cfg, resumed, &previous);
  EXPECT_EQ(s.reused, 1u);
  const auto again = Lines(resumed.str());
  ASSERT_EQ(again.size(), lines.size());
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(again[k], lines[k]);
  const std::size_t seconds = Column("seconds");
  for (std::size_t k = 3; k < lines.size(); ++k) {
    auto x = Fields(again[k]), y = Fields(lines[k]);
    x[seconds].clear();
    y[seconds].clear();
    EXPECT_EQ(x, y);
  }
}

TEST(RunExperimentTest, FailingPointBecomesErrorRows) {
  ExperimentConfig cfg = Small();
  cfg.seeds = {1};
  cfg.solvers = {"g1-p3", "g1-p4"};
  cfg.sweep = "users";
  cfg.sweep_values = {5, 100000};
  std::ostringstream out;
  const RunSummary s = RunExperiment(cfg, out);
  EXPECT_EQ(s.rows, 4u);
  EXPECT_EQ(s.errors, 2u);
  const auto lines = Lines(out.str());
  EXPECT_TRUE(Fields(lines[1])[Column("error")].empty());
  EXPECT_EQ(Fields(lines[3])[Column("error")], "ingest");
  EXPECT_EQ(Fields(lines[4])[Column("error")], "ingest");
}

TEST(RunExperimentTest, OptimalTooLargeFailsOnlyItsRow) {
  ExperimentConfig cfg = Small();
  cfg.seeds = {1};
  cfg.files = 8;
  cfg.solvers = {"opt-p3", "g1-p3"};
  cfg.sweep_values = {1};
  std::ostringstream out;
  const RunSummary s = RunExperiment(cfg, out);
  EXPECT_EQ(s.errors, 1u);
  const auto lines = Lines(out.str());
  EXPECT_EQ(Fields(lines[1])[Column("error")], "solve");
  EXPECT_TRUE(Fields(lines[2])[Column("error")].empty());
}

TEST(ArtifactCacheTest, StagesComputedOnce) {
  ExperimentConfig cfg = Small();
  ArtifactCache cache;
  const auto a = cache.Base(cfg);
  const auto b = cache.Base(cfg);
  EXPECT_EQ(a.get(), b.get());
  EXPECT_EQ(cache.computed("prefilter"), 1u);
  cache.Contacts(cfg, 1);
  cache.Contacts(cfg, 1);
  cache.Contacts(cfg, 2);
  EXPECT_EQ(cache.computed("contacts"), 2u);
}

TEST(InstanceTest, MaskLeavesTruthUntouched) {
  ExperimentConfig cfg = Small();
  cfg.users = 8;
  cfg.files = 10;
  ArtifactCache cache;
  const Instance plain = BuildInstance(cfg, 3, cache);
  EXPECT_EQ(plain.truth.preference, plain.planning.preference);
  cfg.mask = 30;
  const Instance masked = BuildInstance(cfg, 3, cache);
  EXPECT_EQ(masked.truth.preference, plain.truth.preference);
  EXPECT_EQ(masked.truth.activity, masked.planning.activity);
  EXPECT_FALSE(masked.planning.preference == masked.truth.preference);
}

TEST(FnvTest, KnownVector) {
  EXPECT_EQ(Fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}

}  // namespace
}  // namespace pcache
