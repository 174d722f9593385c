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

#ifndef PCACHE_EXPERIMENT_H_
#define PCACHE_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pcache/collaborative_filter.h"
#include "pcache/metrics.h"
#include "pcache/mobility.h"
#include "pcache/params.h"
#include "pcache/ratings.h"
#include "pcache/solvers.h"

namespace pcache {

// Declarative experiment description. Text form is one "key = value" per
// line, '#' starts a comment; keys match the field names below (see
// ConfigKeys()). List values are comma separated; sweep_values also accepts
// "first:last" and "first:last:step".
struct ExperimentConfig {
  std::string dataset = "synthetic";  // MovieLens path or "synthetic"
  SyntheticLogOptions synthetic;      // synthetic_users, synthetic_items, ...
  PrefilterOptions prefilter{400, 180, false};

  std::size_t users = 30;
  std::size_t files = 200;
  std::size_t cache_size = 5;
  double distance = 0.1;
  std::size_t cells = 40000;
  std::size_t slots = 1000;
  std::size_t horizon = 0;  // 0: the largest request count
  std::size_t fbs = 0;
  std::size_t fbs_cache_size = 0;
  double guard = 0.5;
  double mask = 0.0;  // percent of given ratings hidden before completion

  std::vector<std::uint64_t> seeds{1};
  CfMethod cf_method = CfMethod::kUserBased;
  NeighborhoodPolicy cf_policy;
  std::vector<std::string> solvers{"g1-p3"};
  std::string sweep = "cache_size";
  std::vector<double> sweep_values{5};

  std::size_t g2_rounds = 3;
  bool g2_early_stop = false;
  std::size_t lambda_samples = 0;
  std::size_t mc_events = 0;
  std::size_t timing_reps = 3;

  std::string output;
  std::string cache_dir;
  std::size_t threads = 1;  // 0: one per hardware thread
  bool resume = false;
};

// Sets one field from its text form. Throws std::invalid_argument on an
// unknown key or a malformed value.
void ApplySetting(ExperimentConfig& cfg, const std::string& key,
                  const std::string& value);
std::vector<std::string> ConfigKeys();
ExperimentConfig ParseConfig(std::istream& in);
ExperimentConfig LoadConfig(const std::string& path);
// Throws std::invalid_argument describing the first violated rule.
void Validate(const ExperimentConfig& cfg);
// cfg with the sweep variable set to `value`.
ExperimentConfig AtSweepPoint(const ExperimentConfig& cfg, double value);

// Solver labels: "<algo>-p3" (personalized), "<algo>-p4" (common),
// "n-<algo>-p3" (base stations by popularity, users personalized) and
// "j-<algo>-p5" (joint), with algo one of opt, g1, g2.
enum class Formulation { kPersonalized, kCommon, kHybridNaive, kHybridJoint };
struct SolverSpec {
  Algorithm algorithm;
  Formulation formulation;
};
SolverSpec ParseSolverLabel(const std::string& label);

// Runs `spec` on the users-plus-stations problem `full` (personalized
// weights); P3 and P4 labels drop the stations first.
SolverResult SolveSpec(const SolverSpec& spec, const CachingProblem& full,
                       const SolverOptions& options = {});
// The problem a placement from `spec` is scored on: `full` for hybrid
// labels, its users-only restriction otherwise.
CachingProblem EvaluationProblem(const SolverSpec& spec, const CachingProblem& full);

// Memory cache for expensive stages, optionally backed by a directory.
// Keys are FNV-1a hashes of the upstream settings. Thread safe.
class ArtifactCache {
 public:
  explicit ArtifactCache(std::string dir = {});
  ~ArtifactCache();

  std::shared_ptr<const RatingMatrix> Base(const ExperimentConfig& cfg);
  std::shared_ptr<const CompleteRatingMatrix> Completion(
      const ExperimentConfig& cfg, std::optional<std::uint64_t> mask_seed);
  std::shared_ptr<const ContactModel> Contacts(const ExperimentConfig& cfg,
                                               std::uint64_t seed);

  // Stage computations so far (cache misses), by kind.
  std::size_t computed(const std::string& kind) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::uint64_t Fnv1a(const std::string& text);

// Failure inside one pipeline stage ("ingest", "cf", "learn", "mobility",
// "solve", "eval").
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// Everything one (sweep point, seed) pair needs.
struct Instance {
  LearnedParams truth;     // from the unmasked completion
  LearnedParams planning;  // from the masked completion (== truth if mask 0)
  Trajectory trajectory;
  std::shared_ptr<const ContactModel> contacts;
  double lambda_hat = 0.0;
};
Instance BuildInstance(const ExperimentConfig& cfg, std::uint64_t seed,
                       ArtifactCache& cache);

struct ResultRow {
  std::size_t point = 0;
  double value = 0.0;
  std::uint64_t seed = 0;
  std::string solver;
  ExperimentConfig cfg;  // the point's configuration
  MetricsReport metrics;
  double objective = 0.0;
  double seconds = 0.0;
  std::string error;  // empty, or the failing stage
  std::string message;
};

// Solves and evaluates every configured solver for one instance. Placements
// are evaluated against the truth parameters.
std::vector<ResultRow> RunPoint(const ExperimentConfig& point_cfg,
                                std::size_t point, double value,
                                std::uint64_t seed, ArtifactCache& cache);

std::string ResultsHeader();
std::string FormatRow(const ResultRow& row);

struct RunSummary {
  std::size_t rows = 0;
  std::size_t errors = 0;
  std::size_t reused = 0;
};

// Sweep points x seeds x solvers, written in that order to `out`. With
// cfg.resume, pairs fully present in `previous` (an earlier results file)
// are copied instead of recomputed.
RunSummary RunExperiment(const ExperimentConfig& cfg, std::ostream& out,
                         std::istream* previous = nullptr);
// Resolves cfg.output (and resume) and writes the file.
RunSummary RunExperimentToFile(const ExperimentConfig& cfg);

struct TimingRow {
  std::size_t point = 0;
  double value = 0.0;
  std::uint64_t seed = 0;
  std::string solver;
  std::size_t users = 0;
  std::size_t files = 0;
  std::size_t cache_size = 0;
  std::vector<double> seconds;
  double median = 0.0;
  double objective = 0.0;
  std::string error;
};

std::vector<TimingRow> MeasureTiming(const ExperimentConfig& cfg);
std::string TimingHeader();
std::string FormatTimingRow(const TimingRow& row);

}  // namespace pcache

#endif  // PCACHE_EXPERIMENT_H_
