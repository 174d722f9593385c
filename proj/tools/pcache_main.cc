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

// pcache: command-line front end for the caching toolkit.
//
//   pcache ingest   --input ratings.dat --output matrix.txt
//   pcache complete --input matrix.txt --output complete.txt
//   pcache learn    --given matrix.txt --complete complete.txt --output params.txt
//   pcache mobility --users 30 --distance 0.1 --output contacts.txt
//   pcache solve    --params params.txt --contacts contacts.txt --solver g1-p3
//   pcache eval     --params params.txt --contacts contacts.txt --placement p.csv
//   pcache sweep    --config configs/exhaustive_cache_size.cfg
//   pcache timing   --config configs/timing_cache_size.cfg

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pcache/collaborative_filter.h"
#include "pcache/experiment.h"
#include "pcache/metrics.h"
#include "pcache/mobility.h"
#include "pcache/objective.h"
#include "pcache/params.h"
#include "pcache/ratings.h"
#include "pcache/solvers.h"

namespace {

std::ifstream OpenIn(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

std::ofstream OpenOut(const std::string& path) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

std::string Dashed(std::string key) {
  for (char& c : key) c = c == '_' ? '-' : c;
  return key;
}

// Experiment-config flags: --config plus one --<key> per config field.
struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> values;

  void Register(CLI::App* app) {
    app->add_option("--config", config_path, "key = value experiment file");
    for (const std::string& key : pcache::ConfigKeys()) {
      values[key];
      app->add_option("--" + Dashed(key), values[key], "config field " + key);
    }
  }

  pcache::ExperimentConfig Build() const {
    pcache::ExperimentConfig cfg =
        config_path.empty() ? pcache::ExperimentConfig{} : pcache::LoadConfig(config_path);
    for (const auto& [key, value] : values) {
      if (!value.empty()) pcache::ApplySetting(cfg, key, value);
    }
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Personalized-preference D2D caching toolkit"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Parse and prefilter a rating log");
  std::string ingest_in, ingest_out, ingest_format;
  pcache::PrefilterOptions prefilter;
  std::size_t sub_users = 0, sub_files = 0;
  std::uint64_t ingest_seed = 1;
  double mask_percent = 0.0;
  ingest->add_option("--input", ingest_in, "MovieLens ratings.dat or .csv")->required();
  ingest->add_option("--format", ingest_format, "dat or csv (default: by extension)");
  ingest->add_option("--min-user-ratings", prefilter.min_user_ratings)
      ->default_val(400);
  ingest->add_option("--min-item-raters", prefilter.min_item_raters)->default_val(180);
  ingest->add_flag("--dense-ids", prefilter.dense_numeric_ids,
                   "Count the full numeric id range on each axis");
  ingest->add_option("--users", sub_users, "Subsample this many users");
  ingest->add_option("--files", sub_files, "Subsample this many files");
  ingest->add_option("--mask", mask_percent, "Hide this percent of given ratings");
  ingest->add_option("--seed", ingest_seed, "Seed for subsampling and masking");
  ingest->add_option("--output", ingest_out, "Matrix snapshot to write");

  // complete
  auto* complete = app.add_subcommand("complete", "Fill missing ratings by CF");
  std::string complete_in, complete_out, cf_method = "user";
  std::size_t cf_neighbors = 20;
  std::optional<double> cf_threshold;
  complete->add_option("--input", complete_in, "Matrix snapshot")->required();
  complete->add_option("--method", cf_method, "user or item")
      ->check(CLI::IsMember({"user", "item"}));
  complete->add_option("--neighbors", cf_neighbors, "Top-K neighborhood size");
  complete->add_option("--threshold", cf_threshold,
                       "Keep neighbors with similarity above this instead of top-K");
  complete->add_option("--output", complete_out, "Completed matrix to write")
      ->required();

  // learn
  auto* learn = app.add_subcommand("learn", "Learn activity, preference, popularity");
  std::string learn_given, learn_complete, learn_out;
  std::optional<std::size_t> horizon;
  learn->add_option("--given", learn_given, "Matrix snapshot of given ratings")
      ->required();
  learn->add_option("--complete", learn_complete, "Completed matrix")->required();
  learn->add_option("--horizon", horizon, "Observation horizon T");
  learn->add_option("--output", learn_out, "Parameter table to write")->required();

  // mobility
  auto* mobility = app.add_subcommand("mobility", "Simulate mobility and contacts");
  pcache::MobilityConfig mob;
  double distance = 0.1, guard = 0.5;
  std::size_t n_fbs = 0, lambda_samples = 0;
  std::string mob_out, traj_out;
  mobility->add_option("--users", mob.n_users)->required();
  mobility->add_option("--cells", mob.cells)->default_val(40000);
  mobility->add_option("--slots", mob.slots)->default_val(1000);
  mobility->add_option("--seed", mob.seed)->default_val(1);
  mobility->add_option("--distance", distance)->default_val(0.1);
  mobility->add_option("--fbs", n_fbs, "Base stations on a square grid")
      ->default_val(0);
  mobility->add_option("--guard", guard)->default_val(0.5);
  mobility->add_option("--lambda-samples", lambda_samples,
                       "Slots sampled for the link-capacity estimate");
  mobility->add_option("--trajectory", traj_out, "Trajectory CSV to write");
  mobility->add_option("--output", mob_out, "Contact model to write")->required();

  // solve
  auto* solve = app.add_subcommand("solve", "Compute a cache placement");
  std::string solve_params, solve_contacts, solver = "g1-p3", solve_out, solve_log;
  std::size_t cache_size = 1, fbs_cache_size = 0;
  pcache::SolverOptions solver_options;
  solve->add_option("--params", solve_params)->required();
  solve->add_option("--contacts", solve_contacts)->required();
  solve->add_option("--solver", solver,
                    "opt|g1|g2 with -p3/-p4, n-<algo>-p3 or j-<algo>-p5");
  solve->add_option("--cache-size", cache_size)->default_val(1);
  solve->add_option("--fbs-cache-size", fbs_cache_size)->default_val(0);
  solve->add_option("--g2-rounds", solver_options.g2_rounds)->default_val(3);
  solve->add_flag("--g2-early-stop", solver_options.g2_early_stop);
  solve->add_option("--output", solve_out, "Placement CSV to write");
  solve->add_option("--log", solve_log, "Iteration log CSV to write");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a placement");
  std::string eval_params, eval_contacts, eval_placement, eval_traj;
  std::size_t eval_cache = 1, eval_fbs_cache = 0, mc_events = 0;
  double lambda_hat = 0.0;
  std::uint64_t eval_seed = 1;
  eval->add_option("--params", eval_params)->required();
  eval->add_option("--contacts", eval_contacts)->required();
  eval->add_option("--placement", eval_placement)->required();
  eval->add_option("--cache-size", eval_cache)->default_val(1);
  eval->add_option("--fbs-cache-size", eval_fbs_cache)->default_val(0);
  eval->add_option("--lambda", lambda_hat, "Link capacity for the outage capacity");
  eval->add_option("--trajectory", eval_traj, "Trajectory CSV for Monte Carlo");
  eval->add_option("--mc-events", mc_events)->default_val(0);
  eval->add_option("--seed", eval_seed)->default_val(1);

  // sweep / timing
  auto* sweep = app.add_subcommand("sweep", "Run an experiment sweep to CSV");
  ConfigFlags sweep_flags;
  sweep_flags.Register(sweep);
  auto* timing = app.add_subcommand("timing", "Time solvers over a sweep");
  ConfigFlags timing_flags;
  timing_flags.Register(timing);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      std::vector<pcache::RatingEvent> events;
      if (ingest_format.empty()) {
        events = pcache::ReadMovieLensFile(ingest_in);
      } else {
        std::ifstream in = OpenIn(ingest_in);
        events = pcache::ParseMovieLens(
            in, ingest_format == "csv" ? pcache::LogFormat::kCsv : pcache::LogFormat::kDat);
      }
      pcache::RatingMatrix m = pcache::Prefilter(events, prefilter);
      std::cout << "prefiltered " << m.n_users() << " x " << m.n_files()
                << " observed " << m.ObservedCount() << " missing "
                << m.MissingCount() << " sparsity " << std::fixed
                << std::setprecision(4) << m.Sparsity() << '\n';
      if (mask_percent > 0.0) m = pcache::MaskRatings(m, mask_percent / 100.0, ingest_seed);
      if (sub_users > 0 || sub_files > 0) {
        m = pcache::Subsample(m, sub_users ? sub_users : m.n_users(),
                              sub_files ? sub_files : m.n_files(), ingest_seed);
      }
      if (!ingest_out.empty()) {
        std::ofstream out = OpenOut(ingest_out);
        pcache::WriteSnapshot(out, m);
      }
      return 0;
    }
    if (*complete) {
      std::ifstream in = OpenIn(complete_in);
      const pcache::RatingMatrix m = pcache::ReadSnapshot(in);
      const auto policy = cf_threshold ? pcache::NeighborhoodPolicy::Threshold(*cf_threshold)
                                       : pcache::NeighborhoodPolicy::TopK(cf_neighbors);
      const pcache::CompleteRatingMatrix c = pcache::CompleteMatrix(
          m, cf_method == "user" ? pcache::CfMethod::kUserBased
                                 : pcache::CfMethod::kItemBased,
          policy);
      std::ofstream out = OpenOut(complete_out);
      pcache::WriteComplete(out, c);
      std::cout << "predicted " << c.PredictedCount() << " cells, " << c.FallbackCount()
                << " by fallback\n";
      return 0;
    }
    if (*learn) {
      std::ifstream gin = OpenIn(learn_given);
      std::ifstream cin = OpenIn(learn_complete);
      const pcache::RatingMatrix given = pcache::ReadSnapshot(gin);
      const pcache::CompleteRatingMatrix c = pcache::ReadComplete(cin);
      const pcache::LearnedParams p = pcache::LearnParams(given, c, horizon);
      std::ofstream out = OpenOut(learn_out);
      pcache::WriteParams(out, p);
      return 0;
    }
    if (*mobility) {
      const pcache::Trajectory traj = pcache::GenerateTrajectories(mob);
      const std::vector<pcache::Point> fbs = pcache::GridFbsPositions(n_fbs);
      const pcache::ContactModel c = pcache::EstimateContacts(traj, distance, fbs);
      std::ofstream out = OpenOut(mob_out);
      pcache::WriteContacts(out, c);
      if (!traj_out.empty()) {
        std::ofstream t = OpenOut(traj_out);
        pcache::WriteTrajectoryCsv(t, traj);
      }
      if (lambda_samples > 0) {
        std::cout << "lambda_hat "
                  << pcache::EstimateLambda(traj, distance, guard, lambda_samples,
                                            mob.seed)
                  << '\n';
      }
      return 0;
    }
    if (*solve) {
      std::ifstream pin = OpenIn(solve_params);
      std::ifstream cin = OpenIn(solve_contacts);
      const pcache::LearnedParams params = pcache::ReadParams(pin);
      const pcache::ContactModel contacts = pcache::ReadContacts(cin);
      const pcache::CachingProblem full = pcache::CachingProblem::FromModel(
          params, contacts, pcache::PreferenceModel::kPersonalized, cache_size,
          fbs_cache_size);
      const pcache::SolverSpec spec = pcache::ParseSolverLabel(solver);
      const pcache::SolverResult r = pcache::SolveSpec(spec, full, solver_options);
      const pcache::CachingProblem truth = pcache::EvaluationProblem(spec, full);
      std::cout << "solver " << solver << " objective " << r.value << " h_avg "
                << r.value / truth.ActivitySum() << " seconds " << r.seconds << '\n';
      if (!solve_out.empty()) {
        std::ofstream out = OpenOut(solve_out);
        pcache::WritePlacementCsv(out, r.placement);
      }
      if (!solve_log.empty()) {
        std::ofstream out = OpenOut(solve_log);
        out << "step,kind,round,holder,file,delta,value\n";
        out << std::setprecision(17);
        for (std::size_t k = 0; k < r.log.size(); ++k) {
          const auto& s = r.log[k];
          out << k << ','
              << (s.kind == pcache::StepRecord::Kind::kAdd ? "add" : "remove") << ','
              << s.round << ',' << s.element.holder << ',' << s.element.file << ','
              << s.delta << ',' << s.value << '\n';
        }
      }
      return 0;
    }
    if (*eval) {
      std::ifstream pin = OpenIn(eval_params);
      std::ifstream cin = OpenIn(eval_contacts);
      std::ifstream lin = OpenIn(eval_placement);
      const pcache::LearnedParams params = pcache::ReadParams(pin);
      const pcache::ContactModel contacts = pcache::ReadContacts(cin);
      const pcache::CachingProblem truth = pcache::CachingProblem::FromModel(
          params, contacts, pcache::PreferenceModel::kPersonalized, eval_cache,
          eval_fbs_cache);
      const pcache::Placement placement =
          pcache::ReadPlacementCsv(lin, truth.n_files(), truth.capacities());
      pcache::MetricsReport m = pcache::Evaluate(truth, placement, lambda_hat);
      if (mc_events > 0) {
        if (eval_traj.empty()) throw std::invalid_argument("--mc-events needs --trajectory");
        std::ifstream tin = OpenIn(eval_traj);
        const pcache::Trajectory traj = pcache::ReadTrajectoryCsv(tin);
        const pcache::MonteCarloEstimate mc = pcache::MonteCarloHitRatio(
            truth, placement, traj, contacts.distance, contacts.fbs_positions, mc_events,
            eval_seed);
        m.mc_h_avg = mc.mean;
        m.mc_stderr = mc.std_error;
      }
      std::cout << "h_avg,o_avg,lambda_hat,capacity,mc_h_avg,mc_stderr\n"
                << std::setprecision(12) << m.h_avg << ',' << m.o_avg << ','
                << m.lambda_hat << ',' << m.capacity << ',';
      if (m.mc_h_avg) std::cout << *m.mc_h_avg << ',' << *m.mc_stderr;
      else std::cout << ',';
      std::cout << '\n';
      return 0;
    }
    if (*sweep) {
      const pcache::ExperimentConfig cfg = sweep_flags.Build();
      pcache::RunSummary s;
      if (cfg.output.empty()) {
        s = pcache::RunExperiment(cfg, std::cout);
      } else {
        s = pcache::RunExperimentToFile(cfg);
      }
      std::cerr << s.rows << " rows, " << s.errors << " errors, " << s.reused
                << " reused\n";
      return s.errors == 0 ? 0 : 1;
    }
    if (*timing) {
      const pcache::ExperimentConfig cfg = timing_flags.Build();
      const std::vector<pcache::TimingRow> rows = pcache::MeasureTiming(cfg);
      std::ofstream file;
      if (!cfg.output.empty()) file = OpenOut(cfg.output);
      std::ostream& out = cfg.output.empty() ? std::cout : file;
      out << pcache::TimingHeader() << '\n';
      bool failed = false;
      for (const auto& r : rows) {
        out << pcache::FormatTimingRow(r) << '\n';
        failed |= !r.error.empty();
      }
      return failed ? 1 : 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "pcache: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
