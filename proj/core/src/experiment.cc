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
#include <atomic>
#include <charconv>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "pcache/random.h"

namespace pcache {
namespace {

// Stream ids for per-seed randomness.
constexpr std::uint64_t kSubsampleStream = 11;
constexpr std::uint64_t kMobilityStream = 13;
constexpr std::uint64_t kLambdaStream = 17;
constexpr std::uint64_t kMonteCarloStream = 19;

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void BadValue(const std::string& key, const std::string& value) {
  throw std::invalid_argument("bad value for " + key + ": '" + value + "'");
}

std::uint64_t ParseU64(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const char* end = value.data() + value.size();
  auto [p, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || p != end) BadValue(key, value);
  return v;
}

std::size_t ParseSize(const std::string& key, const std::string& value) {
  return static_cast<std::size_t>(ParseU64(key, value));
}

double ParseDouble(const std::string& key, const std::string& value) {
  double v = 0.0;
  const char* end = value.data() + value.size();
  auto [p, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v)) BadValue(key, value);
  return v;
}

bool ParseBool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  BadValue(key, value);
}

std::vector<double> ParseSweepValues(const std::string& key,
                                     const std::string& value) {
  std::vector<double> out;
  for (const std::string& item : SplitList(value)) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      out.push_back(ParseDouble(key, item));
      continue;
    }
    const auto second = item.find(':', colon + 1);
    const double first = ParseDouble(key, item.substr(0, colon));
    const double last = ParseDouble(
        key, item.substr(colon + 1, second == std::string::npos
                                        ? std::string::npos
                                        : second - colon - 1));
    const double step = second == std::string::npos
                            ? 1.0
                            : ParseDouble(key, item.substr(second + 1));
    if (!(step > 0.0) || last < first) BadValue(key, item);
    const auto count = static_cast<std::size_t>(std::floor((last - first) / step + 1e-9));
    for (std::size_t k = 0; k <= count; ++k) {
      // Rounded to 12 significant digits so 0.1 + 2*0.05 prints as 0.2.
      std::ostringstream s;
      s << std::setprecision(12) << first + static_cast<double>(k) * step;
      out.push_back(std::stod(s.str()));
    }
  }
  if (out.empty()) BadValue(key, value);
  return out;
}

std::string Num(double v) {
  std::ostringstream s;
  s << std::setprecision(12) << v;
  return s.str();
}

std::string PolicyText(const NeighborhoodPolicy& p) {
  return p.kind == NeighborhoodPolicy::Kind::kTopK ? "topk:" + std::to_string(p.k)
                                                   : "threshold:" + Num(p.threshold);
}

std::string MethodText(CfMethod m) {
  return m == CfMethod::kUserBased ? "user" : "item";
}

const std::set<std::string>& SweepableKeys() {
  static const std::set<std::string> keys = {
      "users",  "files", "cache_size", "distance",     "cells",
      "slots",  "horizon", "fbs",      "fbs_cache_size", "guard",
      "mask",   "cf_neighbors", "cf_threshold", "g2_rounds"};
  return keys;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&,
                                  const std::string&)>;

const std::map<std::string, Setter>& Setters() {
  static const std::map<std::string, Setter> setters = [] {
    std::map<std::string, Setter> m;
    auto size_field = [](std::size_t ExperimentConfig::*f) {
      return [f](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.*f = ParseSize(k, v);
      };
    };
    auto double_field = [](double ExperimentConfig::*f) {
      return [f](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.*f = ParseDouble(k, v);
      };
    };
    m["dataset"] = [](ExperimentConfig& c, const std::string&, const std::string& v) {
      c.dataset = v;
    };
    m["synthetic_users"] = [](ExperimentConfig& c, const std::string& k,
                              const std::string& v) {
      c.synthetic.n_users = ParseSize(k, v);
    };
    m["synthetic_items"] = [](ExperimentConfig& c, const std::string& k,
                              const std::string& v) {
      c.synthetic.n_items = ParseSize(k, v);
    };
    m["synthetic_rank"] = [](ExperimentConfig& c, const std::string& k,
                             const std::string& v) {
      c.synthetic.rank = ParseSize(k, v);
    };
    m["synthetic_density"] = [](ExperimentConfig& c, const std::string& k,
                                const std::string& v) {
      c.synthetic.density = ParseDouble(k, v);
    };
    m["synthetic_noise"] = [](ExperimentConfig& c, const std::string& k,
                              const std::string& v) {
      c.synthetic.noise = ParseDouble(k, v);
    };
    m["synthetic_seed"] = [](ExperimentConfig& c, const std::string& k,
                             const std::string& v) {
      c.synthetic.seed = ParseU64(k, v);
    };
    m["min_user_ratings"] = [](ExperimentConfig& c, const std::string& k,
                               const std::string& v) {
      c.prefilter.min_user_ratings = ParseSize(k, v);
    };
    m["min_item_raters"] = [](ExperimentConfig& c, const std::string& k,
                              const std::string& v) {
      c.prefilter.min_item_raters = ParseSize(k, v);
    };
    m["dense_ids"] = [](ExperimentConfig& c, const std::string& k,
                        const std::string& v) {
      c.prefilter.dense_numeric_ids = ParseBool(k, v);
    };
    m["users"] = size_field(&ExperimentConfig::users);
    m["files"] = size_field(&ExperimentConfig::files);
    m["cache_size"] = size_field(&ExperimentConfig::cache_size);
    m["distance"] = double_field(&ExperimentConfig::distance);
    m["cells"] = size_field(&ExperimentConfig::cells);
    m["slots"] = size_field(&ExperimentConfig::slots);
    m["horizon"] = size_field(&ExperimentConfig::horizon);
    m["fbs"] = size_field(&ExperimentConfig::fbs);
    m["fbs_cache_size"] = size_field(&ExperimentConfig::fbs_cache_size);
    m["guard"] = double_field(&ExperimentConfig::guard);
    m["mask"] = double_field(&ExperimentConfig::mask);
    m["seeds"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.seeds.clear();
      for (const std::string& s : SplitList(v)) c.seeds.push_back(ParseU64(k, s));
    };
    m["cf_method"] = [](ExperimentConfig& c, const std::string& k,
                        const std::string& v) {
      if (v == "user") {
        c.cf_method = CfMethod::kUserBased;
      } else if (v == "item") {
        c.cf_method = CfMethod::kItemBased;
      } else {
        BadValue(k, v);
      }
    };
    m["cf_neighbors"] = [](ExperimentConfig& c, const std::string& k,
                           const std::string& v) {
      c.cf_policy = NeighborhoodPolicy::TopK(ParseSize(k, v));
    };
    m["cf_threshold"] = [](ExperimentConfig& c, const std::string& k,
                           const std::string& v) {
      c.cf_policy = NeighborhoodPolicy::Threshold(ParseDouble(k, v));
    };
    m["solvers"] = [](ExperimentConfig& c, const std::string&, const std::string& v) {
      c.solvers = SplitList(v);
    };
    m["sweep"] = [](ExperimentConfig& c, const std::string&, const std::string& v) {
      c.sweep = v;
    };
    m["sweep_values"] = [](ExperimentConfig& c, const std::string& k,
                           const std::string& v) {
      c.sweep_values = ParseSweepValues(k, v);
    };
    m["g2_rounds"] = size_field(&ExperimentConfig::g2_rounds);
    m["g2_early_stop"] = [](ExperimentConfig& c, const std::string& k,
                            const std::string& v) {
      c.g2_early_stop = ParseBool(k, v);
    };
    m["lambda_samples"] = size_field(&ExperimentConfig::lambda_samples);
    m["mc_events"] = size_field(&ExperimentConfig::mc_events);
    m["timing_reps"] = size_field(&ExperimentConfig::timing_reps);
    m["output"] = [](ExperimentConfig& c, const std::string&, const std::string& v) {
      c.output = v;
    };
    m["cache_dir"] = [](ExperimentConfig& c, const std::string&, const std::string& v) {
      c.cache_dir = v;
    };
    m["threads"] = size_field(&ExperimentConfig::threads);
    m["resume"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.resume = ParseBool(k, v);
    };
    return m;
  }();
  return setters;
}

template <typename F>
auto InStage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

std::string Hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string BaseKey(const ExperimentConfig& cfg) {
  std::ostringstream k;
  if (cfg.dataset == "synthetic") {
    const auto& s = cfg.synthetic;
    k << "synthetic " << s.n_users << ' ' << s.n_items << ' ' << s.rank << ' '
      << Num(s.density) << ' ' << Num(s.noise) << ' ' << s.seed;
  } else {
    std::error_code ec;
    const auto size = std::filesystem::file_size(cfg.dataset, ec);
    k << "file " << cfg.dataset << ' ' << (ec ? 0 : size);
  }
  k << " prefilter " << cfg.prefilter.min_user_ratings << ' '
    << cfg.prefilter.min_item_raters << ' ' << cfg.prefilter.dense_numeric_ids;
  return k.str();
}

std::uint64_t MobilitySeed(std::uint64_t seed) {
  return DeriveSeed(seed, kMobilityStream);
}

MobilityConfig MobilityFor(const ExperimentConfig& cfg, std::uint64_t seed) {
  return MobilityConfig{cfg.users, cfg.cells, cfg.slots, MobilitySeed(seed)};
}

}  // namespace

std::uint64_t Fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void ApplySetting(ExperimentConfig& cfg, const std::string& key,
                  const std::string& value) {
  const auto it = Setters().find(key);
  if (it == Setters().end()) throw std::invalid_argument("unknown key: " + key);
  it->second(cfg, key, Trim(value));
}

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : Setters()) keys.push_back(k);
  return keys;
}

ExperimentConfig ParseConfig(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": expected key = value");
    }
    try {
      ApplySetting(cfg, Trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": " +
                                  e.what());
    }
  }
  return cfg;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return ParseConfig(in);
}

ExperimentConfig AtSweepPoint(const ExperimentConfig& cfg, double value) {
  ExperimentConfig out = cfg;
  ApplySetting(out, cfg.sweep, Num(value));
  return out;
}

SolverSpec ParseSolverLabel(const std::string& label) {
  std::string rest = label;
  std::optional<Formulation> hybrid;
  if (rest.starts_with("n-")) {
    hybrid = Formulation::kHybridNaive;
    rest = rest.substr(2);
  } else if (rest.starts_with("j-")) {
    hybrid = Formulation::kHybridJoint;
    rest = rest.substr(2);
  }
  const auto dash = rest.find('-');
  if (dash == std::string::npos) throw std::invalid_argument("bad solver label: " + label);
  const std::string algo = rest.substr(0, dash);
  const std::string form = rest.substr(dash + 1);
  SolverSpec spec{};
  if (algo == "opt") {
    spec.algorithm = Algorithm::kOptimal;
  } else if (algo == "g1") {
    spec.algorithm = Algorithm::kG1;
  } else if (algo == "g2") {
    spec.algorithm = Algorithm::kG2;
  } else {
    throw std::invalid_argument("bad solver label: " + label);
  }
  if (hybrid == Formulation::kHybridNaive && form == "p3") {
    spec.formulation = *hybrid;
  } else if (hybrid == Formulation::kHybridJoint && form == "p5") {
    spec.formulation = *hybrid;
  } else if (!hybrid && form == "p3") {
    spec.formulation = Formulation::kPersonalized;
  } else if (!hybrid && form == "p4") {
    spec.formulation = Formulation::kCommon;
  } else {
    throw std::invalid_argument("bad solver label: " + label);
  }
  return spec;
}

SolverResult SolveSpec(const SolverSpec& spec, const CachingProblem& full,
                       const SolverOptions& options) {
  switch (spec.formulation) {
    case Formulation::kPersonalized:
      return Solve(full.UsersOnly(), spec.algorithm, options);
    case Formulation::kCommon:
      return Solve(full.UsersOnly().WithModel(PreferenceModel::kCommon),
                   spec.algorithm, options);
    case Formulation::kHybridNaive:
      return SolveHybridNaive(full, spec.algorithm, options);
    case Formulation::kHybridJoint:
      return SolveHybridJoint(full, spec.algorithm, options);
  }
  throw std::invalid_argument("unknown formulation");
}

CachingProblem EvaluationProblem(const SolverSpec& spec, const CachingProblem& full) {
  return spec.formulation == Formulation::kHybridNaive ||
                 spec.formulation == Formulation::kHybridJoint
             ? full
             : full.UsersOnly();
}

void Validate(const ExperimentConfig& cfg) {
  if (cfg.seeds.empty()) throw std::invalid_argument("seeds must not be empty");
  if (cfg.sweep_values.empty()) {
    throw std::invalid_argument("sweep_values must not be empty");
  }
  if (!SweepableKeys().contains(cfg.sweep)) {
    throw std::invalid_argument("cannot sweep over '" + cfg.sweep + "'");
  }
  if (cfg.solvers.empty()) throw std::invalid_argument("solvers must not be empty");
  for (const std::string& s : cfg.solvers) ParseSolverLabel(s);
  if (std::set<std::string>(cfg.solvers.begin(), cfg.solvers.end()).size() !=
      cfg.solvers.size()) {
    throw std::invalid_argument("duplicate solver label");
  }
  if (cfg.dataset.empty()) throw std::invalid_argument("dataset must be set");
  for (double v : cfg.sweep_values) {
    const ExperimentConfig p = AtSweepPoint(cfg, v);
    if (p.users == 0 || p.files == 0) {
      throw std::invalid_argument("users and files must be positive");
    }
    if (!(p.distance > 0.0)) throw std::invalid_argument("distance must be positive");
    if (!(p.mask >= 0.0 && p.mask <= 100.0)) {
      throw std::invalid_argument("mask must lie in [0, 100]");
    }
    if (p.guard < 0.0) throw std::invalid_argument("guard must be non-negative");
    if (p.synthetic.rank == 0) {
      throw std::invalid_argument("synthetic_rank must be positive");
    }
    MobilityFor(p, 0).CellSide();
    GridFbsPositions(p.fbs);
  }
}

struct ArtifactCache::Impl {
  std::string dir;
  mutable std::mutex mu;
  std::map<std::string, std::shared_future<std::shared_ptr<const void>>> entries;
  std::map<std::string, std::size_t> computed;

  template <typename T>
  std::shared_ptr<const T> Get(const std::string& kind, const std::string& key_text,
                               const std::function<T()>& compute,
                               const std::function<void(std::ostream&, const T&)>& write,
                               const std::function<T(std::istream&)>& read) {
    const std::string key = kind + "-" + Hex(Fnv1a(key_text));
    std::promise<std::shared_ptr<const void>> promise;
    std::shared_future<std::shared_ptr<const void>> future;
    bool owner = false;
    {
      std::lock_guard lock(mu);
      auto it = entries.find(key);
      if (it == entries.end()) {
        future = promise.get_future().share();
        entries.emplace(key, future);
        owner = true;
      } else {
        future = it->second;
      }
    }
    if (owner) {
      try {
        promise.set_value(Load<T>(kind, key, compute, write, read));
      } catch (...) {
        promise.set_exception(std::current_exception());
      }
    }
    return std::static_pointer_cast<const T>(future.get());
  }

  template <typename T>
  std::shared_ptr<const void> Load(const std::string& kind, const std::string& key,
                                   const std::function<T()>& compute,
                                   const std::function<void(std::ostream&, const T&)>& write,
                                   const std::function<T(std::istream&)>& read) {
    namespace fs = std::filesystem;
    const fs::path path = dir.empty() ? fs::path() : fs::path(dir) / (key + ".txt");
    if (!dir.empty() && fs::exists(path)) {
      std::ifstream in(path);
      try {
        return std::make_shared<const T>(read(in));
      } catch (const std::exception&) {
        // Unreadable cache entry; fall through and rebuild it.
      }
    }
    auto value = std::make_shared<const T>(compute());
    {
      std::lock_guard lock(mu);
      ++computed[kind];
    }
    if (!dir.empty()) {
      fs::create_directories(dir);
      const fs::path tmp = path.string() + ".tmp" + Hex(std::hash<std::thread::id>{}(
                                                          std::this_thread::get_id()));
      {
        std::ofstream out(tmp);
        write(out, *value);
      }
      fs::rename(tmp, path);
    }
    return value;
  }
};

ArtifactCache::ArtifactCache(std::string dir) : impl_(std::make_unique<Impl>()) {
  impl_->dir = std::move(dir);
}

ArtifactCache::~ArtifactCache() = default;

std::size_t ArtifactCache::computed(const std::string& kind) const {
  std::lock_guard lock(impl_->mu);
  auto it = impl_->computed.find(kind);
  return it == impl_->computed.end() ? 0 : it->second;
}

std::shared_ptr<const RatingMatrix> ArtifactCache::Base(const ExperimentConfig& cfg) {
  return impl_->Get<RatingMatrix>(
      "prefilter", BaseKey(cfg),
      [&] {
        const std::vector<RatingEvent> events =
            cfg.dataset == "synthetic" ? GenerateSyntheticLog(cfg.synthetic)
                                       : ReadMovieLensFile(cfg.dataset);
        return Prefilter(events, cfg.prefilter);
      },
      WriteSnapshot, ReadSnapshot);
}

std::shared_ptr<const CompleteRatingMatrix> ArtifactCache::Completion(
    const ExperimentConfig& cfg, std::optional<std::uint64_t> mask_seed) {
  std::ostringstream key;
  key << BaseKey(cfg) << " cf " << MethodText(cfg.cf_method) << ' '
      << PolicyText(cfg.cf_policy);
  if (mask_seed) key << " mask " << Num(cfg.mask) << ' ' << *mask_seed;
  return impl_->Get<CompleteRatingMatrix>(
      "complete", key.str(),
      [&] {
        std::shared_ptr<const RatingMatrix> base = Base(cfg);
        if (!mask_seed) return CompleteMatrix(*base, cfg.cf_method, cfg.cf_policy);
        const RatingMatrix masked = MaskRatings(*base, cfg.mask / 100.0, *mask_seed);
        return CompleteMatrix(masked, cfg.cf_method, cfg.cf_policy);
      },
      WriteComplete, ReadComplete);
}

std::shared_ptr<const ContactModel> ArtifactCache::Contacts(
    const ExperimentConfig& cfg, std::uint64_t seed) {
  std::ostringstream key;
  key << "users " << cfg.users << " cells " << cfg.cells << " slots " << cfg.slots
      << " seed " << seed << " distance " << Num(cfg.distance) << " fbs " << cfg.fbs;
  return impl_->Get<ContactModel>(
      "contacts", key.str(),
      [&] {
        const Trajectory traj = GenerateTrajectories(MobilityFor(cfg, seed));
        const std::vector<Point> fbs = GridFbsPositions(cfg.fbs);
        return EstimateContacts(traj, cfg.distance, fbs);
      },
      WriteContacts, ReadContacts);
}

Instance BuildInstance(const ExperimentConfig& cfg, std::uint64_t seed,
                       ArtifactCache& cache) {
  Instance inst;
  const auto base = InStage("ingest", [&] { return cache.Base(cfg); });
  if (cfg.users > base->n_users() || cfg.files > base->n_files()) {
    throw StageError("ingest", "requested " + std::to_string(cfg.users) + " x " +
                                   std::to_string(cfg.files) +
                                   " exceeds the prefiltered " +
                                   std::to_string(base->n_users()) + " x " +
                                   std::to_string(base->n_files()));
  }
  const auto truth_c = InStage("cf", [&] { return cache.Completion(cfg, std::nullopt); });
  const auto plan_c = cfg.mask > 0.0
                          ? InStage("cf", [&] { return cache.Completion(cfg, seed); })
                          : truth_c;
  InStage("learn", [&] {
    const SubsampleIndices idx =
        DrawSubsample(base->n_users(), base->n_files(), cfg.users, cfg.files,
                      DeriveSeed(seed, kSubsampleStream));
    const RatingMatrix given = Restrict(*base, idx);
    const std::optional<std::size_t> horizon =
        cfg.horizon > 0 ? std::optional(cfg.horizon) : std::nullopt;
    inst.truth = LearnParams(given, truth_c->Restrict(idx.users, idx.files), horizon);
    inst.planning =
        plan_c == truth_c
            ? inst.truth
            : LearnParams(given, plan_c->Restrict(idx.users, idx.files), horizon);
    return 0;
  });
  InStage("mobility", [&] {
    inst.trajectory = GenerateTrajectories(MobilityFor(cfg, seed));
    inst.contacts = cache.Contacts(cfg, seed);
    if (cfg.lambda_samples > 0) {
      inst.lambda_hat =
          EstimateLambda(inst.trajectory, cfg.distance, cfg.guard,
                         cfg.lambda_samples, DeriveSeed(seed, kLambdaStream));
    }
    return 0;
  });
  return inst;
}

namespace {

// Planning and evaluation problems derived from one instance.
struct ProblemSet {
  CachingProblem truth_full;
  CachingProblem truth_users;
  CachingProblem plan_full;
  CachingProblem plan_users;
  CachingProblem plan_users_common;
};

ProblemSet MakeProblems(const ExperimentConfig& cfg, const Instance& inst) {
  CachingProblem truth_full =
      CachingProblem::FromModel(inst.truth, *inst.contacts, PreferenceModel::kPersonalized,
                                cfg.cache_size, cfg.fbs_cache_size);
  CachingProblem plan_full =
      CachingProblem::FromModel(inst.planning, *inst.contacts,
                                PreferenceModel::kPersonalized, cfg.cache_size,
                                cfg.fbs_cache_size);
  CachingProblem truth_users = truth_full.UsersOnly();
  CachingProblem plan_users = plan_full.UsersOnly();
  CachingProblem plan_common = plan_users.WithModel(PreferenceModel::kCommon);
  return {std::move(truth_full), std::move(truth_users), std::move(plan_full),
          std::move(plan_users), std::move(plan_common)};
}

SolverOptions OptionsFor(const ExperimentConfig& cfg) {
  SolverOptions o;
  o.g2_rounds = cfg.g2_rounds;
  o.g2_early_stop = cfg.g2_early_stop;
  return o;
}

SolverResult RunSolver(const SolverSpec& spec, const ProblemSet& ps,
                       const SolverOptions& options) {
  switch (spec.formulation) {
    case Formulation::kPersonalized:
      return Solve(ps.plan_users, spec.algorithm, options);
    case Formulation::kCommon:
      return Solve(ps.plan_users_common, spec.algorithm, options);
    case Formulation::kHybridNaive:
      return SolveHybridNaive(ps.plan_full, spec.algorithm, options);
    case Formulation::kHybridJoint:
      return SolveHybridJoint(ps.plan_full, spec.algorithm, options);
  }
  throw std::invalid_argument("unknown formulation");
}

const CachingProblem& TruthFor(const SolverSpec& spec, const ProblemSet& ps) {
  return spec.formulation == Formulation::kHybridNaive ||
                 spec.formulation == Formulation::kHybridJoint
             ? ps.truth_full
             : ps.truth_users;
}

std::string CsvSafe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::vector<ResultRow> RunPoint(const ExperimentConfig& point_cfg, std::size_t point,
                                double value, std::uint64_t seed,
                                ArtifactCache& cache) {
  std::vector<ResultRow> rows;
  for (const std::string& label : point_cfg.solvers) {
    ResultRow r;
    r.point = point;
    r.value = value;
    r.seed = seed;
    r.solver = label;
    r.cfg = point_cfg;
    rows.push_back(std::move(r));
  }
  auto fail_all = [&](const std::string& stage, const std::string& what) {
    for (ResultRow& r : rows) {
      r.error = stage;
      r.message = what;
    }
    return rows;
  };

  Instance inst;
  std::optional<ProblemSet> ps;
  try {
    inst = BuildInstance(point_cfg, seed, cache);
    ps = InStage("learn", [&] { return MakeProblems(point_cfg, inst); });
  } catch (const StageError& e) {
    return fail_all(e.stage(), e.what());
  }

  const SolverOptions options = OptionsFor(point_cfg);
  const std::vector<Point> fbs = inst.contacts->fbs_positions;
  for (ResultRow& r : rows) {
    try {
      const SolverSpec spec = ParseSolverLabel(r.solver);
      const SolverResult res =
          InStage("solve", [&] { return RunSolver(spec, *ps, options); });
      r.objective = res.value;
      r.seconds = res.seconds;
      InStage("eval", [&] {
        const CachingProblem& truth = TruthFor(spec, *ps);
        r.metrics = Evaluate(truth, res.placement, inst.lambda_hat);
        if (point_cfg.mc_events > 0) {
          const std::span<const Point> holders_fbs =
              truth.n_fbs() > 0 ? std::span<const Point>(fbs) : std::span<const Point>();
          const MonteCarloEstimate mc = MonteCarloHitRatio(
              truth, res.placement, inst.trajectory, point_cfg.distance, holders_fbs,
              point_cfg.mc_events, DeriveSeed(seed, kMonteCarloStream), 1);
          r.metrics.mc_h_avg = mc.mean;
          r.metrics.mc_stderr = mc.std_error;
        }
        return 0;
      });
    } catch (const StageError& e) {
      r.error = e.stage();
      r.message = e.what();
    } catch (const std::exception& e) {
      r.error = "solve";
      r.message = e.what();
    }
  }
  return rows;
}

std::string ResultsHeader() {
  return "point,sweep,value,seed,solver,users,files,cache_size,distance,cells,slots,"
         "horizon,fbs,fbs_cache_size,guard,mask,cf_method,cf_policy,g2_rounds,"
         "h_avg,o_avg,lambda_hat,capacity,mc_h_avg,mc_stderr,objective,seconds,"
         "error,message";
}

std::string FormatRow(const ResultRow& row) {
  const ExperimentConfig& c = row.cfg;
  std::ostringstream s;
  s << row.point << ',' << c.sweep << ',' << Num(row.value) << ',' << row.seed << ','
    << row.solver << ',' << c.users << ',' << c.files << ',' << c.cache_size << ','
    << Num(c.distance) << ',' << c.cells << ',' << c.slots << ',' << c.horizon << ','
    << c.fbs << ',' << c.fbs_cache_size << ',' << Num(c.guard) << ',' << Num(c.mask)
    << ',' << MethodText(c.cf_method) << ',' << PolicyText(c.cf_policy) << ','
    << c.g2_rounds << ',';
  if (row.error.empty()) {
    const MetricsReport& m = row.metrics;
    s << Num(m.h_avg) << ',' << Num(m.o_avg) << ',' << Num(m.lambda_hat) << ','
      << Num(m.capacity) << ',' << (m.mc_h_avg ? Num(*m.mc_h_avg) : "") << ','
      << (m.mc_stderr ? Num(*m.mc_stderr) : "") << ',' << Num(row.objective)
      << ',' << Num(row.seconds) << ",,";
  } else {
    s << ",,,,,,,," << row.error << ',' << CsvSafe(row.message);
  }
  return s.str();
}

RunSummary RunExperiment(const ExperimentConfig& cfg, std::ostream& out,
                         std::istream* previous) {
  Validate(cfg);
  struct Task {
    std::size_t point;
    double value;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (std::size_t p = 0; p < cfg.sweep_values.size(); ++p) {
    for (std::uint64_t seed : cfg.seeds) tasks.push_back({p, cfg.sweep_values[p], seed});
  }

  // Reusable lines from an earlier run, keyed by "point,seed".
  std::map<std::string, std::vector<std::string>> reuse;
  if (cfg.resume && previous != nullptr) {
    std::string line;
    std::map<std::string, std::vector<std::string>> by_pair;
    if (std::getline(*previous, line) && line == ResultsHeader()) {
      while (std::getline(*previous, line)) {
        std::vector<std::string> f;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() < 5) continue;
        by_pair[f[0] + "," + f[2] + "," + f[3]].push_back(line);
      }
    }
    for (auto& [key, lines] : by_pair) {
      bool ok = lines.size() == cfg.solvers.size();
      for (std::size_t i = 0; ok && i < lines.size(); ++i) {
        std::vector<std::string> f;
        std::string cell;
        std::istringstream ls(lines[i]);
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        ok = f.size() >= 5 && f[4] == cfg.solvers[i] &&
             lines[i].find(",,", lines[i].size() - 2) != std::string::npos;
      }
      if (ok) reuse[key] = lines;
    }
  }

  ArtifactCache cache(cfg.cache_dir);
  RunSummary summary;
  std::vector<std::optional<std::vector<std::string>>> done(tasks.size());
  std::vector<std::size_t> errors(tasks.size(), 0);
  std::mutex mu;
  std::size_t next_to_write = 0;
  out << ResultsHeader() << '\n';

  auto finish = [&](std::size_t k, std::vector<std::string> lines, std::size_t errs) {
    std::lock_guard lock(mu);
    done[k] = std::move(lines);
    errors[k] = errs;
    while (next_to_write < tasks.size() && done[next_to_write]) {
      for (const std::string& l : *done[next_to_write]) out << l << '\n';
      out.flush();
      summary.rows += done[next_to_write]->size();
      summary.errors += errors[next_to_write];
      done[next_to_write]->clear();
      ++next_to_write;
    }
  };

  auto run_task = [&](std::size_t k) {
    const Task& t = tasks[k];
    const std::string key =
        std::to_string(t.point) + "," + Num(t.value) + "," + std::to_string(t.seed);
    if (auto it = reuse.find(key); it != reuse.end()) {
      {
        std::lock_guard lock(mu);
        ++summary.reused;
      }
      finish(k, it->second, 0);
      return;
    }
    std::vector<std::string> lines;
    std::size_t errs = 0;
    const ExperimentConfig point_cfg = AtSweepPoint(cfg, t.value);
    for (const ResultRow& r : RunPoint(point_cfg, t.point, t.value, t.seed, cache)) {
      lines.push_back(FormatRow(r));
      errs += r.error.empty() ? 0 : 1;
    }
    finish(k, std::move(lines), errs);
  };

  std::size_t threads = cfg.threads == 0
                            ? std::max(1u, std::thread::hardware_concurrency())
                            : cfg.threads;
  threads = std::min(threads, tasks.size());
  if (threads <= 1) {
    for (std::size_t k = 0; k < tasks.size(); ++k) run_task(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k; (k = next.fetch_add(1)) < tasks.size();) run_task(k);
      });
    }
  }
  return summary;
}

RunSummary RunExperimentToFile(const ExperimentConfig& cfg) {
  if (cfg.output.empty()) throw std::invalid_argument("output must be set");
  std::optional<std::stringstream> previous;
  if (cfg.resume && std::filesystem::exists(cfg.output)) {
    std::ifstream in(cfg.output);
    previous.emplace();
    *previous << in.rdbuf();
  }
  if (const auto parent = std::filesystem::path(cfg.output).parent_path();
      !parent.empty()) {
    std::filesystem::create_directories(parent);
  }
  std::ofstream out(cfg.output);
  if (!out) throw std::runtime_error("cannot write " + cfg.output);
  return RunExperiment(cfg, out, previous ? &*previous : nullptr);
}

std::vector<TimingRow> MeasureTiming(const ExperimentConfig& cfg) {
  Validate(cfg);
  const std::size_t reps = std::max<std::size_t>(cfg.timing_reps, 3);
  ArtifactCache cache(cfg.cache_dir);
  std::vector<TimingRow> rows;
  for (std::size_t p = 0; p < cfg.sweep_values.size(); ++p) {
    ExperimentConfig point_cfg = AtSweepPoint(cfg, cfg.sweep_values[p]);
    point_cfg.lambda_samples = 0;
    point_cfg.mc_events = 0;
    for (std::uint64_t seed : cfg.seeds) {
      std::vector<TimingRow> point_rows;
      for (const std::string& label : cfg.solvers) {
        TimingRow r;
        r.point = p;
        r.value = cfg.sweep_values[p];
        r.seed = seed;
        r.solver = label;
        r.users = point_cfg.users;
        r.files = point_cfg.files;
        r.cache_size = point_cfg.cache_size;
        point_rows.push_back(std::move(r));
      }
      try {
        const Instance inst = BuildInstance(point_cfg, seed, cache);
        const ProblemSet ps = MakeProblems(point_cfg, inst);
        const SolverOptions options = OptionsFor(point_cfg);
        for (TimingRow& r : point_rows) {
          try {
            const SolverSpec spec = ParseSolverLabel(r.solver);
            for (std::size_t k = 0; k < reps; ++k) {
              const SolverResult res = RunSolver(spec, ps, options);
              r.seconds.push_back(res.seconds);
              r.objective = res.value;
            }
            r.median = Median(r.seconds);
          } catch (const std::exception& e) {
            r.error = "solve";
          }
        }
      } catch (const StageError& e) {
        for (TimingRow& r : point_rows) r.error = e.stage();
      }
      for (TimingRow& r : point_rows) rows.push_back(std::move(r));
    }
  }
  return rows;
}

std::string TimingHeader() {
  return "point,value,seed,solver,users,files,cache_size,reps,median_seconds,"
         "min_seconds,max_seconds,objective,error";
}

std::string FormatTimingRow(const TimingRow& row) {
  std::ostringstream s;
  s << row.point << ',' << Num(row.value) << ',' << row.seed << ',' << row.solver << ','
    << row.users << ',' << row.files << ',' << row.cache_size << ','
    << row.seconds.size() << ',';
  if (row.error.empty() && !row.seconds.empty()) {
    s << Num(row.median) << ','
      << Num(*std::min_element(row.seconds.begin(), row.seconds.end())) << ','
      << Num(*std::max_element(row.seconds.begin(), row.seconds.end())) << ','
      << Num(row.objective) << ',';
  } else {
    s << ",,,," << row.error;
  }
  return s.str();
}

}  // namespace pcache
