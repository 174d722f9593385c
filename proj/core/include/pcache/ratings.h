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

#ifndef PCACHE_RATINGS_H_
#define PCACHE_RATINGS_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcache/grid.h"

namespace pcache {

inline constexpr int kMinRating = 1;
inline constexpr int kMaxRating = 5;

struct RatingEvent {
  std::string user_id;
  std::string item_id;
  int rating = 0;
  std::int64_t timestamp = 0;

  friend bool operator==(const RatingEvent&, const RatingEvent&) = default;
};

enum class LogFormat { kDat, kCsv };

// Thrown for malformed rating logs and snapshots. `line()` is 1-based, or 0
// when the error is not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Partially observed users x files table of integer ratings. A value of 0
// marks an unobserved cell, so values and mask can never disagree.
class RatingMatrix {
 public:
  RatingMatrix() = default;
  RatingMatrix(std::vector<std::string> user_ids,
               std::vector<std::string> item_ids);

  std::size_t n_users() const { return values_.rows(); }
  std::size_t n_files() const { return values_.cols(); }

  bool observed(std::size_t user, std::size_t file) const {
    return values_(user, file) != 0;
  }
  // Rating of an observed cell, 0 otherwise.
  int value(std::size_t user, std::size_t file) const {
    return values_(user, file);
  }
  void Set(std::size_t user, std::size_t file, int rating);
  void Clear(std::size_t user, std::size_t file) { values_(user, file) = 0; }

  std::size_t ObservedCount() const;
  std::size_t MissingCount() const {
    return n_users() * n_files() - ObservedCount();
  }
  // Ratings given by `user` (the n_k of the activity model).
  std::size_t RowCount(std::size_t user) const;
  std::size_t ColumnCount(std::size_t file) const;
  // 1 - observed / cells; 0 for an empty matrix.
  double Sparsity() const;

  const std::vector<std::string>& user_ids() const { return user_ids_; }
  const std::vector<std::string>& item_ids() const { return item_ids_; }

  // Free-form provenance (seeds, thresholds) carried into snapshots.
  const std::string& lineage() const { return lineage_; }
  void set_lineage(std::string lineage) { lineage_ = std::move(lineage); }

  friend bool operator==(const RatingMatrix&, const RatingMatrix&) = default;

 private:
  Grid<std::uint8_t> values_;
  std::vector<std::string> user_ids_;
  std::vector<std::string> item_ids_;
  std::string lineage_;
};

// Parses a MovieLens log. `dat` is "user::item::rating::timestamp"; `csv` is
// comma separated with an optional header line. Blank lines are skipped.
// Ratings must be integers in [1, 5] ("4.0" is accepted, "3.5" is not).
std::vector<RatingEvent> ParseMovieLens(std::istream& in, LogFormat format);
std::vector<RatingEvent> ReadMovieLensFile(const std::string& path);

struct PrefilterOptions {
  std::size_t min_user_ratings = 0;
  std::size_t min_item_raters = 0;
  // When every id is numeric, allocate the dense id range 1..max(id) on each
  // axis instead of only the ids that occur. MovieLens 1M reports its item
  // count this way (3,952 ids, 3,706 of them rated).
  bool dense_numeric_ids = false;
};

// Builds the matrix from events and drops sparse users, then sparse items,
// in exactly one pass each. Duplicate (user, item) events keep the last.
// Throws std::invalid_argument if nothing survives.
RatingMatrix Prefilter(const std::vector<RatingEvent>& events,
                       const PrefilterOptions& options);

// Uniformly random n_users x n_files sub-matrix; rows and columns keep their
// relative order. Deterministic for a fixed seed.
RatingMatrix Subsample(const RatingMatrix& m, std::size_t n_users,
                       std::size_t n_files, std::uint64_t seed);

// Same sub-matrix selection as Subsample, returned as index lists, so that
// aligned tables (e.g. a completed matrix) can be cut identically.
struct SubsampleIndices {
  std::vector<std::size_t> users;
  std::vector<std::size_t> files;
};
SubsampleIndices DrawSubsample(std::size_t total_users, std::size_t total_files,
                               std::size_t n_users, std::size_t n_files,
                               std::uint64_t seed);
RatingMatrix Restrict(const RatingMatrix& m, const SubsampleIndices& idx);

// Hides round(percent * observed) uniformly chosen observed cells.
RatingMatrix MaskRatings(const RatingMatrix& m, double percent,
                         std::uint64_t seed);

// Snapshot text format:
//   pcache-ratings 1
//   dims <n_users> <n_files>
//   lineage <text to end of line>
//   users <id> ...
//   items <id> ...
//   <n_users rows of n_files ratings, 0 = unobserved>
void WriteSnapshot(std::ostream& out, const RatingMatrix& m);
RatingMatrix ReadSnapshot(std::istream& in);

// Low-rank rating log with heavy-tailed user and item activity, for runs
// without a MovieLens copy. Ids are "1".."n" on each axis.
struct SyntheticLogOptions {
  std::size_t n_users = 400;
  std::size_t n_items = 300;
  std::size_t rank = 4;
  double density = 0.5;  // mean fraction of observed cells before clipping
  double noise = 0.5;
  std::uint64_t seed = 1;
};
std::vector<RatingEvent> GenerateSyntheticLog(const SyntheticLogOptions& options);

}  // namespace pcache

#endif  // PCACHE_RATINGS_H_
