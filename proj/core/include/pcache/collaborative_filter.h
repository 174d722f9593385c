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

#ifndef PCACHE_COLLABORATIVE_FILTER_H_
#define PCACHE_COLLABORATIVE_FILTER_H_

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "pcache/grid.h"
#include "pcache/ratings.h"

namespace pcache {

// Which axis of the rating matrix similarities are computed over.
enum class CfMethod { kUserBased, kItemBased };

// Neighbor selection: the K most similar candidates, or every candidate whose
// similarity exceeds a threshold. Non-positive similarities are never used.
struct NeighborhoodPolicy {
  enum class Kind { kTopK, kThreshold };
  Kind kind = Kind::kTopK;
  std::size_t k = 20;
  double threshold = 0.0;

  static NeighborhoodPolicy TopK(std::size_t k) { return {Kind::kTopK, k, 0.0}; }
  static NeighborhoodPolicy Threshold(double t) {
    return {Kind::kThreshold, 0, t};
  }
};

// Symmetric Pearson similarities with an explicit "absent" marker for pairs
// with fewer than two co-rated entries or a zero centered norm.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  SimilarityMatrix(std::size_t dim, CfMethod kind);

  std::size_t dim() const { return w_.rows(); }
  CfMethod kind() const { return kind_; }

  std::optional<double> at(std::size_t i, std::size_t j) const {
    const double v = w_(i, j);
    if (std::isnan(v)) return std::nullopt;
    return v;
  }
  void Set(std::size_t i, std::size_t j, std::optional<double> v);

 private:
  Grid<double> w_;
  CfMethod kind_ = CfMethod::kUserBased;
};

struct Neighbor {
  std::size_t index;
  double weight;
};

struct Neighborhood {
  std::size_t target = 0;
  std::vector<Neighbor> members;  // weight descending, ties by lower index
};

// Pearson correlation over the co-rated set, each vector centered on the mean
// of its own full observed set. For kUserBased, i and j are users; for
// kItemBased they are files.
std::optional<double> PearsonSimilarity(const RatingMatrix& m, CfMethod kind,
                                        std::size_t i, std::size_t j);

SimilarityMatrix ComputeSimilarities(const RatingMatrix& m, CfMethod kind);

// `eligible[c]` marks candidates that may serve as neighbors of `target`.
Neighborhood BuildNeighborhood(const SimilarityMatrix& sim, std::size_t target,
                               const std::vector<bool>& eligible,
                               const NeighborhoodPolicy& policy);

struct Prediction {
  double raw = 0.0;    // before clamping
  double value = 0.0;  // clamped to [1, 5]
  bool fallback = false;
};

enum class CellSource : unsigned char { kGiven, kPredicted, kFallback };

// Fully specified ratings: given cells verbatim, the rest predicted.
class CompleteRatingMatrix {
 public:
  CompleteRatingMatrix() = default;
  CompleteRatingMatrix(std::size_t n_users, std::size_t n_files)
      : values_(n_users, n_files, 0.0),
        source_(n_users, n_files, CellSource::kGiven) {}

  std::size_t n_users() const { return values_.rows(); }
  std::size_t n_files() const { return values_.cols(); }
  double value(std::size_t k, std::size_t a) const { return values_(k, a); }
  CellSource source(std::size_t k, std::size_t a) const { return source_(k, a); }
  void Set(std::size_t k, std::size_t a, double v, CellSource s) {
    values_(k, a) = v;
    source_(k, a) = s;
  }
  std::size_t PredictedCount() const;  // kPredicted + kFallback
  std::size_t FallbackCount() const;

  CompleteRatingMatrix Restrict(const std::vector<std::size_t>& users,
                                const std::vector<std::size_t>& files) const;

 private:
  Grid<double> values_;
  Grid<CellSource> source_;
};

// Memory-based predictor over one rating matrix. Similarities and means are
// computed once at construction; Predict is const and safe to call from
// several threads.
class CollaborativeFilter {
 public:
  CollaborativeFilter(const RatingMatrix& m, CfMethod method,
                      NeighborhoodPolicy policy);

  // Prediction for cell (k, a) from the other observed ratings. The cell's
  // own rating, if any, is ignored by the neighbor sums.
  Prediction Predict(std::size_t k, std::size_t a) const;

  // Neighbors used for cell (k, a); equals BuildNeighborhood over the
  // candidates that rated file a (user-based) or were rated by user k.
  Neighborhood NeighborhoodFor(std::size_t k, std::size_t a) const;

  const SimilarityMatrix& similarities() const { return sim_; }
  // Mean of user k's observed ratings, or nullopt if none.
  std::optional<double> UserMean(std::size_t k) const;
  double GlobalMean() const { return global_mean_; }

 private:
  double Baseline(std::size_t k) const;

  const RatingMatrix& m_;
  CfMethod method_;
  NeighborhoodPolicy policy_;
  SimilarityMatrix sim_;
  std::vector<double> user_mean_;  // NaN when the user has no ratings
  std::vector<std::vector<Neighbor>> ranked_;
  double global_mean_ = 0.0;
};

Prediction PredictUserBased(const RatingMatrix& m, std::size_t k, std::size_t a,
                            const NeighborhoodPolicy& policy);
Prediction PredictItemBased(const RatingMatrix& m, std::size_t k, std::size_t a,
                            const NeighborhoodPolicy& policy);

CompleteRatingMatrix CompleteMatrix(const RatingMatrix& m, CfMethod method,
                                    const NeighborhoodPolicy& policy);

// Text format: "pcache-complete 1", "dims N F", then N rows of F values with
// a one-letter source suffix (g given, p predicted, f fallback), e.g. "3.25p".
void WriteComplete(std::ostream& out, const CompleteRatingMatrix& c);
CompleteRatingMatrix ReadComplete(std::istream& in);

}  // namespace pcache

#endif  // PCACHE_COLLABORATIVE_FILTER_H_
