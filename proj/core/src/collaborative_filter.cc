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

#include "pcache/collaborative_filter.h"

#include <algorithm>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace pcache {
namespace {

constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();
constexpr double kScaleMidpoint = 0.5 * (kMinRating + kMaxRating);

// Centered values of every vector along the chosen axis; zero where
// unobserved. The mean is over the vector's full observed set.
struct CenteredVectors {
  Grid<double> centered;
  Grid<double> mask;
  std::vector<double> mean;  // NaN for vectors with no observations
};

CenteredVectors Center(const RatingMatrix& m, CfMethod kind) {
  const bool by_user = kind == CfMethod::kUserBased;
  const std::size_t dim = by_user ? m.n_users() : m.n_files();
  const std::size_t len = by_user ? m.n_files() : m.n_users();
  CenteredVectors cv{Grid<double>(dim, len, 0.0), Grid<double>(dim, len, 0.0),
                     std::vector<double>(dim, kAbsent)};
  for (std::size_t v = 0; v < dim; ++v) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t e = 0; e < len; ++e) {
      const int r = by_user ? m.value(v, e) : m.value(e, v);
      if (r != 0) {
        sum += r;
        ++n;
      }
    }
    if (n == 0) continue;
    const double mean = sum / static_cast<double>(n);
    cv.mean[v] = mean;
    for (std::size_t e = 0; e < len; ++e) {
      const int r = by_user ? m.value(v, e) : m.value(e, v);
      if (r != 0) {
        cv.centered(v, e) = r - mean;
        cv.mask(v, e) = 1.0;
      }
    }
  }
  return cv;
}

std::optional<double> PairSimilarity(const CenteredVectors& cv, std::size_t i,
                                     std::size_t j) {
  const auto ci = cv.centered.row(i), cj = cv.centered.row(j);
  const auto mi = cv.mask.row(i), mj = cv.mask.row(j);
  double num = 0.0, ni = 0.0, nj = 0.0, count = 0.0;
  for (std::size_t e = 0; e < ci.size(); ++e) {
    num += ci[e] * cj[e];
    ni += ci[e] * ci[e] * mj[e];
    nj += cj[e] * cj[e] * mi[e];
    count += mi[e] * mj[e];
  }
  if (count < 2.0 || ni <= 0.0 || nj <= 0.0) return std::nullopt;
  return std::clamp(num / std::sqrt(ni * nj), -1.0, 1.0);
}

bool ByWeight(const Neighbor& a, const Neighbor& b) {
  if (a.weight != b.weight) return a.weight > b.weight;
  return a.index < b.index;
}

}  // namespace

SimilarityMatrix::SimilarityMatrix(std::size_t dim, CfMethod kind)
    : w_(dim, dim, kAbsent), kind_(kind) {}

void SimilarityMatrix::Set(std::size_t i, std::size_t j, std::optional<double> v) {
  w_(i, j) = v.value_or(kAbsent);
  w_(j, i) = v.value_or(kAbsent);
}

std::optional<double> PearsonSimilarity(const RatingMatrix& m, CfMethod kind,
                                        std::size_t i, std::size_t j) {
  const bool by_user = kind == CfMethod::kUserBased;
  const std::size_t len = by_user ? m.n_files() : m.n_users();
  const auto at = [&](std::size_t v, std::size_t e) {
    return by_user ? m.value(v, e) : m.value(e, v);
  };
  const auto mean_of = [&](std::size_t v) -> std::optional<double> {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t e = 0; e < len; ++e) {
      if (const int r = at(v, e)) {
        sum += r;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  };
  const auto mean_i = mean_of(i), mean_j = mean_of(j);
  if (!mean_i || !mean_j) return std::nullopt;
  double num = 0.0, ni = 0.0, nj = 0.0;
  std::size_t count = 0;
  for (std::size_t e = 0; e < len; ++e) {
    const int ri = at(i, e), rj = at(j, e);
    if (ri == 0 || rj == 0) continue;
    const double di = ri - *mean_i, dj = rj - *mean_j;
    num += di * dj;
    ni += di * di;
    nj += dj * dj;
    ++count;
  }
  if (count < 2 || ni <= 0.0 || nj <= 0.0) return std::nullopt;
  return std::clamp(num / std::sqrt(ni * nj), -1.0, 1.0);
}

SimilarityMatrix ComputeSimilarities(const RatingMatrix& m, CfMethod kind) {
  const CenteredVectors cv = Center(m, kind);
  const std::size_t dim = cv.centered.rows();
  SimilarityMatrix sim(dim, kind);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i; j < dim; ++j) sim.Set(i, j, PairSimilarity(cv, i, j));
  }
  return sim;
}

Neighborhood BuildNeighborhood(const SimilarityMatrix& sim, std::size_t target,
                               const std::vector<bool>& eligible,
                               const NeighborhoodPolicy& policy) {
  Neighborhood hood{target, {}};
  for (std::size_t c = 0; c < sim.dim(); ++c) {
    if (c == target || c >= eligible.size() || !eligible[c]) continue;
    const auto w = sim.at(target, c);
    if (!w || *w <= 0.0) continue;
    if (policy.kind == NeighborhoodPolicy::Kind::kThreshold &&
        *w <= policy.threshold) {
      continue;
    }
    hood.members.push_back({c, *w});
  }
  std::sort(hood.members.begin(), hood.members.end(), ByWeight);
  if (policy.kind == NeighborhoodPolicy::Kind::kTopK &&
      hood.members.size() > policy.k) {
    hood.members.resize(policy.k);
  }
  return hood;
}

std::size_t CompleteRatingMatrix::PredictedCount() const {
  std::size_t n = 0;
  for (CellSource s : source_.data()) n += s != CellSource::kGiven ? 1 : 0;
  return n;
}

std::size_t CompleteRatingMatrix::FallbackCount() const {
  std::size_t n = 0;
  for (CellSource s : source_.data()) n += s == CellSource::kFallback ? 1 : 0;
  return n;
}

CompleteRatingMatrix CompleteRatingMatrix::Restrict(
    const std::vector<std::size_t>& users,
    const std::vector<std::size_t>& files) const {
  CompleteRatingMatrix out(users.size(), files.size());
  for (std::size_t r = 0; r < users.size(); ++r) {
    for (std::size_t c = 0; c < files.size(); ++c) {
      out.Set(r, c, value(users[r], files[c]), source(users[r], files[c]));
    }
  }
  return out;
}

CollaborativeFilter::CollaborativeFilter(const RatingMatrix& m, CfMethod method,
                                         NeighborhoodPolicy policy)
    : m_(m),
      method_(method),
      policy_(policy),
      sim_(ComputeSimilarities(m, method)),
      user_mean_(m.n_users(), kAbsent) {
  double total = 0.0;
  std::size_t n_total = 0;
  for (std::size_t k = 0; k < m.n_users(); ++k) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t a = 0; a < m.n_files(); ++a) {
      if (const int r = m.value(k, a)) {
        sum += r;
        ++n;
      }
    }
    if (n > 0) user_mean_[k] = sum / static_cast<double>(n);
    total += sum;
    n_total += n;
  }
  global_mean_ = n_total > 0 ? total / static_cast<double>(n_total) : kScaleMidpoint;

  // Every target's positive-weight candidates in neighborhood order; a cell's
  // neighborhood is the eligible prefix of this list.
  ranked_.resize(sim_.dim());
  for (std::size_t t = 0; t < sim_.dim(); ++t) {
    for (std::size_t c = 0; c < sim_.dim(); ++c) {
      if (c == t) continue;
      const auto w = sim_.at(t, c);
      if (w && *w > 0.0) ranked_[t].push_back({c, *w});
    }
    std::sort(ranked_[t].begin(), ranked_[t].end(), ByWeight);
  }
}

std::optional<double> CollaborativeFilter::UserMean(std::size_t k) const {
  if (std::isnan(user_mean_[k])) return std::nullopt;
  return user_mean_[k];
}

double CollaborativeFilter::Baseline(std::size_t k) const {
  return std::isnan(user_mean_[k]) ? global_mean_ : user_mean_[k];
}

Neighborhood CollaborativeFilter::NeighborhoodFor(std::size_t k,
                                                  std::size_t a) const {
  const bool by_user = method_ == CfMethod::kUserBased;
  const std::size_t target = by_user ? k : a;
  Neighborhood hood{target, {}};
  for (const Neighbor& n : ranked_[target]) {
    if (policy_.kind == NeighborhoodPolicy::Kind::kThreshold &&
        n.weight <= policy_.threshold) {
      break;
    }
    const bool rated = by_user ? m_.observed(n.index, a) : m_.observed(k, n.index);
    if (!rated) continue;
    hood.members.push_back(n);
    if (policy_.kind == NeighborhoodPolicy::Kind::kTopK &&
        hood.members.size() == policy_.k) {
      break;
    }
  }
  return hood;
}

Prediction CollaborativeFilter::Predict(std::size_t k, std::size_t a) const {
  const bool by_user = method_ == CfMethod::kUserBased;
  const Neighborhood hood = NeighborhoodFor(k, a);
  const double base = Baseline(k);
  Prediction p;
  if (hood.members.empty()) {
    p.raw = base;
    p.fallback = true;
  } else {
    double num = 0.0, den = 0.0;
    for (const Neighbor& n : hood.members) {
      const double deviation = by_user ? m_.value(n.index, a) - Baseline(n.index)
                                       : m_.value(k, n.index) - base;
      num += n.weight * deviation;
      den += n.weight;
    }
    p.raw = base + num / den;
  }
  p.value = std::clamp(p.raw, double(kMinRating), double(kMaxRating));
  return p;
}

Prediction PredictUserBased(const RatingMatrix& m, std::size_t k, std::size_t a,
                            const NeighborhoodPolicy& policy) {
  return CollaborativeFilter(m, CfMethod::kUserBased, policy).Predict(k, a);
}

Prediction PredictItemBased(const RatingMatrix& m, std::size_t k, std::size_t a,
                            const NeighborhoodPolicy& policy) {
  return CollaborativeFilter(m, CfMethod::kItemBased, policy).Predict(k, a);
}

CompleteRatingMatrix CompleteMatrix(const RatingMatrix& m, CfMethod method,
                                    const NeighborhoodPolicy& policy) {
  CompleteRatingMatrix out(m.n_users(), m.n_files());
  if (m.MissingCount() == 0) {
    for (std::size_t k = 0; k < m.n_users(); ++k) {
      for (std::size_t a = 0; a < m.n_files(); ++a) {
        out.Set(k, a, m.value(k, a), CellSource::kGiven);
      }
    }
    return out;
  }
  const CollaborativeFilter cf(m, method, policy);
  for (std::size_t k = 0; k < m.n_users(); ++k) {
    for (std::size_t a = 0; a < m.n_files(); ++a) {
      if (m.observed(k, a)) {
        out.Set(k, a, m.value(k, a), CellSource::kGiven);
      } else {
        const Prediction p = cf.Predict(k, a);
        out.Set(k, a, p.value, p.fallback ? CellSource::kFallback : CellSource::kPredicted);
      }
    }
  }
  return out;
}

void WriteComplete(std::ostream& out, const CompleteRatingMatrix& c) {
  out << "pcache-complete 1\n";
  out << "dims " << c.n_users() << ' ' << c.n_files() << '\n';
  const auto old_precision = out.precision(17);
  for (std::size_t k = 0; k < c.n_users(); ++k) {
    for (std::size_t a = 0; a < c.n_files(); ++a) {
      if (a) out << ' ';
      const char tag = c.source(k, a) == CellSource::kGiven       ? 'g'
                       : c.source(k, a) == CellSource::kPredicted ? 'p'
                                                                  : 'f';
      out << c.value(k, a) << tag;
    }
    out << '\n';
  }
  out.precision(old_precision);
}

CompleteRatingMatrix ReadComplete(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "pcache-complete 1") {
    throw ParseError(1, "expected 'pcache-complete 1'");
  }
  std::size_t n_users = 0, n_files = 0;
  {
    if (!std::getline(in, line)) throw ParseError(2, "truncated");
    std::istringstream dims(line);
    std::string key;
    if (!(dims >> key >> n_users >> n_files) || key != "dims") {
      throw ParseError(2, "bad dims");
    }
  }
  CompleteRatingMatrix c(n_users, n_files);
  for (std::size_t k = 0; k < n_users; ++k) {
    if (!std::getline(in, line)) throw ParseError(k + 3, "truncated");
    std::istringstream row(line);
    for (std::size_t a = 0; a < n_files; ++a) {
      std::string tok;
      if (!(row >> tok) || tok.size() < 2) throw ParseError(k + 3, "short row");
      const char tag = tok.back();
      tok.pop_back();
      CellSource s;
      switch (tag) {
        case 'g': s = CellSource::kGiven; break;
        case 'p': s = CellSource::kPredicted; break;
        case 'f': s = CellSource::kFallback; break;
        default: throw ParseError(k + 3, "bad source tag");
      }
      try {
        c.Set(k, a, std::stod(tok), s);
      } catch (const std::exception&) {
        throw ParseError(k + 3, "bad value '" + tok + "'");
      }
    }
  }
  return c;
}

}  // namespace pcache
