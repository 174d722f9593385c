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

#include "pcache/params.h"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pcache {

std::vector<double> LearnActivity(std::span<const std::size_t> given_counts,
                                  std::size_t horizon) {
  const std::size_t max_count =
      given_counts.empty() ? 0 : *std::max_element(given_counts.begin(), given_counts.end());
  if (horizon == 0 || horizon < max_count) {
    throw std::invalid_argument("horizon smaller than request count");
  }
  std::vector<double> activity(given_counts.size());
  for (std::size_t k = 0; k < given_counts.size(); ++k) {
    activity[k] = static_cast<double>(given_counts[k]) / static_cast<double>(horizon);
  }
  return activity;
}

std::vector<double> LearnActivity(const RatingMatrix& m, std::size_t horizon) {
  std::vector<std::size_t> counts(m.n_users());
  for (std::size_t k = 0; k < m.n_users(); ++k) counts[k] = m.RowCount(k);
  return LearnActivity(counts, horizon);
}

Grid<double> LearnPreferences(const CompleteRatingMatrix& c) {
  Grid<double> pref(c.n_users(), c.n_files(), 0.0);
  for (std::size_t k = 0; k < c.n_users(); ++k) {
    double sum = 0.0;
    for (std::size_t a = 0; a < c.n_files(); ++a) sum += c.value(k, a);
    if (!(sum > 0.0)) {
      throw std::invalid_argument("user " + std::to_string(k) +
                                  " has a non-positive rating sum");
    }
    for (std::size_t a = 0; a < c.n_files(); ++a) pref(k, a) = c.value(k, a) / sum;
  }
  return pref;
}

std::vector<double> LearnPopularity(const CompleteRatingMatrix& c) {
  std::vector<double> column(c.n_files(), 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < c.n_users(); ++k) {
    for (std::size_t a = 0; a < c.n_files(); ++a) {
      column[a] += c.value(k, a);
      total += c.value(k, a);
    }
  }
  if (!(total > 0.0)) throw std::invalid_argument("rating total is not positive");
  for (double& v : column) v /= total;
  return column;
}

LearnedParams LearnParams(const RatingMatrix& given,
                          const CompleteRatingMatrix& complete,
                          std::optional<std::size_t> horizon) {
  if (given.n_users() != complete.n_users() || given.n_files() != complete.n_files()) {
    throw std::invalid_argument("given and complete matrices differ in shape");
  }
  std::vector<std::size_t> counts(given.n_users());
  for (std::size_t k = 0; k < given.n_users(); ++k) counts[k] = given.RowCount(k);
  const std::size_t max_count =
      counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
  LearnedParams p;
  p.horizon = horizon.value_or(std::max<std::size_t>(max_count, 1));
  p.activity = LearnActivity(counts, p.horizon);
  p.preference = LearnPreferences(complete);
  p.popularity = LearnPopularity(complete);
  p.user_ids = given.user_ids();
  p.item_ids = given.item_ids();
  return p;
}

void WriteParams(std::ostream& out, const LearnedParams& p) {
  const auto old_precision = out.precision(17);
  out << "pcache-params 1\n";
  out << "dims " << p.n_users() << ' ' << p.n_files() << " horizon " << p.horizon
      << '\n';
  out << "items";
  for (std::size_t a = 0; a < p.n_files(); ++a) {
    out << ' ' << (a < p.item_ids.size() ? p.item_ids[a] : std::to_string(a));
  }
  out << "\npopularity";
  for (double v : p.popularity) out << ' ' << v;
  out << '\n';
  for (std::size_t k = 0; k < p.n_users(); ++k) {
    out << (k < p.user_ids.size() ? p.user_ids[k] : std::to_string(k)) << ' '
        << p.activity[k];
    for (double v : p.preference.row(k)) out << ' ' << v;
    out << '\n';
  }
  out.precision(old_precision);
}

LearnedParams ReadParams(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  const auto next = [&]() -> std::istringstream {
    if (!std::getline(in, line)) throw ParseError(line_no + 1, "truncated params");
    ++line_no;
    return std::istringstream(line);
  };
  next();
  if (line != "pcache-params 1") {
    throw ParseError(1, "expected 'pcache-params 1'");
  }
  LearnedParams p;
  std::size_t n = 0, f = 0;
  {
    auto s = next();
    std::string dims, hz;
    if (!(s >> dims >> n >> f >> hz >> p.horizon) || dims != "dims" || hz != "horizon") {
      throw ParseError(line_no, "bad dims line");
    }
  }
  {
    auto s = next();
    std::string key, id;
    s >> key;
    if (key != "items") throw ParseError(line_no, "expected items");
    while (s >> id) p.item_ids.push_back(id);
    if (p.item_ids.size() != f) throw ParseError(line_no, "item count mismatch");
  }
  {
    auto s = next();
    std::string key;
    s >> key;
    if (key != "popularity") throw ParseError(line_no, "expected popularity");
    p.popularity.resize(f);
    for (double& v : p.popularity) {
      if (!(s >> v)) throw ParseError(line_no, "short popularity row");
    }
  }
  p.activity.resize(n);
  p.preference = Grid<double>(n, f, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    auto s = next();
    std::string id;
    if (!(s >> id >> p.activity[k])) throw ParseError(line_no, "bad user row");
    p.user_ids.push_back(id);
    for (std::size_t a = 0; a < f; ++a) {
      if (!(s >> p.preference(k, a))) throw ParseError(line_no, "short preference row");
    }
  }
  return p;
}

}  // namespace pcache
