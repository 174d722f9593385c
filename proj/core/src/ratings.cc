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

#include "pcache/ratings.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string_view>
#include <tuple>
#include <unordered_map>

#include "pcache/random.h"

namespace pcache {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> Split(std::string_view line,
                                    std::string_view delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(Trim(line.substr(start)));
      return out;
    }
    out.push_back(Trim(line.substr(start, pos - start)));
    start = pos + delim.size();
  }
}

bool ParseInt64(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Integer ratings, tolerating a zero fractional part ("4.0").
bool ParseRating(std::string_view s, int& out) {
  std::int64_t whole;
  if (ParseInt64(s, whole)) {
    out = static_cast<int>(whole);
    return whole == out;
  }
  double d;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
  if (ec != std::errc() || ptr != s.data() + s.size()) return false;
  if (d != std::floor(d) || std::abs(d) > 1e6) return false;
  out = static_cast<int>(d);
  return true;
}

bool IsUnsigned(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return c >= '0' && c <= '9';
  });
}

// Orders ids numerically when both are plain unsigned integers.
bool IdLess(const std::string& a, const std::string& b) {
  if (IsUnsigned(a) && IsUnsigned(b)) {
    const auto strip = [](const std::string& s) {
      const std::size_t nz = s.find_first_not_of('0');
      return nz == std::string::npos ? std::string_view("0")
                                     : std::string_view(s).substr(nz);
    };
    const std::string_view sa = strip(a), sb = strip(b);
    if (sa.size() != sb.size()) return sa.size() < sb.size();
    if (sa != sb) return sa < sb;
  }
  return a < b;
}

struct Interner {
  std::unordered_map<std::string, std::uint32_t> index;
  std::vector<std::string> names;

  std::uint32_t Intern(const std::string& name) {
    auto [it, inserted] =
        index.emplace(name, static_cast<std::uint32_t>(names.size()));
    if (inserted) names.push_back(name);
    return it->second;
  }
};

// Final axis labels, sorted, plus the mapping from interned ids to positions.
struct Axis {
  std::vector<std::string> labels;
  std::vector<std::size_t> position;  // interned id -> label index
};

Axis BuildAxis(const Interner& in, bool dense_numeric) {
  Axis axis;
  const bool numeric = dense_numeric && !in.names.empty() &&
                       std::all_of(in.names.begin(), in.names.end(),
                                   [](const std::string& s) { return IsUnsigned(s); });
  if (numeric) {
    std::uint64_t lo = UINT64_MAX, hi = 0;
    std::vector<std::uint64_t> parsed(in.names.size());
    for (std::size_t i = 0; i < in.names.size(); ++i) {
      std::from_chars(in.names[i].data(), in.names[i].data() + in.names[i].size(),
                      parsed[i]);
      lo = std::min(lo, parsed[i]);
      hi = std::max(hi, parsed[i]);
    }
    const std::uint64_t first = std::min<std::uint64_t>(lo, 1);
    for (std::uint64_t id = first; id <= hi; ++id) {
      axis.labels.push_back(std::to_string(id));
    }
    axis.position.resize(in.names.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
      axis.position[i] = static_cast<std::size_t>(parsed[i] - first);
    }
    return axis;
  }
  std::vector<std::size_t> order(in.names.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return IdLess(in.names[a], in.names[b]);
  });
  axis.position.resize(in.names.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    axis.labels.push_back(in.names[order[k]]);
    axis.position[order[k]] = k;
  }
  return axis;
}

std::vector<std::size_t> SampleSorted(Rng& rng, std::size_t total,
                                      std::size_t n) {
  std::vector<std::size_t> pool(total);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + UniformIndex(rng, total - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(n);
  std::sort(pool.begin(), pool.end());
  return pool;
}

void CheckToken(const std::string& id) {
  if (id.empty() || id.find_first_of(" \t\r\n") != std::string::npos) {
    throw std::invalid_argument("snapshot ids must be non-empty without whitespace: '" +
                                id + "'");
  }
}

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error(line == 0 ? what
                                   : "line " + std::to_string(line) + ": " + what),
      line_(line) {}

RatingMatrix::RatingMatrix(std::vector<std::string> user_ids,
                           std::vector<std::string> item_ids)
    : values_(user_ids.size(), item_ids.size(), 0),
      user_ids_(std::move(user_ids)),
      item_ids_(std::move(item_ids)) {}

void RatingMatrix::Set(std::size_t user, std::size_t file, int rating) {
  if (rating < kMinRating || rating > kMaxRating) {
    throw std::invalid_argument("rating out of range: " + std::to_string(rating));
  }
  values_(user, file) = static_cast<std::uint8_t>(rating);
}

std::size_t RatingMatrix::ObservedCount() const {
  const auto data = values_.data();
  return static_cast<std::size_t>(
      std::count_if(data.begin(), data.end(), [](std::uint8_t v) { return v != 0; }));
}

std::size_t RatingMatrix::RowCount(std::size_t user) const {
  const auto row = values_.row(user);
  return static_cast<std::size_t>(
      std::count_if(row.begin(), row.end(), [](std::uint8_t v) { return v != 0; }));
}

std::size_t RatingMatrix::ColumnCount(std::size_t file) const {
  std::size_t n = 0;
  for (std::size_t k = 0; k < n_users(); ++k) n += observed(k, file) ? 1 : 0;
  return n;
}

double RatingMatrix::Sparsity() const {
  const std::size_t cells = n_users() * n_files();
  if (cells == 0) return 0.0;
  return 1.0 - static_cast<double>(ObservedCount()) / static_cast<double>(cells);
}

std::vector<RatingEvent> ParseMovieLens(std::istream& in, LogFormat format) {
  std::vector<RatingEvent> events;
  const std::string_view delim = format == LogFormat::kDat ? "::" : ",";
  std::string line;
  std::size_t line_no = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view trimmed = Trim(line);
    if (trimmed.empty()) continue;
    const auto fields = Split(trimmed, delim);
    const bool first = !seen_content;
    seen_content = true;
    if (fields.size() < 3 || fields.size() > 4) {
      if (first && format == LogFormat::kCsv) continue;
      throw ParseError(line_no, "expected 3 or 4 fields, got " +
                                    std::to_string(fields.size()));
    }
    RatingEvent ev;
    if (!ParseRating(fields[2], ev.rating)) {
      // A CSV header ("userId,movieId,rating,timestamp") is allowed once.
      if (first && format == LogFormat::kCsv) continue;
      throw ParseError(line_no, "rating is not an integer: '" +
                                    std::string(fields[2]) + "'");
    }
    if (ev.rating < kMinRating || ev.rating > kMaxRating) {
      throw ParseError(line_no, "rating out of range [1,5]: " +
                                    std::to_string(ev.rating));
    }
    if (fields[0].empty() || fields[1].empty()) {
      throw ParseError(line_no, "empty user or item id");
    }
    ev.user_id = std::string(fields[0]);
    ev.item_id = std::string(fields[1]);
    if (fields.size() == 4 && !fields[3].empty() &&
        !ParseInt64(fields[3], ev.timestamp)) {
      throw ParseError(line_no, "timestamp is not an integer: '" +
                                    std::string(fields[3]) + "'");
    }
    events.push_back(std::move(ev));
  }
  return events;
}

std::vector<RatingEvent> ReadMovieLensFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open rating log: " + path);
  const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  return ParseMovieLens(in, csv ? LogFormat::kCsv : LogFormat::kDat);
}

RatingMatrix Prefilter(const std::vector<RatingEvent>& events,
                       const PrefilterOptions& options) {
  Interner users, items;
  struct Cell {
    std::uint32_t user, item;
    std::size_t order;
    int rating;
  };
  std::vector<Cell> cells;
  cells.reserve(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    cells.push_back({users.Intern(events[i].user_id),
                     items.Intern(events[i].item_id), i, events[i].rating});
  }
  // Last occurrence of each (user, item) wins.
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    return std::tie(a.user, a.item, a.order) < std::tie(b.user, b.item, b.order);
  });
  std::vector<Cell> unique;
  unique.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i + 1 < cells.size() && cells[i + 1].user == cells[i].user &&
        cells[i + 1].item == cells[i].item) {
      continue;
    }
    unique.push_back(cells[i]);
  }

  const Axis user_axis = BuildAxis(users, options.dense_numeric_ids);
  const Axis item_axis = BuildAxis(items, options.dense_numeric_ids);

  std::vector<std::size_t> per_user(user_axis.labels.size(), 0);
  for (const Cell& c : unique) ++per_user[user_axis.position[c.user]];
  std::vector<char> keep_user(per_user.size());
  for (std::size_t u = 0; u < per_user.size(); ++u) {
    keep_user[u] = per_user[u] >= options.min_user_ratings;
  }

  std::vector<std::size_t> per_item(item_axis.labels.size(), 0);
  for (const Cell& c : unique) {
    if (keep_user[user_axis.position[c.user]]) ++per_item[item_axis.position[c.item]];
  }
  std::vector<char> keep_item(per_item.size());
  for (std::size_t a = 0; a < per_item.size(); ++a) {
    keep_item[a] = per_item[a] >= options.min_item_raters;
  }

  std::vector<std::size_t> row_of(per_user.size(), SIZE_MAX);
  std::vector<std::size_t> col_of(per_item.size(), SIZE_MAX);
  std::vector<std::string> row_ids, col_ids;
  for (std::size_t u = 0; u < per_user.size(); ++u) {
    if (keep_user[u]) {
      row_of[u] = row_ids.size();
      row_ids.push_back(user_axis.labels[u]);
    }
  }
  for (std::size_t a = 0; a < per_item.size(); ++a) {
    if (keep_item[a]) {
      col_of[a] = col_ids.size();
      col_ids.push_back(item_axis.labels[a]);
    }
  }
  if (row_ids.empty() || col_ids.empty()) {
    throw std::invalid_argument("empty after prefilter");
  }

  RatingMatrix m(std::move(row_ids), std::move(col_ids));
  for (const Cell& c : unique) {
    const std::size_t r = row_of[user_axis.position[c.user]];
    const std::size_t f = col_of[item_axis.position[c.item]];
    if (r != SIZE_MAX && f != SIZE_MAX) m.Set(r, f, c.rating);
  }
  std::ostringstream lineage;
  lineage << "prefilter(" << options.min_user_ratings << ","
          << options.min_item_raters << ")";
  m.set_lineage(lineage.str());
  return m;
}

SubsampleIndices DrawSubsample(std::size_t total_users, std::size_t total_files,
                               std::size_t n_users, std::size_t n_files,
                               std::uint64_t seed) {
  if (n_users > total_users || n_files > total_files) {
    throw std::invalid_argument(
        "subsample of " + std::to_string(n_users) + "x" + std::to_string(n_files) +
        " exceeds " + std::to_string(total_users) + "x" +
        std::to_string(total_files));
  }
  Rng user_rng(DeriveSeed(seed, 0));
  Rng file_rng(DeriveSeed(seed, 1));
  return {SampleSorted(user_rng, total_users, n_users),
          SampleSorted(file_rng, total_files, n_files)};
}

RatingMatrix Restrict(const RatingMatrix& m, const SubsampleIndices& idx) {
  std::vector<std::string> uids, iids;
  for (std::size_t u : idx.users) uids.push_back(m.user_ids().at(u));
  for (std::size_t f : idx.files) iids.push_back(m.item_ids().at(f));
  RatingMatrix out(std::move(uids), std::move(iids));
  for (std::size_t r = 0; r < idx.users.size(); ++r) {
    for (std::size_t c = 0; c < idx.files.size(); ++c) {
      const int v = m.value(idx.users[r], idx.files[c]);
      if (v != 0) out.Set(r, c, v);
    }
  }
  out.set_lineage(m.lineage());
  return out;
}

RatingMatrix Subsample(const RatingMatrix& m, std::size_t n_users,
                       std::size_t n_files, std::uint64_t seed) {
  RatingMatrix out = Restrict(
      m, DrawSubsample(m.n_users(), m.n_files(), n_users, n_files, seed));
  out.set_lineage(m.lineage() + " subsample(" + std::to_string(n_users) + "," +
                  std::to_string(n_files) + ",seed=" + std::to_string(seed) + ")");
  return out;
}

RatingMatrix MaskRatings(const RatingMatrix& m, double percent,
                         std::uint64_t seed) {
  if (!(percent >= 0.0 && percent <= 1.0)) {
    throw std::invalid_argument("mask percent must lie in [0,1]");
  }
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t k = 0; k < m.n_users(); ++k) {
    for (std::size_t a = 0; a < m.n_files(); ++a) {
      if (m.observed(k, a)) cells.emplace_back(k, a);
    }
  }
  // Round half up.
  const auto count = static_cast<std::size_t>(
      std::floor(percent * static_cast<double>(cells.size()) + 0.5));
  RatingMatrix out = m;
  Rng rng(DeriveSeed(seed, 2));
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + UniformIndex(rng, cells.size() - i);
    std::swap(cells[i], cells[j]);
    out.Clear(cells[i].first, cells[i].second);
  }
  std::ostringstream lineage;
  lineage << m.lineage() << " mask(" << percent << ",seed=" << seed << ")";
  out.set_lineage(lineage.str());
  return out;
}

void WriteSnapshot(std::ostream& out, const RatingMatrix& m) {
  out << "pcache-ratings 1\n";
  out << "dims " << m.n_users() << ' ' << m.n_files() << '\n';
  out << "lineage " << m.lineage() << '\n';
  out << "users";
  for (const auto& id : m.user_ids()) {
    CheckToken(id);
    out << ' ' << id;
  }
  out << "\nitems";
  for (const auto& id : m.item_ids()) {
    CheckToken(id);
    out << ' ' << id;
  }
  out << '\n';
  for (std::size_t k = 0; k < m.n_users(); ++k) {
    for (std::size_t a = 0; a < m.n_files(); ++a) {
      if (a) out << ' ';
      out << m.value(k, a);
    }
    out << '\n';
  }
}

RatingMatrix ReadSnapshot(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  const auto next = [&](std::string_view key) {
    if (!std::getline(in, line)) throw ParseError(line_no + 1, "truncated snapshot");
    ++line_no;
    if (line.rfind(key, 0) != 0) {
      throw ParseError(line_no, "expected '" + std::string(key) + "'");
    }
    return line.size() > key.size() ? line.substr(key.size() + 1) : std::string();
  };
  if (next("pcache-ratings") != "1") throw ParseError(1, "unsupported snapshot version");
  std::istringstream dims(next("dims"));
  std::size_t n_users = 0, n_files = 0;
  if (!(dims >> n_users >> n_files)) throw ParseError(line_no, "bad dims");
  std::string lineage = next("lineage");
  const auto read_ids = [&](std::string_view key, std::size_t n) {
    std::istringstream ids(next(key));
    std::vector<std::string> out;
    std::string id;
    while (ids >> id) out.push_back(id);
    if (out.size() != n) throw ParseError(line_no, "id count does not match dims");
    return out;
  };
  auto uids = read_ids("users", n_users);
  auto iids = read_ids("items", n_files);
  RatingMatrix m(std::move(uids), std::move(iids));
  for (std::size_t k = 0; k < n_users; ++k) {
    if (!std::getline(in, line)) throw ParseError(line_no + 1, "truncated snapshot");
    ++line_no;
    std::istringstream row(line);
    for (std::size_t a = 0; a < n_files; ++a) {
      int v;
      if (!(row >> v)) throw ParseError(line_no, "short row");
      if (v != 0) {
        if (v < kMinRating || v > kMaxRating) throw ParseError(line_no, "rating out of range");
        m.Set(k, a, v);
      }
    }
  }
  m.set_lineage(std::move(lineage));
  return m;
}

namespace {

double StandardNormal(Rng& rng) {
  // Box-Muller; 1 - u keeps the log argument away from zero.
  const double u = 1.0 - UniformUnit(rng);
  const double v = UniformUnit(rng);
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * 3.14159265358979323846 * v);
}

std::vector<double> Propensities(Rng& rng, std::size_t n) {
  std::vector<double> out(n);
  double sum = 0.0;
  for (double& x : out) sum += x = std::exp(0.8 * StandardNormal(rng));
  for (double& x : out) x *= static_cast<double>(n) / sum;
  return out;
}

}  // namespace

std::vector<RatingEvent> GenerateSyntheticLog(const SyntheticLogOptions& options) {
  if (options.rank == 0) throw std::invalid_argument("rank must be positive");
  Rng rng(DeriveSeed(options.seed, 3));
  const std::size_t r = options.rank;
  Grid<double> user_factor(options.n_users, r);
  Grid<double> item_factor(options.n_items, r);
  for (double& x : user_factor.data()) x = StandardNormal(rng);
  for (double& x : item_factor.data()) x = StandardNormal(rng);
  std::vector<double> user_bias(options.n_users);
  std::vector<double> item_bias(options.n_items);
  for (double& b : user_bias) b = 0.4 * StandardNormal(rng);
  for (double& b : item_bias) b = 0.5 * StandardNormal(rng);
  const std::vector<double> user_rate = Propensities(rng, options.n_users);
  const std::vector<double> item_rate = Propensities(rng, options.n_items);

  const double scale = 1.0 / std::sqrt(static_cast<double>(r));
  std::vector<RatingEvent> events;
  std::int64_t clock = 0;
  for (std::size_t k = 0; k < options.n_users; ++k) {
    for (std::size_t a = 0; a < options.n_items; ++a) {
      const double keep = options.density * user_rate[k] * item_rate[a];
      if (UniformUnit(rng) >= keep) continue;
      double dot = 0.0;
      for (std::size_t j = 0; j < r; ++j) dot += user_factor(k, j) * item_factor(a, j);
      const double score = 3.5 + user_bias[k] + item_bias[a] + dot * scale +
                           options.noise * StandardNormal(rng);
      const int rating = static_cast<int>(std::clamp(std::lround(score), 1L, 5L));
      events.push_back({std::to_string(k + 1), std::to_string(a + 1), rating, clock++});
    }
  }
  return events;
}

}  // namespace pcache
