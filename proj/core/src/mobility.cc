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

#include "pcache/mobility.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>

#include "pcache/random.h"
#include "pcache/ratings.h"

namespace pcache {
namespace {

double Wrap(double v) {
  v -= std::floor(v);
  return v >= 1.0 ? 0.0 : v;
}

std::size_t ExactSqrt(std::size_t n) {
  auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

double SquaredTorusDistance(Point a, Point b) {
  double dx = std::abs(a.x - b.x);
  double dy = std::abs(a.y - b.y);
  dx = std::min(dx, 1.0 - dx);
  dy = std::min(dy, 1.0 - dy);
  return dx * dx + dy * dy;
}

}  // namespace

double MobilityConfig::CellSide() const {
  const std::size_t side = ExactSqrt(cells);
  if (cells == 0 || side * side != cells) {
    throw std::invalid_argument("cell count must be a positive perfect square");
  }
  return 1.0 / static_cast<double>(side);
}

Trajectory GenerateTrajectories(const MobilityConfig& cfg) {
  const double max_flight = cfg.CellSide();
  if (cfg.slots == 0) throw std::invalid_argument("slot count must be positive");
  Trajectory traj(cfg.slots, cfg.n_users);
  for (std::size_t u = 0; u < cfg.n_users; ++u) {
    Rng rng(DeriveSeed(cfg.seed, u));
    Point p{UniformUnit(rng), UniformUnit(rng)};
    traj.at(0, u) = p;
    for (std::size_t t = 1; t < cfg.slots; ++t) {
      const double length = UniformUnit(rng) * max_flight;
      const double angle = UniformUnit(rng) * 2.0 * std::numbers::pi;
      p = {Wrap(p.x + length * std::cos(angle)), Wrap(p.y + length * std::sin(angle))};
      traj.at(t, u) = p;
    }
  }
  return traj;
}

double TorusDistance(Point a, Point b) { return std::sqrt(SquaredTorusDistance(a, b)); }

std::vector<Point> GridFbsPositions(std::size_t n_fbs) {
  const std::size_t side = ExactSqrt(n_fbs);
  if (side * side != n_fbs) {
    throw std::invalid_argument("FBS count must be a perfect square");
  }
  std::vector<Point> out;
  out.reserve(n_fbs);
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      out.push_back({(c + 0.5) / static_cast<double>(side),
                     (r + 0.5) / static_cast<double>(side)});
    }
  }
  return out;
}

ContactModel EstimateContacts(const Trajectory& traj, double distance,
                              std::span<const Point> fbs_positions) {
  if (!(distance > 0.0)) throw std::invalid_argument("distance must be positive");
  const std::size_t n = traj.n_users();
  const std::size_t l = fbs_positions.size();
  const double d2 = distance * distance;
  Grid<std::size_t> uu(n, n, 0);
  Grid<std::size_t> ul(n, l, 0);
  for (std::size_t t = 0; t < traj.slots(); ++t) {
    const auto pos = traj.slot(t);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (SquaredTorusDistance(pos[i], pos[j]) <= d2) ++uu(i, j);
      }
      for (std::size_t b = 0; b < l; ++b) {
        if (SquaredTorusDistance(pos[i], fbs_positions[b]) <= d2) ++ul(i, b);
      }
    }
  }
  ContactModel c;
  c.distance = distance;
  c.fbs_positions.assign(fbs_positions.begin(), fbs_positions.end());
  c.user_user = Grid<double>(n, n, 0.0);
  c.user_fbs = Grid<double>(n, l, 0.0);
  const double slots = static_cast<double>(traj.slots());
  for (std::size_t i = 0; i < n; ++i) {
    c.user_user(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      c.user_user(i, j) = c.user_user(j, i) = static_cast<double>(uu(i, j)) / slots;
    }
    for (std::size_t b = 0; b < l; ++b) {
      c.user_fbs(i, b) = static_cast<double>(ul(i, b)) / slots;
    }
  }
  return c;
}

bool CheckProtocolFeasible(std::span<const Point> positions,
                           std::span<const Link> links, double distance,
                           double guard) {
  const double guard_d2 = (1.0 + guard) * distance * (1.0 + guard) * distance;
  const double d2 = distance * distance;
  for (std::size_t i = 0; i < links.size(); ++i) {
    const Link& a = links[i];
    if (a.src == a.dst) return false;
    if (SquaredTorusDistance(positions[a.src], positions[a.dst]) > d2) return false;
    for (std::size_t j = 0; j < links.size(); ++j) {
      if (i == j) continue;
      const Link& b = links[j];
      if (a.src == b.src || a.src == b.dst || a.dst == b.src || a.dst == b.dst) {
        return false;
      }
      if (SquaredTorusDistance(positions[b.src], positions[a.dst]) < guard_d2) {
        return false;
      }
    }
  }
  return true;
}

std::vector<Link> PackLinksGreedy(std::span<const Point> positions,
                                  double distance, double guard) {
  const double d2 = distance * distance;
  const double guard_d2 = (1.0 + guard) * distance * (1.0 + guard) * distance;
  struct Candidate {
    double d2;
    std::size_t src, dst;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t j = 0; j < positions.size(); ++j) {
      if (i == j) continue;
      const double dd = SquaredTorusDistance(positions[i], positions[j]);
      if (dd <= d2) candidates.push_back({dd, i, j});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.d2, a.src, a.dst) < std::tie(b.d2, b.src, b.dst);
  });
  std::vector<Link> accepted;
  std::vector<char> busy(positions.size(), 0);
  for (const Candidate& c : candidates) {
    if (busy[c.src] || busy[c.dst]) continue;
    bool ok = true;
    for (const Link& a : accepted) {
      if (SquaredTorusDistance(positions[a.src], positions[c.dst]) < guard_d2 ||
          SquaredTorusDistance(positions[c.src], positions[a.dst]) < guard_d2) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    accepted.push_back({c.src, c.dst});
    busy[c.src] = busy[c.dst] = 1;
  }
  return accepted;
}

double EstimateLambda(const Trajectory& traj, double distance, double guard,
                      std::size_t n_samples, std::uint64_t seed) {
  if (n_samples == 0) throw std::invalid_argument("need at least one sample");
  if (traj.slots() == 0) return 0.0;
  Rng rng(DeriveSeed(seed, 0x1a3b));
  double total = 0.0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    const std::size_t t = UniformIndex(rng, traj.slots());
    total += static_cast<double>(PackLinksGreedy(traj.slot(t), distance, guard).size());
  }
  return total / static_cast<double>(n_samples);
}

void WriteTrajectoryCsv(std::ostream& out, const Trajectory& traj) {
  const auto old_precision = out.precision(17);
  out << "slot,user,x,y\n";
  for (std::size_t t = 0; t < traj.slots(); ++t) {
    for (std::size_t u = 0; u < traj.n_users(); ++u) {
      out << t << ',' << u << ',' << traj.at(t, u).x << ',' << traj.at(t, u).y << '\n';
    }
  }
  out.precision(old_precision);
}

Trajectory ReadTrajectoryCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("slot,user,x,y", 0) != 0) {
    throw ParseError(1, "expected header 'slot,user,x,y'");
  }
  struct Row {
    std::size_t t, u;
    Point p;
  };
  std::vector<Row> rows;
  std::size_t max_t = 0, max_u = 0, line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::istringstream s(line);
    Row r;
    char c1, c2, c3;
    if (!(s >> r.t >> c1 >> r.u >> c2 >> r.p.x >> c3 >> r.p.y) || c1 != ',' ||
        c2 != ',' || c3 != ',') {
      throw ParseError(line_no, "malformed trace row");
    }
    if (r.p.x < 0.0 || r.p.x >= 1.0 || r.p.y < 0.0 || r.p.y >= 1.0) {
      throw ParseError(line_no, "coordinate outside [0,1)");
    }
    max_t = std::max(max_t, r.t);
    max_u = std::max(max_u, r.u);
    rows.push_back(r);
  }
  if (rows.empty()) return Trajectory();
  Trajectory traj(max_t + 1, max_u + 1);
  if (rows.size() != traj.slots() * traj.n_users()) {
    throw ParseError(0, "trace does not cover every (slot, user) pair");
  }
  for (const Row& r : rows) traj.at(r.t, r.u) = r.p;
  return traj;
}

void WriteContacts(std::ostream& out, const ContactModel& c) {
  const auto old_precision = out.precision(17);
  out << "pcache-contacts 1\n";
  out << "dims " << c.n_users() << ' ' << c.n_fbs() << " distance " << c.distance
      << '\n';
  for (const Point& p : c.fbs_positions) out << p.x << ' ' << p.y << '\n';
  for (std::size_t i = 0; i < c.n_users(); ++i) {
    for (std::size_t j = 0; j < c.n_users(); ++j) {
      if (j) out << ' ';
      out << c.user_user(i, j);
    }
    for (std::size_t b = 0; b < c.n_fbs(); ++b) out << ' ' << c.user_fbs(i, b);
    out << '\n';
  }
  out.precision(old_precision);
}

ContactModel ReadContacts(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "pcache-contacts 1") {
    throw ParseError(1, "expected 'pcache-contacts 1'");
  }
  ContactModel c;
  std::size_t n = 0, l = 0, line_no = 2;
  {
    if (!std::getline(in, line)) throw ParseError(2, "truncated");
    std::istringstream s(line);
    std::string dims, dist;
    if (!(s >> dims >> n >> l >> dist >> c.distance) || dims != "dims" ||
        dist != "distance") {
      throw ParseError(2, "bad dims line");
    }
  }
  for (std::size_t b = 0; b < l; ++b) {
    ++line_no;
    Point p;
    if (!std::getline(in, line) || !(std::istringstream(line) >> p.x >> p.y)) {
      throw ParseError(line_no, "bad FBS position");
    }
    c.fbs_positions.push_back(p);
  }
  c.user_user = Grid<double>(n, n, 0.0);
  c.user_fbs = Grid<double>(n, l, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    ++line_no;
    if (!std::getline(in, line)) throw ParseError(line_no, "truncated");
    std::istringstream s(line);
    for (std::size_t j = 0; j < n; ++j) {
      if (!(s >> c.user_user(i, j))) throw ParseError(line_no, "short row");
    }
    for (std::size_t b = 0; b < l; ++b) {
      if (!(s >> c.user_fbs(i, b))) throw ParseError(line_no, "short row");
    }
  }
  return c;
}

}  // namespace pcache
