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

#ifndef PCACHE_MOBILITY_H_
#define PCACHE_MOBILITY_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "pcache/grid.h"

namespace pcache {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

// Random-walk mobility on the unit torus. The square is split into `cells`
// equal square cells; a flight never exceeds one cell side.
struct MobilityConfig {
  std::size_t n_users = 0;
  std::size_t cells = 40000;  // must be a perfect square
  std::size_t slots = 1000;
  std::uint64_t seed = 0;

  double CellSide() const;  // throws std::invalid_argument on a bad config
};

// positions(t, u) for slot t and user u, coordinates in [0, 1).
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::size_t slots, std::size_t n_users)
      : positions_(slots, n_users) {}

  std::size_t slots() const { return positions_.rows(); }
  std::size_t n_users() const { return positions_.cols(); }
  const Point& at(std::size_t t, std::size_t u) const { return positions_(t, u); }
  Point& at(std::size_t t, std::size_t u) { return positions_(t, u); }
  std::span<const Point> slot(std::size_t t) const { return positions_.row(t); }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  Grid<Point> positions_;
};

// Slot 0 is uniform on the square; each later slot adds a flight of uniform
// length in [0, cell side] and uniform direction, wrapped on the torus. Each
// user draws from its own stream derived from the seed.
Trajectory GenerateTrajectories(const MobilityConfig& cfg);

// Euclidean distance with per-axis wraparound.
double TorusDistance(Point a, Point b);

// Centers of a sqrt(L) x sqrt(L) grid of equal cells. L must be a perfect
// square (0 allowed).
std::vector<Point> GridFbsPositions(std::size_t n_fbs);

// Pairwise contact statistics for collaboration distance `distance`.
struct ContactModel {
  double distance = 0.0;
  Grid<double> user_user;  // N x N, symmetric, unit diagonal
  Grid<double> user_fbs;   // N x L
  std::vector<Point> fbs_positions;

  std::size_t n_users() const { return user_user.rows(); }
  std::size_t n_fbs() const { return fbs_positions.size(); }
};

// Fraction of slots in which each pair is within `distance`. Self-contact is 1.
ContactModel EstimateContacts(const Trajectory& traj, double distance,
                              std::span<const Point> fbs_positions = {});

struct Link {
  std::size_t src;
  std::size_t dst;
  friend bool operator==(const Link&, const Link&) = default;
};

// Protocol-model check for a set of simultaneous links: every link is within
// `distance`, every other active transmitter is at least (1 + guard) *
// distance away from each receiver, and no node takes part in two links.
bool CheckProtocolFeasible(std::span<const Point> positions,
                           std::span<const Link> links, double distance,
                           double guard);

// Greedy maximal packing of feasible links in one slot. Candidates are all
// ordered pairs within `distance`, tried by ascending length (ties by
// source, then destination).
std::vector<Link> PackLinksGreedy(std::span<const Point> positions,
                                  double distance, double guard);

// Mean packed link count over `n_samples` slots drawn uniformly with
// replacement from the trajectory.
double EstimateLambda(const Trajectory& traj, double distance, double guard,
                      std::size_t n_samples, std::uint64_t seed);

// CSV trace "slot,user,x,y" with a header row; round-trips exactly.
void WriteTrajectoryCsv(std::ostream& out, const Trajectory& traj);
Trajectory ReadTrajectoryCsv(std::istream& in);

// Text format: "pcache-contacts 1", "dims N L distance D", L lines of FBS
// coordinates, then N rows of N user-user values followed by L user-FBS
// values.
void WriteContacts(std::ostream& out, const ContactModel& c);
ContactModel ReadContacts(std::istream& in);

}  // namespace pcache

#endif  // PCACHE_MOBILITY_H_
