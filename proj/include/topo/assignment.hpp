#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "topo/persistence.hpp"
#include "topo/types.hpp"

namespace topo {

enum class TargetKind : std::uint8_t { Point, Diagonal };

// Where one diagram point goes: a concrete target point, or its own
// diagonal projection (cancellation).
struct PairTarget {
  TargetKind kind = TargetKind::Diagonal;
  std::int32_t index = -1;  // into the target diagram's pairs when kind == Point
};

// Per-class optimal bijection between two augmented diagrams. Costs are
// Euclidean in birth-death space raised to the q-th power; matching two
// diagonal points is free.
struct Assignment {
  double q = 2.0;
  double total_cost = 0.0;  // sum of matched costs^q; W_q = total_cost^(1/q)
  std::vector<PairTarget> target_of;          // one entry per pair of D1
  std::vector<std::int32_t> source_of_target; // per pair of D2; -1: settles on the diagonal

  double distance() const;
};

// Diagonal projection of a birth-death point.
inline double diagonal_midpoint(double birth, double death) { return 0.5 * (birth + death); }

// Wasserstein-q distance via augmentation and an epsilon-scaling auction
// per (dimension, finiteness) class; the returned cost is within 1%
// relative of the exact optimum. Infinite generators are matched among
// themselves by birth order and never map to the diagonal.
std::pair<double, Assignment> wasserstein(const PersistenceDiagram& d1,
                                          const PersistenceDiagram& d2, double q = 2.0);

// Exact optimum via a Hungarian solver; the oracle for auction precision.
// Guarded to small classes.
std::pair<double, Assignment> exact_assignment(const PersistenceDiagram& d1,
                                               const PersistenceDiagram& d2, double q = 2.0,
                                               Index max_class_size = 1024);

// Matched points with identical (dim, finite, birth vertex, death vertex).
struct StillPair {
  std::int32_t current = -1;   // index into the current diagram
  std::int32_t previous = -1;  // index into the previous diagram
};
std::vector<StillPair> still_pairs(const PersistenceDiagram& current,
                                   const PersistenceDiagram& previous);

// Fast path: still pairs inherit their previous targets; the reduced
// diagram is assigned against the reduced target. With an empty reduced
// target every reduced point maps to its diagonal projection directly.
std::pair<double, Assignment> update_assignment(const Assignment& prev,
                                                const PersistenceDiagram& current,
                                                const PersistenceDiagram& previous,
                                                const PersistenceDiagram& target,
                                                double q = 2.0);

}  // namespace topo
