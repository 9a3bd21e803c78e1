#include "topo/assignment.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

namespace topo {

double Assignment::distance() const { return std::pow(total_cost, 1.0 / q); }

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Point {
  double b = 0, d = 0;
};

double euclid2(const Point& p, const Point& r) {
  const double db = p.b - r.b, dd = p.d - r.d;
  return db * db + dd * dd;
}

double cost_pow(const Point& p, const Point& r, double q) {
  const double c2 = euclid2(p, r);
  if (q == 2.0) return c2;
  return std::pow(c2, q / 2.0);
}

double diagonal_cost_pow(const Point& p, double q) {
  const double m = diagonal_midpoint(p.b, p.d);
  return cost_pow(p, Point{m, m}, q);
}

// One augmented side of a class: the real points followed by the diagonal
// projections of the other side's points.
struct ClassSide {
  std::vector<Point> pts;       // size n_real + n_dummy
  std::vector<std::int32_t> orig;  // original diagram index per real point
  int n_real = 0;
};

struct ClassProblem {
  ClassSide left, right;
  int size() const { return static_cast<int>(left.pts.size()); }
};

// person i of `left` vs object j of `right`
double pair_cost(const ClassProblem& cp, int i, int j, double q) {
  const bool di = i >= cp.left.n_real;
  const bool dj = j >= cp.right.n_real;
  if (di && dj) return 0.0;
  return cost_pow(cp.left.pts[i], cp.right.pts[j], q);
}

// Forward auction with epsilon scaling; maximizes -cost. Prices persist
// across scaling rounds. Terminates once the duality-gap bound n*eps is
// small against the primal cost.
std::vector<int> auction_solve(int n, const ClassProblem& cp, double q) {
  std::vector<double> price(n, 0.0);
  std::vector<int> owner(n, -1), assigned(n, -1);

  double max_cost = 0.0;
  {
    double lob = kInf, hib = -kInf, lod = kInf, hid = -kInf;
    auto scan = [&](const std::vector<Point>& pts) {
      for (const Point& p : pts) {
        lob = std::min(lob, p.b);
        hib = std::max(hib, p.b);
        lod = std::min(lod, p.d);
        hid = std::max(hid, p.d);
      }
    };
    scan(cp.left.pts);
    scan(cp.right.pts);
    const double span2 = (hib - lob) * (hib - lob) + (hid - lod) * (hid - lod);
    max_cost = q == 2.0 ? span2 : std::pow(span2, q / 2.0);
  }
  double eps = max_cost > 0 ? max_cost / 4.0 : 1.0;

  for (int round = 0; round < 64; ++round) {
    std::fill(owner.begin(), owner.end(), -1);
    std::fill(assigned.begin(), assigned.end(), -1);
    std::vector<int> open(n);
    for (int i = 0; i < n; ++i) open[i] = n - 1 - i;
    while (!open.empty()) {
      const int i = open.back();
      open.pop_back();
      int best = -1;
      double v1 = -kInf, v2 = -kInf;
      for (int j = 0; j < n; ++j) {
        const double v = -pair_cost(cp, i, j, q) - price[j];
        if (v > v1) {
          v2 = v1;
          v1 = v;
          best = j;
        } else if (v > v2) {
          v2 = v;
        }
      }
      const double bump = (n == 1 ? 0.0 : v1 - v2) + eps;
      price[best] += bump;
      if (owner[best] >= 0) {
        assigned[owner[best]] = -1;
        open.push_back(owner[best]);
      }
      owner[best] = i;
      assigned[i] = best;
    }
    double primal = 0.0;
    for (int i = 0; i < n; ++i) primal += pair_cost(cp, i, assigned[i], q);
    if (primal == 0.0) break;
    if (n * eps <= 5e-3 * primal) break;
    const double floor_eps = 1e-14 * (max_cost > 0 ? max_cost : 1.0);
    if (eps <= floor_eps) break;
    eps = std::max(eps / 5.0, floor_eps);
  }
  return assigned;
}

// Shortest-augmenting-path Hungarian algorithm with potentials, O(n^3).
std::vector<int> hungarian_solve(int n, const ClassProblem& cp, double q) {
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = pair_cost(cp, i0 - 1, j - 1, q) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> assigned(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] > 0) assigned[p[j] - 1] = j - 1;
  }
  return assigned;
}

Point point_of(const PersistencePair& p) { return Point{p.birth, p.death}; }

struct ClassKey {
  int dim;
  bool finite;
  friend bool operator<(const ClassKey& a, const ClassKey& b) {
    if (a.dim != b.dim) return a.dim < b.dim;
    return a.finite < b.finite;
  }
};

std::map<ClassKey, std::vector<std::int32_t>> split_classes(const PersistenceDiagram& d) {
  std::map<ClassKey, std::vector<std::int32_t>> out;
  for (std::size_t i = 0; i < d.pairs.size(); ++i) {
    out[{d.pairs[i].dim, d.pairs[i].finite}].push_back(static_cast<std::int32_t>(i));
  }
  return out;
}

// Matches infinite generators of one class by increasing birth.
void match_infinite_class(const PersistenceDiagram& d1, const PersistenceDiagram& d2,
                          std::vector<std::int32_t> left, std::vector<std::int32_t> right,
                          double q, Assignment& out) {
  auto by_birth = [](const PersistenceDiagram& d) {
    return [&d](std::int32_t a, std::int32_t b) {
      if (d.pairs[a].birth != d.pairs[b].birth) return d.pairs[a].birth < d.pairs[b].birth;
      return d.pairs[a].birth_vertex < d.pairs[b].birth_vertex;
    };
  };
  std::sort(left.begin(), left.end(), by_birth(d1));
  std::sort(right.begin(), right.end(), by_birth(d2));
  for (std::size_t k = 0; k < left.size(); ++k) {
    out.target_of[left[k]] = PairTarget{TargetKind::Point, right[k]};
    out.source_of_target[right[k]] = left[k];
    out.total_cost += cost_pow(point_of(d1.pairs[left[k]]), point_of(d2.pairs[right[k]]), q);
  }
}

// Solves one finite class with the given square-assignment solver and
// writes the normalized matching: any point settled on a diagonal dummy is
// re-read as its own diagonal projection, which never increases the cost.
template <class Solver>
void solve_finite_class(const PersistenceDiagram& d1, const PersistenceDiagram& d2,
                        const std::vector<std::int32_t>& left,
                        const std::vector<std::int32_t>& right, double q, Solver&& solver,
                        Assignment& out) {
  ClassProblem cp;
  cp.left.n_real = static_cast<int>(left.size());
  cp.right.n_real = static_cast<int>(right.size());
  for (std::int32_t i : left) {
    cp.left.pts.push_back(point_of(d1.pairs[i]));
    cp.left.orig.push_back(i);
  }
  for (std::int32_t j : right) {
    cp.right.pts.push_back(point_of(d2.pairs[j]));
    cp.right.orig.push_back(j);
  }
  // Augmentation: append the diagonal projections of the other side.
  for (std::int32_t j : right) {
    const double m = diagonal_midpoint(d2.pairs[j].birth, d2.pairs[j].death);
    cp.left.pts.push_back(Point{m, m});
  }
  for (std::int32_t i : left) {
    const double m = diagonal_midpoint(d1.pairs[i].birth, d1.pairs[i].death);
    cp.right.pts.push_back(Point{m, m});
  }
  const int n = cp.size();
  if (n == 0) return;

  const std::vector<int> assigned = solver(n, cp, q);

  for (int i = 0; i < cp.left.n_real; ++i) {
    const int j = assigned[i];
    if (j < cp.right.n_real) {
      out.target_of[cp.left.orig[i]] = PairTarget{TargetKind::Point, cp.right.orig[j]};
      out.source_of_target[cp.right.orig[j]] = cp.left.orig[i];
      out.total_cost += cost_pow(cp.left.pts[i], cp.right.pts[j], q);
    } else {
      out.target_of[cp.left.orig[i]] = PairTarget{TargetKind::Diagonal, -1};
      out.total_cost += diagonal_cost_pow(cp.left.pts[i], q);
    }
  }
  for (int j = 0; j < cp.right.n_real; ++j) {
    if (out.source_of_target[cp.right.orig[j]] < 0) {
      out.total_cost += diagonal_cost_pow(cp.right.pts[j], q);
    }
  }
}

void check_infinite_counts(const PersistenceDiagram& d1, const PersistenceDiagram& d2) {
  for (int p = 0; p <= 3; ++p) {
    if (d1.infinite_count(p) != d2.infinite_count(p)) {
      throw StructuralError("diagrams have mismatched infinite generator counts");
    }
  }
}

template <class Solver>
std::pair<double, Assignment> assign_diagrams(const PersistenceDiagram& d1,
                                              const PersistenceDiagram& d2, double q,
                                              Solver&& solver) {
  check_infinite_counts(d1, d2);
  Assignment out;
  out.q = q;
  out.target_of.assign(d1.pairs.size(), PairTarget{});
  out.source_of_target.assign(d2.pairs.size(), -1);

  auto c1 = split_classes(d1);
  auto c2 = split_classes(d2);
  std::vector<ClassKey> keys;
  for (const auto& entry : c1) keys.push_back(entry.first);
  for (const auto& entry : c2) {
    if (!c1.count(entry.first)) keys.push_back(entry.first);
  }
  for (const ClassKey& k : keys) {
    auto& left = c1[k];
    auto& right = c2[k];
    if (k.finite) {
      solve_finite_class(d1, d2, left, right, q, solver, out);
    } else {
      match_infinite_class(d1, d2, left, right, q, out);
    }
  }
  return {out.distance(), out};
}

}  // namespace

std::pair<double, Assignment> wasserstein(const PersistenceDiagram& d1,
                                          const PersistenceDiagram& d2, double q) {
  return assign_diagrams(d1, d2, q,
                         [](int n, const ClassProblem& cp, double qq) {
                           return auction_solve(n, cp, qq);
                         });
}

std::pair<double, Assignment> exact_assignment(const PersistenceDiagram& d1,
                                               const PersistenceDiagram& d2, double q,
                                               Index max_class_size) {
  auto c1 = split_classes(d1);
  auto c2 = split_classes(d2);
  for (const auto& entry : c1) {
    if (!entry.first.finite) continue;
    const auto it = c2.find(entry.first);
    const Index other = it == c2.end() ? 0 : static_cast<Index>(it->second.size());
    if (static_cast<Index>(entry.second.size()) + other > max_class_size) {
      throw SizeGuardError("class too large for the exact assignment oracle");
    }
  }
  return assign_diagrams(d1, d2, q,
                         [](int n, const ClassProblem& cp, double qq) {
                           return hungarian_solve(n, cp, qq);
                         });
}

std::vector<StillPair> still_pairs(const PersistenceDiagram& current,
                                   const PersistenceDiagram& previous) {
  struct Key {
    int dim;
    bool finite;
    Index vb, vd;
    bool operator==(const Key& o) const {
      return dim == o.dim && finite == o.finite && vb == o.vb && vd == o.vd;
    }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::size_t h = std::hash<Index>()(k.vb * 2 + (k.finite ? 1 : 0));
      h ^= std::hash<Index>()(k.vd * 4 + k.dim) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      return h;
    }
  };
  auto key_of = [](const PersistencePair& p) {
    return Key{p.dim, p.finite, p.birth_vertex, p.death_vertex};
  };

  // A (birth vertex, death vertex) pair identifies at most one point per
  // class in a lexicographic filtration; duplicates are resolved by value
  // order and flagged in debug builds.
  std::unordered_map<Key, std::vector<std::int32_t>, KeyHash> prev_of;
  prev_of.reserve(previous.pairs.size());
  for (std::size_t i = 0; i < previous.pairs.size(); ++i) {
    prev_of[key_of(previous.pairs[i])].push_back(static_cast<std::int32_t>(i));
  }
#ifndef NDEBUG
  for (const auto& [k, v] : prev_of) assert(v.size() == 1);
#endif

  std::vector<StillPair> out;
  for (std::size_t i = 0; i < current.pairs.size(); ++i) {
    const auto it = prev_of.find(key_of(current.pairs[i]));
    if (it == prev_of.end() || it->second.empty()) continue;
    out.push_back(StillPair{static_cast<std::int32_t>(i), it->second.back()});
    it->second.pop_back();
  }
  return out;
}

std::pair<double, Assignment> update_assignment(const Assignment& prev,
                                                const PersistenceDiagram& current,
                                                const PersistenceDiagram& previous,
                                                const PersistenceDiagram& target,
                                                double q) {
  if (prev.target_of.size() != previous.pairs.size() ||
      prev.source_of_target.size() != target.pairs.size()) {
    throw StructuralError("assignment does not describe the previous diagram");
  }

  Assignment out;
  out.q = q;
  out.target_of.assign(current.pairs.size(), PairTarget{TargetKind::Diagonal, -1});
  out.source_of_target.assign(target.pairs.size(), -1);

  std::vector<char> inherited(current.pairs.size(), 0);
  std::vector<char> consumed(target.pairs.size(), 0);
  for (const StillPair& sp : still_pairs(current, previous)) {
    const PairTarget t = prev.target_of[sp.previous];
    out.target_of[sp.current] = t;
    inherited[sp.current] = 1;
    if (t.kind == TargetKind::Point) {
      out.source_of_target[t.index] = sp.current;
      consumed[t.index] = 1;
    }
  }

  // Reduced problem: non-still points against unconsumed targets.
  PersistenceDiagram reduced, reduced_target;
  std::vector<std::int32_t> red_idx, red_target_idx;
  for (std::size_t i = 0; i < current.pairs.size(); ++i) {
    if (!inherited[i]) {
      reduced.pairs.push_back(current.pairs[i]);
      red_idx.push_back(static_cast<std::int32_t>(i));
    }
  }
  for (std::size_t t = 0; t < target.pairs.size(); ++t) {
    if (!consumed[t]) {
      reduced_target.pairs.push_back(target.pairs[t]);
      red_target_idx.push_back(static_cast<std::int32_t>(t));
    }
  }

  if (!reduced_target.pairs.empty()) {
    auto [dist, red] = wasserstein(reduced, reduced_target, q);
    (void)dist;
    for (std::size_t k = 0; k < red.target_of.size(); ++k) {
      PairTarget t = red.target_of[k];
      if (t.kind == TargetKind::Point) t.index = red_target_idx[t.index];
      out.target_of[red_idx[k]] = t;
      if (t.kind == TargetKind::Point) out.source_of_target[t.index] = red_idx[k];
    }
  }
  // With an empty reduced target every reduced point keeps the default
  // diagonal projection; no optimization runs.

  // Total cost from the current coordinates.
  double total = 0.0;
  for (std::size_t i = 0; i < current.pairs.size(); ++i) {
    const Point p = point_of(current.pairs[i]);
    const PairTarget t = out.target_of[i];
    if (t.kind == TargetKind::Point) {
      total += cost_pow(p, point_of(target.pairs[t.index]), q);
    } else {
      total += diagonal_cost_pow(p, q);
    }
  }
  for (std::size_t t = 0; t < target.pairs.size(); ++t) {
    if (out.source_of_target[t] < 0) {
      total += diagonal_cost_pow(point_of(target.pairs[t]), q);
    }
  }
  out.total_cost = total;
  return {total, out};
}

}  // namespace topo
