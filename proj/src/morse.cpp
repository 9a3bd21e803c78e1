#include "topo/morse.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <unordered_map>

namespace topo {

namespace {

// Saturating count of V-paths from each 1-cell down to the target
// critical 1-cell: 0, 1, or 2 (meaning "two or more").
struct PathCounter {
  const GridComplex& K;
  const DiscreteGradient& g;
  Index target;
  std::unordered_map<Index, int> memo;

  int count(Index edge_id) {
    std::vector<Index> stack{edge_id};
    std::array<SimplexRef, 4> fac;
    while (!stack.empty()) {
      const Index e = stack.back();
      if (memo.count(e)) {
        stack.pop_back();
        continue;
      }
      const SimplexRef er{1, e};
      if (e == target) {
        memo.emplace(e, 1);
        stack.pop_back();
        continue;
      }
      if (g.is_critical(er) || g.is_paired_down(er)) {
        memo.emplace(e, 0);
        stack.pop_back();
        continue;
      }
      const SimplexRef c = g.partner(er);
      int nf = 0;
      K.facets(c, fac, nf);
      bool ready = true;
      for (int k = 0; k < nf; ++k) {
        if (fac[k].id == e) continue;
        if (!memo.count(fac[k].id)) {
          ready = false;
          stack.push_back(fac[k].id);
        }
      }
      if (!ready) continue;
      int total = 0;
      for (int k = 0; k < nf; ++k) {
        if (fac[k].id == e) continue;
        total += memo.at(fac[k].id);
      }
      memo.emplace(e, std::min(total, 2));
      stack.pop_back();
    }
    return memo.at(edge_id);
  }
};

}  // namespace

std::optional<VPath> saddle_connector(const GridComplex& K, const DiscreteGradient& g,
                                      const PersistencePair& pair) {
  if (K.dimension() != 3 || !pair.finite || pair.dim != 1) {
    throw StructuralError("saddle connectors require a finite saddle pair of a 3D gradient");
  }
  const SimplexRef birth = pair.birth_simplex;
  const SimplexRef death = pair.death_simplex;
  if (!g.is_critical(birth) || !g.is_critical(death)) return std::nullopt;

  PathCounter counter{K, g, birth.id, {}};
  std::array<SimplexRef, 4> fac;
  int nf = 0;
  K.facets(death, fac, nf);
  int total = 0;
  for (int k = 0; k < nf; ++k) total += counter.count(fac[k].id);
  if (total != 1) return std::nullopt;

  VPath path;
  path.cells.push_back(death);
  Index e = -1;
  for (int k = 0; k < nf; ++k) {
    if (counter.count(fac[k].id) == 1) e = fac[k].id;
  }
  path.cells.push_back(SimplexRef{1, e});
  while (e != birth.id) {
    const SimplexRef c = g.partner(SimplexRef{1, e});
    path.cells.push_back(c);
    K.facets(c, fac, nf);
    Index next = -1;
    for (int k = 0; k < nf; ++k) {
      if (fac[k].id != e && counter.count(fac[k].id) >= 1) next = fac[k].id;
    }
    assert(next >= 0);
    path.cells.push_back(SimplexRef{1, next});
    e = next;
  }
  return path;
}

namespace {

// Cycle check of the (1,2) V-path digraph seeded at the given 1-cells;
// a new cycle must pass through a reversed vector.
bool has_cycle_from(const GridComplex& K, const DiscreteGradient& g,
                    const std::vector<Index>& seeds) {
  std::unordered_map<Index, std::uint8_t> color;  // 1 gray, 2 black
  std::vector<Index> stack;
  std::array<SimplexRef, 4> fac;
  for (Index root : seeds) {
    if (color.count(root)) continue;
    if (!g.is_paired_up(SimplexRef{1, root})) continue;
    stack.push_back(root);
    while (!stack.empty()) {
      const Index id = stack.back();
      auto& c = color[id];
      if (c == 0) {
        c = 1;
        const SimplexRef partner = g.partner(SimplexRef{1, id});
        int nf = 0;
        K.facets(partner, fac, nf);
        for (int k = 0; k < nf; ++k) {
          if (fac[k].id == id) continue;
          if (!g.is_paired_up(fac[k])) continue;
          const auto it = color.find(fac[k].id);
          if (it != color.end() && it->second == 1) return true;
          if (it == color.end()) stack.push_back(fac[k].id);
        }
      } else {
        c = 2;
        stack.pop_back();
      }
    }
  }
  return false;
}

}  // namespace

bool reverse_connector(const GridComplex& K, DiscreteGradient& g, const VPath& path) {
  if (path.cells.size() < 2 || path.cells.size() % 2 != 0) {
    throw StructuralError("not a saddle connector");
  }
  // path = [death, e0, c1, e1, ..., cm, em=birth]
  struct Saved {
    SimplexRef ref;
    Index entry;
  };
  std::vector<Saved> saved;
  std::vector<Index> touched_edges;
  for (const SimplexRef& s : path.cells) {
    saved.push_back({s, g.entry(s)});
    if (s.dim == 1) touched_edges.push_back(s.id);
  }
  for (std::size_t k = 0; k + 1 < path.cells.size(); k += 2) {
    const SimplexRef high = path.cells[k];
    const SimplexRef low = path.cells[k + 1];
    g.set_pair(low, high);
  }
  if (has_cycle_from(K, g, touched_edges)) {
    for (const Saved& s : saved) g.set_raw(s.ref, s.entry);
    return false;
  }
  return true;
}

void SkipHistogram::add_skip(double persistence) {
  ++skipped;
  if (bin_edges.size() < 2) return;
  const double lo = bin_edges.front(), hi = bin_edges.back();
  const int bins = static_cast<int>(counts.size());
  int b = hi > lo ? static_cast<int>((persistence - lo) / (hi - lo) * bins) : 0;
  b = std::clamp(b, 0, bins - 1);
  ++counts[b];
}

SkipHistogram cancel_saddle_pairs(const GridComplex& K, DiscreteGradient& g,
                                  const std::vector<PersistencePair>& pairs,
                                  double histogram_range, int bins) {
  SkipHistogram hist;
  hist.bin_edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b) {
    hist.bin_edges[b] = histogram_range * double(b) / double(bins);
  }
  hist.counts.assign(bins, 0);

  std::vector<PersistencePair> sorted;
  for (const auto& p : pairs) {
    if (p.finite && p.dim == 1 && K.dimension() == 3) sorted.push_back(p);
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const PersistencePair& a, const PersistencePair& b) {
              if (a.persistence() != b.persistence()) return a.persistence() < b.persistence();
              if (a.birth_vertex != b.birth_vertex) return a.birth_vertex < b.birth_vertex;
              return a.death_vertex < b.death_vertex;
            });

  for (const auto& p : sorted) {
    ++hist.processed;
    const auto path = saddle_connector(K, g, p);
    if (!path) {
      hist.add_skip(p.persistence());
      continue;
    }
    if (reverse_connector(K, g, *path)) {
      ++hist.cancelled;
    } else {
      hist.add_skip(p.persistence());
    }
  }
  assert(hist.skipped == hist.processed - hist.cancelled);
  return hist;
}

namespace {

std::array<double, 3> barycenter(const GridComplex& K, SimplexRef s) {
  std::array<Index, 4> verts;
  int n = 0;
  K.simplex_vertices(s, verts, n);
  std::array<double, 3> c{0, 0, 0};
  for (int i = 0; i < n; ++i) {
    const auto xyz = K.coords_of(verts[i]);
    for (int a = 0; a < 3; ++a) c[a] += double(xyz[a]);
  }
  for (int a = 0; a < 3; ++a) c[a] /= double(n);
  return c;
}

}  // namespace

std::vector<Filament> extract_filaments(const GridComplex& K, const ScalarField& field,
                                        const DiscreteGradient& g, double min_value) {
  if (K.dimension() != 3) {
    throw InputError("filament extraction requires a 3D field");
  }
  std::vector<Filament> out;
  std::array<SimplexRef, GridComplex::kMaxCofacets> cof;
  std::array<Index, 4> verts;
  K.for_each_simplex(2, [&](SimplexRef s) {
    if (!g.is_critical(s)) return;
    int nv = 0;
    K.simplex_vertices(s, verts, nv);
    double lowest = field.values[verts[0]];
    for (int i = 1; i < nv; ++i) lowest = std::min(lowest, field.values[verts[i]]);
    if (lowest < min_value) return;

    int nc = 0;
    K.cofacets(s, cof, nc);
    for (int k = 0; k < nc; ++k) {
      Filament fil;
      fil.saddle = s;
      fil.points.push_back(barycenter(K, s));
      SimplexRef c = cof[k];
      for (;;) {
        fil.points.push_back(barycenter(K, c));
        if (g.is_critical(c)) {
          fil.maximum = c;
          break;
        }
        const SimplexRef tau = g.partner(c);
        fil.points.push_back(barycenter(K, tau));
        int ncc = 0;
        std::array<SimplexRef, GridComplex::kMaxCofacets> cc;
        K.cofacets(tau, cc, ncc);
        SimplexRef next{-1, -1};
        for (int m = 0; m < ncc; ++m) {
          if (!(cc[m] == c)) next = cc[m];
        }
        if (!next.valid()) break;  // boundary exit
        c = next;
      }
      out.push_back(std::move(fil));
    }
  });
  return out;
}

}  // namespace topo
