#include "topo/gradient.hpp"

#include <algorithm>
#include <cassert>

#include "topo/parallel.hpp"

namespace topo {

DiscreteGradient::DiscreteGradient(const GridComplex& K) {
  for (int p = 0; p <= K.dimension(); ++p) {
    cells_[p].assign(K.id_bound(p), kUnset);
  }
}

namespace {

// Binary search for a simplex among the star cells of one dimension.
std::int32_t local_index(const std::vector<LowerStarScratch::Cell>& cells,
                         const std::vector<std::int32_t>& by_id, SimplexRef s) {
  auto cmp = [&cells](std::int32_t i, const SimplexRef& ref) {
    const SimplexRef& a = cells[i].ref;
    if (a.dim != ref.dim) return a.dim < ref.dim;
    return a.id < ref.id;
  };
  const auto it = std::lower_bound(by_id.begin(), by_id.end(), s, cmp);
  if (it == by_id.end() || !(cells[*it].ref == s)) return -1;
  return *it;
}

}  // namespace

void process_lower_star(const GridComplex& K, const VertexOrder& order, Index v,
                        LowerStarScratch& scratch, DiscreteGradient& g) {
  auto& cells = scratch.cells;
  K.lower_star(v, order, scratch.star);
  cells.clear();
  cells.resize(scratch.star.size());

  std::int32_t v_local = -1;
  for (std::size_t i = 0; i < scratch.star.size(); ++i) {
    cells[i].ref = scratch.star[i];
    cells[i].key = K.key(scratch.star[i], order);
    cells[i].state = 0;
    cells[i].nfacets = 0;
    cells[i].cofacet_local.clear();
    if (scratch.star[i].dim == 0) v_local = static_cast<std::int32_t>(i);
  }

  // Index the star by (dim, id) for facet/cofacet resolution.
  std::vector<std::int32_t> by_id(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) by_id[i] = static_cast<std::int32_t>(i);
  std::sort(by_id.begin(), by_id.end(), [&cells](std::int32_t a, std::int32_t b) {
    const SimplexRef& x = cells[a].ref;
    const SimplexRef& y = cells[b].ref;
    if (x.dim != y.dim) return x.dim < y.dim;
    return x.id < y.id;
  });

  std::array<SimplexRef, 4> fac;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].ref.dim == 0) continue;
    int nf = 0;
    K.facets(cells[i].ref, fac, nf);
    for (int k = 0; k < nf; ++k) {
      const std::int32_t loc = local_index(cells, by_id, fac[k]);
      if (loc >= 0) {
        cells[i].facet_local[cells[i].nfacets++] = loc;
        cells[loc].cofacet_local.push_back(static_cast<std::int32_t>(i));
      }
    }
  }

  assert(v_local >= 0);

  // Local minimum of its star: critical vertex.
  std::int32_t delta = -1;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].ref.dim != 1) continue;
    if (delta < 0 || cells[i].key < cells[delta].key) delta = static_cast<std::int32_t>(i);
  }
  if (delta < 0) {
    g.set_critical(cells[v_local].ref);
    return;
  }

  auto unpaired_facets = [&](std::int32_t c) {
    int n = 0;
    for (int k = 0; k < cells[c].nfacets; ++k) {
      if (cells[cells[c].facet_local[k]].state == 0) ++n;
    }
    return n;
  };

  auto& pq_zero = scratch.heap_zero;
  auto& pq_one = scratch.heap_one;
  pq_zero.clear();
  pq_one.clear();
  auto heap_cmp = [&cells](std::int32_t a, std::int32_t b) {
    return cells[b].key < cells[a].key;  // min-heap
  };
  auto push = [&](std::vector<std::int32_t>& h, std::int32_t c) {
    h.push_back(c);
    std::push_heap(h.begin(), h.end(), heap_cmp);
  };
  auto pop = [&](std::vector<std::int32_t>& h) {
    std::pop_heap(h.begin(), h.end(), heap_cmp);
    const std::int32_t c = h.back();
    h.pop_back();
    return c;
  };

  // After any pairing or critical event, cofacets with exactly one
  // unpaired facet left become pairable.
  auto trigger = [&](std::int32_t c) {
    for (std::int32_t co : cells[c].cofacet_local) {
      if (cells[co].state == 0 && unpaired_facets(co) == 1) push(pq_one, co);
    }
  };

  cells[v_local].state = 1;
  cells[delta].state = 1;
  g.set_pair(cells[v_local].ref, cells[delta].ref);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].ref.dim == 1 && static_cast<std::int32_t>(i) != delta) {
      push(pq_zero, static_cast<std::int32_t>(i));
    }
  }
  trigger(v_local);
  trigger(delta);

  for (;;) {
    while (!pq_one.empty()) {
      const std::int32_t a = pop(pq_one);
      if (cells[a].state != 0) continue;
      const int n = unpaired_facets(a);
      if (n == 0) {
        push(pq_zero, a);
        continue;
      }
      if (n != 1) continue;  // stale entry
      std::int32_t lam = -1;
      for (int k = 0; k < cells[a].nfacets; ++k) {
        if (cells[cells[a].facet_local[k]].state == 0) lam = cells[a].facet_local[k];
      }
      cells[lam].state = 1;
      cells[a].state = 1;
      g.set_pair(cells[lam].ref, cells[a].ref);
      trigger(lam);
      trigger(a);
    }
    std::int32_t gamma = -1;
    while (!pq_zero.empty()) {
      const std::int32_t c = pop(pq_zero);
      if (cells[c].state == 0) {
        gamma = c;
        break;
      }
    }
    if (gamma < 0) break;
    cells[gamma].state = 2;
    g.set_critical(cells[gamma].ref);
    trigger(gamma);
  }

#ifndef NDEBUG
  for (const auto& c : cells) assert(c.state != 0);
#endif
}

DiscreteGradient build_gradient(const GridComplex& K, const ScalarField& field,
                                const VertexOrder& order) {
  validate_field(field);
  DiscreteGradient g(K);
  parallel_for(K.vertex_count(), [&](Index v) {
    thread_local LowerStarScratch scratch;
    process_lower_star(K, order, v, scratch, g);
  });
  return g;
}

namespace {

// Cycle detection over the V-path digraph of dimension pair (p, p+1):
// from a p-cell paired up, step to the other paired-up facets of its
// partner. Iterative tricolor DFS.
std::optional<GradientViolation> check_acyclic(const GridComplex& K,
                                               const DiscreteGradient& g, int p) {
  const Index bound = K.id_bound(p);
  std::vector<std::uint8_t> color(bound, 0);  // 0 white, 1 gray, 2 black
  std::vector<Index> stack;
  std::array<SimplexRef, 4> fac;
  for (Index root = 0; root < bound; ++root) {
    if (color[root] != 0) continue;
    const SimplexRef r{p, root};
    if (!K.is_valid(r) || !g.is_paired_up(r)) {
      color[root] = 2;
      continue;
    }
    stack.push_back(root);
    while (!stack.empty()) {
      const Index id = stack.back();
      const SimplexRef s{p, id};
      if (color[id] == 0) {
        color[id] = 1;
        const SimplexRef c = g.partner(s);
        int nf = 0;
        K.facets(c, fac, nf);
        for (int k = 0; k < nf; ++k) {
          if (fac[k].id == id) continue;
          if (!g.is_paired_up(fac[k])) continue;
          if (color[fac[k].id] == 1) {
            return GradientViolation{"V-path cycle", s, fac[k]};
          }
          if (color[fac[k].id] == 0) stack.push_back(fac[k].id);
        }
      } else {
        color[id] = 2;
        stack.pop_back();
      }
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<GradientViolation> validate_gradient(const GridComplex& K,
                                                   const DiscreteGradient& g) {
  for (int p = 0; p <= K.dimension(); ++p) {
    std::optional<GradientViolation> bad;
    K.for_each_simplex(p, [&](SimplexRef s) {
      if (bad) return;
      const Index e = g.entry(s);
      if (e == DiscreteGradient::kUnset) {
        bad = GradientViolation{"unset simplex", s, {}};
        return;
      }
      if (e == DiscreteGradient::kCritical) return;
      const SimplexRef t = g.partner(s);
      if (t.dim < 0 || t.dim > K.dimension() || !K.is_valid(t)) {
        bad = GradientViolation{"partner out of range", s, t};
        return;
      }
      if (!g.is_paired(t) || !(g.partner(t) == s)) {
        bad = GradientViolation{"pairing is not an involution", s, t};
        return;
      }
      if (g.is_paired_up(s) == g.is_paired_up(t)) {
        bad = GradientViolation{"pair direction mismatch", s, t};
        return;
      }
    });
    if (bad) return bad;
  }
  for (int p = 0; p < K.dimension(); ++p) {
    if (auto bad = check_acyclic(K, g, p)) return bad;
  }
  return std::nullopt;
}

DiscreteGradient update_gradient(const GridComplex& K, const DiscreteGradient& prev,
                                 const ScalarField& fieldNew, const VertexOrder& orderNew,
                                 const UpdatedVertexSet& updated) {
  DiscreteGradient g = prev;
  const std::vector<Index> affected = K.cell_neighborhood(updated);
  parallel_for(static_cast<Index>(affected.size()), [&](Index i) {
    thread_local LowerStarScratch scratch;
    process_lower_star(K, orderNew, affected[i], scratch, g);
  });
#ifndef NDEBUG
  // A stale updated set silently corrupts the pairing; catch it in debug.
  assert(g == build_gradient(K, fieldNew, orderNew));
#else
  (void)fieldNew;
#endif
  return g;
}

}  // namespace topo
