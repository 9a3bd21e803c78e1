#include "topo/persistence.hpp"

#include <algorithm>
#include <cassert>
#include <unordered_map>

namespace topo {

Index PersistenceDiagram::finite_count(int dim) const {
  Index n = 0;
  for (const auto& p : pairs) n += (p.dim == dim && p.finite) ? 1 : 0;
  return n;
}

Index PersistenceDiagram::infinite_count(int dim) const {
  Index n = 0;
  for (const auto& p : pairs) n += (p.dim == dim && !p.finite) ? 1 : 0;
  return n;
}

namespace {

struct UnionFind {
  std::vector<std::int32_t> parent;
  std::vector<Index> birth;  // representative birth cell per root

  std::int32_t add(Index birth_cell) {
    parent.push_back(static_cast<std::int32_t>(parent.size()));
    birth.push_back(birth_cell);
    return parent.back();
  }
  std::int32_t find(std::int32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::int32_t a, std::int32_t b, Index surviving_birth) {
    parent[a] = b;
    birth[b] = surviving_birth;
  }
};

// Descending V-path from a vertex down to its critical minimum.
Index descend_to_critical_vertex(const GridComplex& K, const DiscreteGradient& g, Index v) {
  std::array<Index, 4> verts;
  int n = 0;
  for (;;) {
    const SimplexRef vr{0, v};
    if (g.is_critical(vr)) return v;
    const SimplexRef e = g.partner(vr);
    K.simplex_vertices(e, verts, n);
    v = verts[0] == v ? verts[1] : verts[0];
  }
}

// Ascending dual walk from a d-cell up to its critical d-cell; returns an
// invalid ref when the walk exits through the domain boundary.
SimplexRef ascend_to_critical_top_cell(const GridComplex& K, const DiscreteGradient& g,
                                       SimplexRef c) {
  std::array<SimplexRef, GridComplex::kMaxCofacets> cof;
  int nc = 0;
  for (;;) {
    if (g.is_critical(c)) return c;
    const SimplexRef tau = g.partner(c);  // paired facet
    K.cofacets(tau, cof, nc);
    SimplexRef next{-1, -1};
    for (int k = 0; k < nc; ++k) {
      if (!(cof[k] == c)) next = cof[k];
    }
    if (!next.valid()) return SimplexRef{};  // boundary exit
    c = next;
  }
}

struct CriticalCell {
  SimplexRef ref;
  SimplexKey key;
};

std::vector<CriticalCell> collect_criticals(const GridComplex& K, const VertexOrder& order,
                                            const DiscreteGradient& g, int p) {
  std::vector<CriticalCell> out;
  K.for_each_simplex(p, [&](SimplexRef s) {
    if (g.is_critical(s)) out.push_back({s, K.key(s, order)});
  });
  std::sort(out.begin(), out.end(),
            [](const CriticalCell& a, const CriticalCell& b) { return a.key < b.key; });
  return out;
}

// Sorted XOR accumulator for mod-2 chains.
void xor_into(std::vector<std::int32_t>& acc, const std::vector<std::int32_t>& other,
              std::vector<std::int32_t>& scratch) {
  scratch.clear();
  std::set_symmetric_difference(acc.begin(), acc.end(), other.begin(), other.end(),
                                std::back_inserter(scratch));
  acc.swap(scratch);
}

}  // namespace

PersistenceDiagram pair_critical_cells(const GridComplex& K, const ScalarField& field,
                                       const VertexOrder& order, const DiscreteGradient& g) {
  const int d = K.dimension();
  const Vec& f = field.values;
  PersistenceDiagram out;

  struct RawPair {
    int dim;
    SimplexRef birth, death;
  };
  std::vector<RawPair> raw;
  std::vector<SimplexRef> infinite;

  std::array<std::vector<CriticalCell>, 4> criticals;
  for (int p = 0; p <= d; ++p) {
    criticals[p] = collect_criticals(K, order, g, p);
    out.critical_count[p] = static_cast<Index>(criticals[p].size());
  }

  // Consumption flags, per dimension, keyed by simplex id.
  std::array<std::unordered_map<Index, bool>, 4> consumed;

  // Dimension 0: sweep critical edges upward; a merge kills the younger
  // component (Elder rule).
  {
    UnionFind uf;
    std::unordered_map<Index, std::int32_t> node_of;  // critical vertex -> uf node
    node_of.reserve(criticals[0].size());
    for (const auto& c : criticals[0]) node_of.emplace(c.ref.id, uf.add(c.ref.id));
    std::array<Index, 4> verts;
    int nfv = 0;
    for (const auto& ce : criticals[1]) {
      K.simplex_vertices(ce.ref, verts, nfv);
      const Index r0 = descend_to_critical_vertex(K, g, verts[0]);
      const Index r1 = descend_to_critical_vertex(K, g, verts[1]);
      std::int32_t a = uf.find(node_of.at(r0));
      std::int32_t b = uf.find(node_of.at(r1));
      if (a == b) continue;  // candidate 1-cycle birth
      Index ba = uf.birth[a], bb = uf.birth[b];
      // Younger birth = larger rank.
      if (order.rank[ba] < order.rank[bb]) {
        std::swap(a, b);
        std::swap(ba, bb);
      }
      raw.push_back({0, SimplexRef{0, ba}, ce.ref});
      consumed[1][ce.ref.id] = true;
      uf.unite(a, b, bb);
    }
    // Surviving roots: infinite 0-dimensional generators.
    std::vector<Index> roots;
    for (auto& [vid, node] : node_of) {
      const std::int32_t r = uf.find(node);
      (void)vid;
      if (std::find(roots.begin(), roots.end(), r) == roots.end()) roots.push_back(r);
    }
    for (std::int32_t r : roots) infinite.push_back(SimplexRef{0, uf.birth[r]});
  }

  // Dimension d-1: symmetric dual sweep downward over critical d- and
  // (d-1)-cells; the virtual outside component is the eldest.
  if (d >= 2) {
    std::vector<std::pair<SimplexKey, SimplexRef>> events;
    for (const auto& c : criticals[d]) events.push_back({c.key, c.ref});
    for (const auto& c : criticals[d - 1]) events.push_back({c.key, c.ref});
    std::sort(events.begin(), events.end(),
              [](const auto& a, const auto& b) { return b.first < a.first; });

    UnionFind uf;
    const std::int32_t outside = uf.add(-1);
    std::unordered_map<Index, std::int32_t> node_of;  // critical d-cell -> node
    std::unordered_map<Index, SimplexKey> key_of;     // birth keys for age order
    auto node_of_cell = [&](SimplexRef t) {
      auto it = node_of.find(t.id);
      if (it == node_of.end()) {
        it = node_of.emplace(t.id, uf.add(t.id)).first;
        key_of.emplace(t.id, K.key(t, order));
      }
      return it->second;
    };

    std::array<SimplexRef, GridComplex::kMaxCofacets> cof;
    int nc = 0;
    for (const auto& [key, ref] : events) {
      (void)key;
      if (ref.dim == d) {
        node_of_cell(ref);
        continue;
      }
      K.cofacets(ref, cof, nc);
      std::array<std::int32_t, 2> side{outside, outside};
      assert(nc >= 1 && nc <= 2);
      for (int k = 0; k < nc; ++k) {
        const SimplexRef top = ascend_to_critical_top_cell(K, g, cof[k]);
        side[k] = top.valid() ? uf.find(node_of_cell(top)) : outside;
      }
      std::int32_t a = uf.find(side[0]);
      std::int32_t b = uf.find(side[1]);
      if (a == b) continue;  // left for the intermediate phase
      // Older component: outside, else the larger birth key.
      auto is_elder = [&](std::int32_t x, std::int32_t y) {
        if (x == outside) return true;
        if (y == outside) return false;
        return key_of.at(uf.birth[y]) < key_of.at(uf.birth[x]);
      };
      if (!is_elder(a, b)) std::swap(a, b);
      const Index dying = uf.birth[b];
      raw.push_back({d - 1, ref, SimplexRef{d, dying}});
      consumed[d - 1][ref.id] = true;
      consumed[d][dying] = true;
      uf.unite(b, a, uf.birth[a]);
    }
  }

  // Intermediate saddle pairs (3D only): column reduction of the Morse
  // boundary over the critical 1-cells, columns in filtration order.
  if (d == 3) {
    std::unordered_map<Index, std::int32_t> row_of;  // critical edge -> row rank
    for (std::size_t i = 0; i < criticals[1].size(); ++i) {
      row_of.emplace(criticals[1][i].ref.id, static_cast<std::int32_t>(i));
    }

    // Memoized mod-2 chain of critical edges reached by descending V-paths.
    std::unordered_map<Index, std::vector<std::int32_t>> memo;
    std::vector<std::int32_t> scratch;
    std::array<SimplexRef, 4> fac;
    auto chain_of = [&](Index edge_id) -> const std::vector<std::int32_t>& {
      std::vector<Index> stack{edge_id};
      while (!stack.empty()) {
        const Index e = stack.back();
        if (memo.count(e)) {
          stack.pop_back();
          continue;
        }
        const SimplexRef er{1, e};
        if (g.is_critical(er)) {
          memo.emplace(e, std::vector<std::int32_t>{row_of.at(e)});
          stack.pop_back();
          continue;
        }
        if (g.is_paired_down(er)) {
          memo.emplace(e, std::vector<std::int32_t>{});
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
        std::vector<std::int32_t> acc;
        for (int k = 0; k < nf; ++k) {
          if (fac[k].id == e) continue;
          xor_into(acc, memo.at(fac[k].id), scratch);
        }
        memo.emplace(e, std::move(acc));
        stack.pop_back();
      }
      return memo.at(edge_id);
    };

    std::unordered_map<std::int32_t, std::int32_t> low_owner;  // row -> column index
    std::vector<std::vector<std::int32_t>> columns;
    std::vector<SimplexRef> column_cell;
    std::array<SimplexRef, 4> fac2;
    for (const auto& ct : criticals[2]) {
      if (consumed[2].count(ct.ref.id)) continue;  // cleared: consumed as a 2-cycle birth
      std::vector<std::int32_t> col;
      int nf = 0;
      K.facets(ct.ref, fac2, nf);
      for (int k = 0; k < nf; ++k) xor_into(col, chain_of(fac2[k].id), scratch);
      while (!col.empty()) {
        const std::int32_t low = col.back();
        const auto it = low_owner.find(low);
        if (it == low_owner.end()) break;
        xor_into(col, columns[it->second], scratch);
      }
      if (col.empty()) {
        // An unkilled 2-cycle birth; cannot occur on a full grid.
        infinite.push_back(ct.ref);
        consumed[2][ct.ref.id] = true;
        continue;
      }
      const std::int32_t low = col.back();
      low_owner.emplace(low, static_cast<std::int32_t>(columns.size()));
      columns.push_back(std::move(col));
      column_cell.push_back(ct.ref);
      const SimplexRef birth_edge = criticals[1][low].ref;
      raw.push_back({1, birth_edge, ct.ref});
      consumed[1][birth_edge.id] = true;
      consumed[2][ct.ref.id] = true;
    }
  }

  // Any critical cell never consumed by a pair marks an infinite
  // generator. On full grids only the dimension-0 roots occur.
  for (int p = 1; p <= d; ++p) {
    for (const auto& c : criticals[p]) {
      if (!consumed[p].count(c.ref.id)) infinite.push_back(c.ref);
    }
  }

  // Assemble: convention coordinates, zero-persistence filtering.
  const Index vmax = order.last_vertex();
  for (const auto& rp : raw) {
    const Index vb = K.max_vertex(rp.birth, order);
    const Index vd = K.max_vertex(rp.death, order);
    if (vb == vd) {
      ++out.zero_persistence_pairs;
      continue;
    }
    PersistencePair pp;
    pp.dim = rp.dim;
    pp.birth_simplex = rp.birth;
    pp.death_simplex = rp.death;
    pp.birth_vertex = vb;
    pp.death_vertex = vd;
    pp.birth = f[vb];
    pp.death = f[vd];
    pp.finite = true;
    out.pairs.push_back(pp);
  }
  for (const auto& bs : infinite) {
    PersistencePair pp;
    pp.dim = bs.dim;
    pp.birth_simplex = bs;
    pp.death_simplex = SimplexRef{};
    pp.birth_vertex = K.max_vertex(bs, order);
    pp.death_vertex = vmax;
    pp.birth = f[pp.birth_vertex];
    pp.death = f[vmax];
    pp.finite = false;
    out.pairs.push_back(pp);
  }
  std::sort(out.pairs.begin(), out.pairs.end(),
            [](const PersistencePair& a, const PersistencePair& b) {
              if (a.dim != b.dim) return a.dim < b.dim;
              if (a.finite != b.finite) return a.finite && !b.finite;
              if (a.birth != b.birth) return a.birth < b.birth;
              if (a.death != b.death) return a.death < b.death;
              if (a.birth_vertex != b.birth_vertex) return a.birth_vertex < b.birth_vertex;
              return a.death_vertex < b.death_vertex;
            });
  return out;
}

DiagramResult compute_diagram(const GridComplex& K, const ScalarField& field) {
  DiagramResult res;
  res.order = build_vertex_order(field);
  res.gradient = build_gradient(K, field, res.order);
  res.diagram = pair_critical_cells(K, field, res.order, res.gradient);
  return res;
}

DiagramResult update_diagram(const GridComplex& K, const DiscreteGradient& prev,
                             const ScalarField& fieldNew, const UpdatedVertexSet& updated) {
  DiagramResult res;
  res.order = build_vertex_order(fieldNew);
  res.gradient = update_gradient(K, prev, fieldNew, res.order, updated);
  res.diagram = pair_critical_cells(K, fieldNew, res.order, res.gradient);
  return res;
}

PersistenceDiagram brute_force_diagram(const GridComplex& K, const ScalarField& field,
                                       Index max_simplices) {
  const Index total = K.total_simplex_count();
  if (total > max_simplices) {
    throw SizeGuardError("complex too large for the brute-force oracle");
  }
  const VertexOrder order = build_vertex_order(field);
  const Vec& f = field.values;
  const int d = K.dimension();

  struct Cell {
    SimplexRef ref;
    SimplexKey key;
  };
  std::vector<Cell> cells;
  cells.reserve(total);
  for (int p = 0; p <= d; ++p) {
    K.for_each_simplex(p, [&](SimplexRef s) { cells.push_back({s, K.key(s, order)}); });
  }
  std::sort(cells.begin(), cells.end(),
            [](const Cell& a, const Cell& b) { return a.key < b.key; });

  std::unordered_map<Index, std::int32_t> pos;  // packed (dim,id) -> filtration position
  pos.reserve(cells.size());
  auto packed = [](SimplexRef s) { return s.id * 4 + s.dim; };
  for (std::size_t i = 0; i < cells.size(); ++i) {
    pos.emplace(packed(cells[i].ref), static_cast<std::int32_t>(i));
  }

  std::vector<std::int32_t> low_owner(cells.size(), -1);
  std::vector<std::vector<std::int32_t>> reduced(cells.size());
  std::vector<std::int8_t> is_death(cells.size(), 0);
  std::vector<std::int8_t> killed(cells.size(), 0);

  struct RawPair {
    std::int32_t birth, death;
  };
  std::vector<RawPair> raw;
  std::vector<std::int32_t> scratch;
  std::array<SimplexRef, 4> fac;

  for (std::size_t j = 0; j < cells.size(); ++j) {
    if (cells[j].ref.dim == 0) continue;
    std::vector<std::int32_t> col;
    int nf = 0;
    K.facets(cells[j].ref, fac, nf);
    for (int k = 0; k < nf; ++k) {
      const std::int32_t p = pos.at(packed(fac[k]));
      auto it = std::lower_bound(col.begin(), col.end(), p);
      col.insert(it, p);
    }
    while (!col.empty() && low_owner[col.back()] >= 0) {
      xor_into(col, reduced[low_owner[col.back()]], scratch);
    }
    if (col.empty()) continue;
    const std::int32_t low = col.back();
    low_owner[low] = static_cast<std::int32_t>(j);
    reduced[j] = std::move(col);
    is_death[j] = 1;
    killed[low] = 1;
    raw.push_back({low, static_cast<std::int32_t>(j)});
  }

  PersistenceDiagram out;
  const Index vmax = order.last_vertex();
  for (const auto& rp : raw) {
    const SimplexRef bs = cells[rp.birth].ref;
    const SimplexRef ds = cells[rp.death].ref;
    const Index vb = K.max_vertex(bs, order);
    const Index vd = K.max_vertex(ds, order);
    if (vb == vd) {
      ++out.zero_persistence_pairs;
      continue;
    }
    PersistencePair pp;
    pp.dim = bs.dim;
    pp.birth_simplex = bs;
    pp.death_simplex = ds;
    pp.birth_vertex = vb;
    pp.death_vertex = vd;
    pp.birth = f[vb];
    pp.death = f[vd];
    pp.finite = true;
    out.pairs.push_back(pp);
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (is_death[i] || killed[i]) continue;
    PersistencePair pp;
    pp.dim = cells[i].ref.dim;
    pp.birth_simplex = cells[i].ref;
    pp.death_simplex = SimplexRef{};
    pp.birth_vertex = K.max_vertex(cells[i].ref, order);
    pp.death_vertex = vmax;
    pp.birth = f[pp.birth_vertex];
    pp.death = f[vmax];
    pp.finite = false;
    out.pairs.push_back(pp);
  }
  std::sort(out.pairs.begin(), out.pairs.end(),
            [](const PersistencePair& a, const PersistencePair& b) {
              if (a.dim != b.dim) return a.dim < b.dim;
              if (a.finite != b.finite) return a.finite && !b.finite;
              if (a.birth != b.birth) return a.birth < b.birth;
              if (a.death != b.death) return a.death < b.death;
              if (a.birth_vertex != b.birth_vertex) return a.birth_vertex < b.birth_vertex;
              return a.death_vertex < b.death_vertex;
            });
  return out;
}

}  // namespace topo
