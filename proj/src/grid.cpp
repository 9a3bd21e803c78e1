#include "topo/grid.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <numeric>

namespace topo {

GridDims make_dims(std::vector<Index> extents) {
  if (extents.empty() || extents.size() > 3) {
    throw InputError("grid rank must be 1, 2 or 3");
  }
  GridDims d;
  d.rank = static_cast<int>(extents.size());
  for (int i = 0; i < d.rank; ++i) {
    if (extents[i] < 1) throw InputError("grid extents must be positive");
    d.extent[i] = extents[i];
  }
  return d;
}

void validate_field(const ScalarField& field) {
  if (field.dims.rank < 1 || field.dims.rank > 3) {
    throw InputError("grid rank must be 1, 2 or 3");
  }
  for (int i = 0; i < field.dims.rank; ++i) {
    if (field.dims.extent[i] < 1) throw InputError("grid extents must be positive");
  }
  if (field.values.size() != field.dims.vertex_count()) {
    throw InputError("value count does not match grid extents");
  }
  for (Index i = 0; i < field.values.size(); ++i) {
    if (!std::isfinite(field.values[i])) {
      throw InputError("field values must be finite");
    }
  }
}

VertexOrder build_vertex_order(const ScalarField& field) {
  validate_field(field);
  const Index nv = field.values.size();
  VertexOrder order;
  order.inverse.resize(nv);
  std::iota(order.inverse.begin(), order.inverse.end(), Index(0));
  const Vec& f = field.values;
  std::sort(order.inverse.begin(), order.inverse.end(), [&f](Index a, Index b) {
    if (f[a] != f[b]) return f[a] < f[b];
    return a < b;
  });
  order.rank.resize(nv);
  for (Index r = 0; r < nv; ++r) order.rank[order.inverse[r]] = r;
  return order;
}

GridComplex::GridComplex(GridDims dims) : dims_(dims) {
  if (dims_.rank < 1 || dims_.rank > 3) throw InputError("grid rank must be 1, 2 or 3");
  nv_ = dims_.vertex_count();
  stride_ = {1, dims_.extent[0], dims_.extent[0] * dims_.extent[1]};

  const int d = dims_.rank;
  const std::uint8_t full = static_cast<std::uint8_t>((1u << d) - 1u);

  // Enumerate slots: strictly nested mask chains starting at 0, depth-first
  // with masks tried in increasing numeric order; deterministic tables.
  std::array<std::map<std::vector<std::uint8_t>, std::int32_t>, 4> index_of;
  std::vector<std::uint8_t> chain{0};
  auto subset = [](std::uint8_t a, std::uint8_t b) { return (a & ~b) == 0; };

  auto record = [&] {
    const int p = static_cast<int>(chain.size()) - 1;
    Slot s;
    s.nverts = p + 1;
    for (int i = 0; i <= p; ++i) s.mask[i] = chain[i];
    s.max_mask = chain.back();
    index_of[p].emplace(chain, static_cast<std::int32_t>(slots_[p].size()));
    slots_[p].push_back(s);
  };

  std::function<void()> extend = [&] {
    record();
    if (static_cast<int>(chain.size()) == d + 1) return;
    const std::uint8_t last = chain.back();
    for (std::uint8_t m = last + 1; m <= full; ++m) {
      if (m != last && subset(last, m)) {
        chain.push_back(m);
        extend();
        chain.pop_back();
      }
    }
  };
  extend();

  // Facet links: remove one vertex from the chain; removing the anchor
  // re-anchors the facet at the former second vertex.
  for (int p = 1; p <= d; ++p) {
    facet_links_[p].resize(slots_[p].size());
    for (std::size_t s = 0; s < slots_[p].size(); ++s) {
      const Slot& slot = slots_[p][s];
      for (int k = 0; k <= p; ++k) {
        std::vector<std::uint8_t> sub;
        std::uint8_t shift = 0;
        if (k == 0) {
          shift = slot.mask[1];
          for (int i = 1; i <= p; ++i) {
            sub.push_back(static_cast<std::uint8_t>(slot.mask[i] & ~shift));
          }
        } else {
          for (int i = 0; i <= p; ++i) {
            if (i != k) sub.push_back(slot.mask[i]);
          }
        }
        const auto it = index_of[p - 1].find(sub);
        assert(it != index_of[p - 1].end());
        facet_links_[p][s][k] = FacetLink{shift, it->second};
      }
    }
  }

  // Cofacet links: inverse of the facet links.
  for (int p = 0; p < d; ++p) cofacet_links_[p].resize(slots_[p].size());
  for (int p = 1; p <= d; ++p) {
    for (std::size_t s = 0; s < slots_[p].size(); ++s) {
      for (int k = 0; k < p + 1; ++k) {
        const FacetLink& fl = facet_links_[p][s][k];
        cofacet_links_[p - 1][fl.slot].push_back(
            CofacetLink{fl.base_shift, static_cast<std::int32_t>(s)});
      }
    }
  }

  // Star links: every (slot, chain position) pair contributes one coface
  // candidate for a vertex.
  for (int p = 0; p <= d; ++p) {
    for (std::size_t s = 0; s < slots_[p].size(); ++s) {
      const Slot& slot = slots_[p][s];
      for (int j = 0; j <= p; ++j) {
        star_links_[p].push_back(StarLink{slot.mask[j], static_cast<std::int32_t>(s)});
      }
    }
  }

#ifndef NDEBUG
  for (int p = 0; p < d; ++p) {
    for (const auto& links : cofacet_links_[p]) {
      assert(static_cast<int>(links.size()) <= kMaxCofacets);
    }
  }
#endif
}

std::array<Index, 3> GridComplex::coords_of(Index v) const {
  return {v % dims_.extent[0], (v / dims_.extent[0]) % dims_.extent[1],
          v / (dims_.extent[0] * dims_.extent[1])};
}

Index GridComplex::vertex_at(const std::array<Index, 3>& c) const {
  return c[0] + c[1] * stride_[1] + c[2] * stride_[2];
}

bool GridComplex::slot_valid_at(int p, int slot, const std::array<Index, 3>& base) const {
  const auto off = mask_vec(slots_[p][slot].max_mask);
  for (int a = 0; a < 3; ++a) {
    if (base[a] + off[a] > dims_.extent[a] - 1) return false;
  }
  return true;
}

bool GridComplex::is_valid(SimplexRef s) const {
  if (s.dim < 0 || s.dim > dims_.rank || s.id < 0 || s.id >= id_bound(s.dim)) return false;
  const Index ns = slot_count(s.dim);
  return slot_valid_at(s.dim, static_cast<int>(s.id % ns), coords_of(s.id / ns));
}

Index GridComplex::simplex_count(int p) const {
  if (p < 0 || p > dims_.rank) return 0;
  Index total = 0;
  for (const Slot& s : slots_[p]) {
    Index prod = 1;
    const auto off = mask_vec(s.max_mask);
    for (int a = 0; a < 3; ++a) prod *= dims_.extent[a] - off[a];
    total += prod;
  }
  return total;
}

Index GridComplex::total_simplex_count() const {
  Index total = 0;
  for (int p = 0; p <= dims_.rank; ++p) total += simplex_count(p);
  return total;
}

void GridComplex::simplex_vertices(SimplexRef s, std::array<Index, 4>& verts, int& n) const {
  const Index ns = slot_count(s.dim);
  const Slot& slot = slots_[s.dim][static_cast<std::size_t>(s.id % ns)];
  const auto base = coords_of(s.id / ns);
  n = slot.nverts;
  for (int i = 0; i < n; ++i) {
    const auto off = mask_vec(slot.mask[i]);
    verts[i] = vertex_at({base[0] + off[0], base[1] + off[1], base[2] + off[2]});
  }
}

Index GridComplex::max_vertex(SimplexRef s, const VertexOrder& order) const {
  std::array<Index, 4> verts;
  int n = 0;
  simplex_vertices(s, verts, n);
  Index best = verts[0];
  for (int i = 1; i < n; ++i) {
    if (order.rank[verts[i]] > order.rank[best]) best = verts[i];
  }
  return best;
}

SimplexKey GridComplex::key(SimplexRef s, const VertexOrder& order) const {
  std::array<Index, 4> verts;
  int n = 0;
  simplex_vertices(s, verts, n);
  SimplexKey k;
  k.n = n;
  for (int i = 0; i < n; ++i) k.r[i] = order.rank[verts[i]];
  std::sort(k.r.begin(), k.r.begin() + n, std::greater<Index>());
  return k;
}

void GridComplex::facets(SimplexRef s, std::array<SimplexRef, 4>& out, int& n) const {
  n = 0;
  if (s.dim == 0) return;
  const Index ns = slot_count(s.dim);
  const Index base = s.id / ns;
  const int slot = static_cast<int>(s.id % ns);
  const auto base_c = coords_of(base);
  const Index nf = slot_count(s.dim - 1);
  for (int k = 0; k <= s.dim; ++k) {
    const FacetLink& fl = facet_links_[s.dim][slot][k];
    Index fbase = base;
    if (fl.base_shift) {
      const auto off = mask_vec(fl.base_shift);
      fbase = vertex_at({base_c[0] + off[0], base_c[1] + off[1], base_c[2] + off[2]});
    }
    out[n++] = SimplexRef{s.dim - 1, fbase * nf + fl.slot};
  }
}

void GridComplex::cofacets(SimplexRef s, std::array<SimplexRef, kMaxCofacets>& out,
                           int& n) const {
  n = 0;
  if (s.dim >= dims_.rank) return;
  const Index ns = slot_count(s.dim);
  const auto base_c = coords_of(s.id / ns);
  const int slot = static_cast<int>(s.id % ns);
  const Index nc = slot_count(s.dim + 1);
  for (const CofacetLink& cl : cofacet_links_[s.dim][slot]) {
    const auto off = mask_vec(cl.base_shift);
    const std::array<Index, 3> c{base_c[0] - off[0], base_c[1] - off[1], base_c[2] - off[2]};
    if (c[0] < 0 || c[1] < 0 || c[2] < 0) continue;
    if (!slot_valid_at(s.dim + 1, cl.slot, c)) continue;
    out[n++] = SimplexRef{s.dim + 1, vertex_at(c) * nc + cl.slot};
  }
}

void GridComplex::star(Index v, std::vector<SimplexRef>& out) const {
  out.clear();
  const auto vc = coords_of(v);
  for (int p = 0; p <= dims_.rank; ++p) {
    const Index ns = slot_count(p);
    for (const StarLink& sl : star_links_[p]) {
      const auto off = mask_vec(sl.contain_mask);
      const std::array<Index, 3> c{vc[0] - off[0], vc[1] - off[1], vc[2] - off[2]};
      if (c[0] < 0 || c[1] < 0 || c[2] < 0) continue;
      if (!slot_valid_at(p, sl.slot, c)) continue;
      out.push_back(SimplexRef{p, vertex_at(c) * ns + sl.slot});
    }
  }
}

void GridComplex::lower_star(Index v, const VertexOrder& order,
                             std::vector<SimplexRef>& out) const {
  star(v, out);
  const Index rv = order.rank[v];
  auto in_lower = [&](SimplexRef s) {
    std::array<Index, 4> verts;
    int n = 0;
    simplex_vertices(s, verts, n);
    for (int i = 0; i < n; ++i) {
      if (order.rank[verts[i]] > rv) return false;
    }
    return true;
  };
  out.erase(std::remove_if(out.begin(), out.end(),
                           [&](SimplexRef s) { return !in_lower(s); }),
            out.end());
}

std::vector<Index> GridComplex::cell_neighborhood(const std::vector<Index>& seeds) const {
  std::vector<Index> result;
  result.reserve(seeds.size() * 27);
  for (Index v : seeds) {
    const auto c = coords_of(v);
    for (Index dz = -1; dz <= 1; ++dz) {
      for (Index dy = -1; dy <= 1; ++dy) {
        for (Index dx = -1; dx <= 1; ++dx) {
          const std::array<Index, 3> w{c[0] + dx, c[1] + dy, c[2] + dz};
          bool ok = true;
          for (int a = 0; a < 3; ++a) {
            if (w[a] < 0 || w[a] > dims_.extent[a] - 1) ok = false;
          }
          if (ok) result.push_back(vertex_at(w));
        }
      }
    }
  }
  std::sort(result.begin(), result.end());
  result.erase(std::unique(result.begin(), result.end()), result.end());
  return result;
}

}  // namespace topo
