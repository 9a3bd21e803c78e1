#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "topo/types.hpp"

namespace topo {

// Vertex extents of a regular grid, 1 to 3 axes, x-fastest indexing.
struct GridDims {
  int rank = 0;
  std::array<Index, 3> extent{1, 1, 1};

  Index vertex_count() const {
    return extent[0] * extent[1] * extent[2];
  }
  friend bool operator==(const GridDims& a, const GridDims& b) {
    return a.rank == b.rank && a.extent == b.extent;
  }
};

GridDims make_dims(std::vector<Index> extents);

// Scalar field on a regular grid; `values` is the optimization variable.
struct ScalarField {
  GridDims dims;
  Vec values;
};

// Throws InputError on extent/value-count mismatch or non-finite values.
void validate_field(const ScalarField& field);

// Permutation of the vertices by increasing (value, index). Exact ties in
// value are broken by the vertex index; raw values are never perturbed.
struct VertexOrder {
  std::vector<Index> rank;     // rank[v] = position of vertex v
  std::vector<Index> inverse;  // inverse[r] = vertex at position r

  Index last_vertex() const { return inverse.back(); }
};

VertexOrder build_vertex_order(const ScalarField& field);

// Implicit Freudenthal/Kuhn triangulation of a regular grid. Quads split
// along the (+x,+y) diagonal, cubes into the 6 tetrahedra around the main
// diagonal. A simplex is anchored at its lowest corner; its id is
// anchor * slots(dim) + slot, so encode/decode is O(1) with no stored
// connectivity. All queries are pure reads and thread-safe.
class GridComplex {
 public:
  static constexpr int kMaxCofacets = 16;

  explicit GridComplex(GridDims dims);

  int dimension() const { return dims_.rank; }
  const GridDims& dims() const { return dims_; }
  Index vertex_count() const { return nv_; }

  Index slot_count(int p) const { return static_cast<Index>(slots_[p].size()); }
  // Exclusive upper bound of simplex ids in dimension p (not all ids valid).
  Index id_bound(int p) const { return nv_ * slot_count(p); }
  bool is_valid(SimplexRef s) const;
  // Number of valid simplices of dimension p (closed form per slot).
  Index simplex_count(int p) const;
  Index total_simplex_count() const;

  std::array<Index, 3> coords_of(Index v) const;
  Index vertex_at(const std::array<Index, 3>& c) const;

  int vertex_count_of(SimplexRef s) const { return s.dim + 1; }
  void simplex_vertices(SimplexRef s, std::array<Index, 4>& verts, int& n) const;
  Index max_vertex(SimplexRef s, const VertexOrder& order) const;
  SimplexKey key(SimplexRef s, const VertexOrder& order) const;

  void facets(SimplexRef s, std::array<SimplexRef, 4>& out, int& n) const;
  void cofacets(SimplexRef s, std::array<SimplexRef, kMaxCofacets>& out, int& n) const;

  // All cofaces of v (v included), any dimension.
  void star(Index v, std::vector<SimplexRef>& out) const;
  // Cofaces of v whose highest vertex in the global order is v. The lower
  // stars of all vertices partition the complex.
  void lower_star(Index v, const VertexOrder& order, std::vector<SimplexRef>& out) const;

  // Vertices at Chebyshev distance <= 1 of any seed vertex, i.e. all
  // vertices sharing a grid cell with a seed. Sorted, unique.
  std::vector<Index> cell_neighborhood(const std::vector<Index>& seeds) const;

  template <class F>
  void for_each_simplex(int p, F&& f) const {
    const Index ns = slot_count(p);
    for (Index base = 0; base < nv_; ++base) {
      for (Index s = 0; s < ns; ++s) {
        SimplexRef ref{p, base * ns + s};
        if (slot_valid_at(p, static_cast<int>(s), coords_of(base))) f(ref);
      }
    }
  }

 private:
  // A slot is a chain of strictly nested 0/1 offset bitmasks starting at 0;
  // bit i of a mask is a +1 offset on axis i.
  struct Slot {
    std::array<std::uint8_t, 4> mask{};
    int nverts = 0;
    std::uint8_t max_mask = 0;
  };
  struct FacetLink {
    std::uint8_t base_shift = 0;  // mask added to the anchor
    std::int32_t slot = -1;
  };
  struct CofacetLink {
    std::uint8_t base_shift = 0;  // mask subtracted from the anchor
    std::int32_t slot = -1;
  };
  struct StarLink {
    std::uint8_t contain_mask = 0;  // offset of v inside the simplex
    std::int32_t slot = -1;
  };

  bool slot_valid_at(int p, int slot, const std::array<Index, 3>& base) const;
  static std::array<Index, 3> mask_vec(std::uint8_t m) {
    return {Index(m & 1), Index((m >> 1) & 1), Index((m >> 2) & 1)};
  }

  GridDims dims_;
  Index nv_ = 0;
  std::array<Index, 3> stride_{1, 1, 1};
  std::array<std::vector<Slot>, 4> slots_;
  std::array<std::vector<std::array<FacetLink, 4>>, 4> facet_links_;
  std::array<std::vector<std::vector<CofacetLink>>, 4> cofacet_links_;
  std::array<std::vector<StarLink>, 4> star_links_;
};

}  // namespace topo
