#pragma once

#include <array>
#include <vector>

#include "topo/gradient.hpp"
#include "topo/grid.hpp"
#include "topo/types.hpp"

namespace topo {

// One persistent generator. Infinite generators carry the convention death
// value of the last vertex in the global order and no death simplex.
struct PersistencePair {
  int dim = 0;
  SimplexRef birth_simplex, death_simplex;
  Index birth_vertex = -1, death_vertex = -1;
  double birth = 0, death = 0;
  bool finite = true;

  double persistence() const { return death - birth; }
};

struct PersistenceDiagram {
  std::vector<PersistencePair> pairs;
  // Bookkeeping for the counting identity with the gradient's critical
  // cells: zero-persistence pairs are discarded from `pairs` but counted.
  Index zero_persistence_pairs = 0;
  std::array<Index, 4> critical_count{};

  Index finite_count(int dim) const;
  Index infinite_count(int dim) const;
  Index size() const { return static_cast<Index>(pairs.size()); }
};

struct DiagramResult {
  PersistenceDiagram diagram;
  DiscreteGradient gradient;
  VertexOrder order;
};

// Persistence pairs of the critical cells of a discrete gradient:
// union-find over critical vertices/edges for dimension 0, the symmetric
// dual sweep for dimension d-1, and column reduction of the Morse-complex
// boundary (mod-2 V-path counts) for the intermediate saddle pairs in 3D.
PersistenceDiagram pair_critical_cells(const GridComplex& K, const ScalarField& field,
                                       const VertexOrder& order, const DiscreteGradient& g);

// Order + gradient + pairing in one call.
DiagramResult compute_diagram(const GridComplex& K, const ScalarField& field);

// Independent oracle: full boundary-matrix reduction over Z/2 in global
// lexicographic order. Refuses complexes above the size guard.
PersistenceDiagram brute_force_diagram(const GridComplex& K, const ScalarField& field,
                                       Index max_simplices = 50000);

// Fast path: gradient copied from the previous step and reprocessed only
// where lower stars may have changed; the pairing phase then runs as-is.
// Identical to compute_diagram(fieldNew).
DiagramResult update_diagram(const GridComplex& K, const DiscreteGradient& prev,
                             const ScalarField& fieldNew, const UpdatedVertexSet& updated);

}  // namespace topo
