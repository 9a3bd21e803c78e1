#pragma once

#include <optional>
#include <string>
#include <vector>

#include "topo/grid.hpp"
#include "topo/types.hpp"

namespace topo {

// Vertices whose data value changed in the last descent step.
using UpdatedVertexSet = std::vector<Index>;

// Pairing of simplices into discrete vectors; unpaired simplices are
// critical. One integer per simplex: the partner id tagged with its
// direction, or a sentinel.
class DiscreteGradient {
 public:
  static constexpr Index kCritical = -1;
  static constexpr Index kUnset = -2;

  DiscreteGradient() = default;
  explicit DiscreteGradient(const GridComplex& K);

  bool is_critical(SimplexRef s) const { return entry(s) == kCritical; }
  bool is_paired(SimplexRef s) const { return entry(s) >= 0; }
  bool is_paired_up(SimplexRef s) const { return entry(s) >= 0 && (entry(s) & 1); }
  bool is_paired_down(SimplexRef s) const { return entry(s) >= 0 && !(entry(s) & 1); }
  SimplexRef partner(SimplexRef s) const {
    const Index e = entry(s);
    return SimplexRef{s.dim + ((e & 1) ? 1 : -1), e >> 1};
  }

  Index entry(SimplexRef s) const { return cells_[s.dim][s.id]; }
  void set_critical(SimplexRef s) { cells_[s.dim][s.id] = kCritical; }
  void set_pair(SimplexRef low, SimplexRef high) {
    cells_[low.dim][low.id] = (high.id << 1) | 1;
    cells_[high.dim][high.id] = low.id << 1;
  }
  void set_raw(SimplexRef s, Index value) { cells_[s.dim][s.id] = value; }

  friend bool operator==(const DiscreteGradient& a, const DiscreteGradient& b) {
    return a.cells_ == b.cells_;
  }

 private:
  std::array<std::vector<Index>, 4> cells_;
};

struct GradientViolation {
  std::string what;
  SimplexRef a, b;
};

// Scratch buffers for the lower-star procedure, reusable across vertices.
struct LowerStarScratch {
  struct Cell {
    SimplexRef ref;
    SimplexKey key;
    int state = 0;  // 0 unpaired, 1 paired, 2 critical
    int nfacets = 0;
    std::array<std::int32_t, 4> facet_local{};
    std::vector<std::int32_t> cofacet_local;
  };
  std::vector<SimplexRef> star;
  std::vector<Cell> cells;
  std::vector<std::int32_t> heap_zero, heap_one;
};

// Robins-style homotopy expansion over one lower star. All priority
// decisions use the simplex keys, so the result is a function of the
// filtration only. Writes the pairing of every simplex of the star.
void process_lower_star(const GridComplex& K, const VertexOrder& order, Index v,
                        LowerStarScratch& scratch, DiscreteGradient& g);

// Lower-star discrete gradient of the whole field; lower stars are
// processed in parallel (disjoint writes).
DiscreteGradient build_gradient(const GridComplex& K, const ScalarField& field,
                                const VertexOrder& order);

// Checks involution, dimension consistency and acyclicity of the V-paths.
// Returns the first violation found, or nullopt.
std::optional<GradientViolation> validate_gradient(const GridComplex& K,
                                                   const DiscreteGradient& g);

// Localized recomputation: only lower stars of updated vertices and of
// vertices sharing a cell with one are reprocessed. Equals
// build_gradient(fieldNew, orderNew) exactly when `updated` covers every
// changed vertex.
DiscreteGradient update_gradient(const GridComplex& K, const DiscreteGradient& prev,
                                 const ScalarField& fieldNew, const VertexOrder& orderNew,
                                 const UpdatedVertexSet& updated);

}  // namespace topo
