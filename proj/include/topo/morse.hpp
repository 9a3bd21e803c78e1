#pragma once

#include <optional>
#include <vector>

#include "topo/persistence.hpp"

namespace topo {

// Alternating simplex sequence (p+1, p, p+1, ..., p) following gradient
// vectors from a critical (p+1)-cell down to a critical p-cell.
struct VPath {
  std::vector<SimplexRef> cells;
};

// The unique V-path from the death saddle down to the birth saddle, when
// exactly one exists. Multiple paths or none: nullopt. Only (1,2)-pairs of
// 3D gradients qualify; anything else is rejected.
std::optional<VPath> saddle_connector(const GridComplex& K, const DiscreteGradient& g,
                                      const PersistencePair& pair);

// Reverses every vector along a connector; the affected dimension is
// re-checked for cycles and the reversal rolled back when one appears.
// Returns true on success (endpoints are no longer critical).
bool reverse_connector(const GridComplex& K, DiscreteGradient& g, const VPath& path);

struct SkipHistogram {
  std::vector<double> bin_edges;  // size bins + 1
  std::vector<Index> counts;      // skips per persistence bin
  Index processed = 0, cancelled = 0, skipped = 0;

  void add_skip(double persistence);
};

// Processes the given saddle pairs by increasing persistence (ties broken
// by birth/death vertex), cancelling each by connector reversal when
// possible and recording skips against their persistence.
SkipHistogram cancel_saddle_pairs(const GridComplex& K, DiscreteGradient& g,
                                  const std::vector<PersistencePair>& pairs,
                                  double histogram_range, int bins = 20);

// One ascending separatrix from a 2-saddle to a maximum; `maximum` is
// absent when the walk exits through the domain boundary.
struct Filament {
  SimplexRef saddle;
  std::optional<SimplexRef> maximum;
  std::vector<std::array<double, 3>> points;  // barycenters along the path
};

// Upward discrete integral lines started at every critical 2-cell whose
// lowest vertex value reaches min_value. 3D gradients only.
std::vector<Filament> extract_filaments(const GridComplex& K, const ScalarField& field,
                                        const DiscreteGradient& g, double min_value);

}  // namespace topo
