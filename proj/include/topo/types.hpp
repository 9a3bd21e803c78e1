#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>

namespace topo {

using Index = std::int64_t;

// Data vector: one scalar per grid vertex.
using Vec = Eigen::VectorXd;

// Unreadable or malformed input (files, field data, flag combinations).
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A size guard of an oracle-scale algorithm was exceeded.
struct SizeGuardError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structurally incompatible arguments (diagram classes, assignments, dims).
struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Reference to one simplex of the implicit triangulation. `id` encodes the
// anchor vertex and the local slot; it is decodable without stored
// connectivity.
struct SimplexRef {
  int dim = -1;
  Index id = -1;

  bool valid() const { return dim >= 0; }

  friend bool operator==(const SimplexRef& a, const SimplexRef& b) {
    return a.dim == b.dim && a.id == b.id;
  }
  friend bool operator!=(const SimplexRef& a, const SimplexRef& b) {
    return !(a == b);
  }
  friend bool operator<(const SimplexRef& a, const SimplexRef& b) {
    if (a.dim != b.dim) return a.dim < b.dim;
    return a.id < b.id;
  }
};

// Vertex ranks of a simplex, sorted in decreasing order. Comparing keys
// lexicographically (shorter key first on an exhausted prefix) yields the
// global simplex order of the filtration; every face precedes its cofaces.
struct SimplexKey {
  std::array<Index, 4> r{};
  int n = 0;

  friend bool operator<(const SimplexKey& a, const SimplexKey& b) {
    const int m = a.n < b.n ? a.n : b.n;
    for (int i = 0; i < m; ++i) {
      if (a.r[i] != b.r[i]) return a.r[i] < b.r[i];
    }
    return a.n < b.n;
  }
  friend bool operator>(const SimplexKey& a, const SimplexKey& b) { return b < a; }
  friend bool operator==(const SimplexKey& a, const SimplexKey& b) {
    if (a.n != b.n) return false;
    for (int i = 0; i < a.n; ++i) {
      if (a.r[i] != b.r[i]) return false;
    }
    return true;
  }
};

}  // namespace topo

template <>
struct std::hash<topo::SimplexRef> {
  std::size_t operator()(const topo::SimplexRef& s) const noexcept {
    return std::hash<topo::Index>()(s.id * 4 + s.dim);
  }
};
