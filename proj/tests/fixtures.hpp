#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "topo/grid.hpp"
#include "topo/persistence.hpp"

namespace fixtures {

using topo::Index;
using topo::ScalarField;
using topo::Vec;

inline ScalarField field_1d(std::vector<double> values) {
  ScalarField f;
  f.dims = topo::make_dims({static_cast<Index>(values.size())});
  f.values = Eigen::Map<Vec>(values.data(), static_cast<Index>(values.size()));
  return f;
}

inline ScalarField field_2d(Index nx, Index ny, const std::vector<double>& values) {
  ScalarField f;
  f.dims = topo::make_dims({nx, ny});
  f.values = Eigen::Map<const Vec>(values.data(), nx * ny);
  return f;
}

inline ScalarField random_field(std::vector<Index> extents, unsigned seed, double lo = 0.0,
                                double hi = 1.0) {
  ScalarField f;
  f.dims = topo::make_dims(std::move(extents));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  f.values = Vec(f.dims.vertex_count());
  for (Index i = 0; i < f.values.size(); ++i) f.values[i] = dist(rng);
  return f;
}

// Terrain with a few deep wells on a flat background plus uniform noise,
// normalized so the clean part spans [0, 1]. The global minimum sits in
// the deepest well; the other wells give finite minimum-saddle pairs.
inline ScalarField terrain(Index n, unsigned seed, int wells = 4,
                           double noise_amplitude = 0.005) {
  ScalarField f;
  f.dims = topo::make_dims({n, n});
  f.values = Vec(n * n);
  const double cx[4] = {0.22, 0.74, 0.28, 0.78};
  const double cy[4] = {0.25, 0.3, 0.78, 0.74};
  const double depth[4] = {0.45, 0.4, 0.35, 0.3};
  const double sigma = 0.08;
  double lo = 1e300, hi = -1e300;
  for (Index y = 0; y < n; ++y) {
    for (Index x = 0; x < n; ++x) {
      const double px = double(x) / double(n - 1);
      const double py = double(y) / double(n - 1);
      double v = 0.85 + 0.02 * px + 0.013 * py;
      for (int w = 0; w < wells && w < 4; ++w) {
        const double dx = px - cx[w], dy = py - cy[w];
        v -= depth[w] * std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
      }
      f.values[x + n * y] = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  f.values = (f.values.array() - lo) / (hi - lo);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-noise_amplitude, noise_amplitude);
  for (Index i = 0; i < f.values.size(); ++i) f.values[i] += noise(rng);
  return f;
}

// Signed distance to a torus of ring radius R and tube radius r, sampled
// on an n^3 grid covering [-box, box]^3. Axis selects the symmetry axis.
inline ScalarField torus_sdf(Index n, double R = 0.9, double r = 0.35, double box = 1.5,
                             int axis = 2, double center_x = 0.0, double center_y = 0.0,
                             double center_z = 0.0) {
  ScalarField f;
  f.dims = topo::make_dims({n, n, n});
  f.values = Vec(n * n * n);
  for (Index z = 0; z < n; ++z) {
    for (Index y = 0; y < n; ++y) {
      for (Index x = 0; x < n; ++x) {
        double p[3] = {-box + 2 * box * double(x) / double(n - 1) - center_x,
                       -box + 2 * box * double(y) / double(n - 1) - center_y,
                       -box + 2 * box * double(z) / double(n - 1) - center_z};
        const double h = p[axis];
        const double u = p[(axis + 1) % 3], w = p[(axis + 2) % 3];
        const double ring = std::sqrt(u * u + w * w) - R;
        f.values[x + n * (y + n * z)] = std::sqrt(ring * ring + h * h) - r;
      }
    }
  }
  return f;
}

// Union of two interlocking tori plus mid-scale structured noise: many
// handles and co-located V-paths, the stress fixture for connector
// reversal.
inline ScalarField multi_handle(Index n, unsigned seed, double noise_amplitude = 0.08) {
  ScalarField a = torus_sdf(n, 0.85, 0.3, 1.6, 2, 0.0, -0.35, 0.0);
  ScalarField b = torus_sdf(n, 0.85, 0.3, 1.6, 0, 0.0, 0.35, 0.0);
  ScalarField f;
  f.dims = a.dims;
  f.values = a.values.cwiseMin(b.values);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-noise_amplitude, noise_amplitude);
  for (Index z = 0; z < n; ++z) {
    for (Index y = 0; y < n; ++y) {
      for (Index x = 0; x < n; ++x) {
        const double s = std::sin(2.9 * x) * std::sin(3.1 * y) * std::sin(2.7 * z);
        f.values[x + n * (y + n * z)] += 0.5 * noise_amplitude * s + noise(rng);
      }
    }
  }
  return f;
}

// Ramp with one dip: a single finite minimum-saddle pair (0.375, 0.625)
// plus the infinite generator. Every value is exact in binary, so one
// half-step lands both vertices on 0.5 exactly.
inline ScalarField single_noise_pair_1d() {
  return field_1d({0.0, 0.25, 0.625, 0.375, 0.75, 0.8125, 0.875, 1.0});
}

// Canonical multiset view of a diagram for oracle comparisons.
struct DiagramSignature {
  std::vector<std::tuple<int, Index, Index, bool>> entries;
  friend bool operator==(const DiagramSignature& a, const DiagramSignature& b) {
    return a.entries == b.entries;
  }
};

inline DiagramSignature signature(const topo::PersistenceDiagram& d) {
  DiagramSignature s;
  for (const auto& p : d.pairs) {
    s.entries.emplace_back(p.dim, p.birth_vertex, p.death_vertex, p.finite);
  }
  std::sort(s.entries.begin(), s.entries.end());
  return s;
}

}  // namespace fixtures
