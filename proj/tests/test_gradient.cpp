#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "topo/gradient.hpp"

using namespace topo;

namespace {

Index critical_count(const GridComplex& K, const DiscreteGradient& g, int p) {
  Index n = 0;
  K.for_each_simplex(p, [&](SimplexRef s) { n += g.is_critical(s) ? 1 : 0; });
  return n;
}

}  // namespace

TEST_CASE("monotone 1D path has a single critical vertex") {
  const auto f = fixtures::field_1d({0, 1, 2, 3, 4, 5, 6, 7});
  const GridComplex K(f.dims);
  const VertexOrder order = build_vertex_order(f);
  const DiscreteGradient g = build_gradient(K, f, order);
  CHECK(critical_count(K, g, 0) == 1);
  CHECK(critical_count(K, g, 1) == 0);
  CHECK(g.is_critical(SimplexRef{0, 0}));
}

TEST_CASE("1D local maximum pairs with its lower edge") {
  // Values [0,2,1]: the lower star of v1 holds both edges; v1 pairs with
  // the lexicographically smaller one and the other edge is critical.
  const auto f = fixtures::field_1d({0, 2, 1});
  const GridComplex K(f.dims);
  const VertexOrder order = build_vertex_order(f);
  const DiscreteGradient g = build_gradient(K, f, order);
  const SimplexRef v1{0, 1}, e01{1, 0}, e12{1, 1};
  CHECK(g.is_paired_up(v1));
  CHECK(g.partner(v1) == e01);
  CHECK(g.is_critical(e12));
  CHECK(g.is_critical(SimplexRef{0, 0}));
  CHECK(critical_count(K, g, 0) == 2);  // v0 and v2
  CHECK(critical_count(K, g, 1) == 1);
}

TEST_CASE("2x2 grid pairing of the top vertex star") {
  // Increasing values along the index order: the lower star of v3 pairs
  // v3 with its smallest edge and one edge with one triangle; no critical
  // cell remains in that star.
  const auto f = fixtures::field_2d(2, 2, {0, 1, 2, 3});
  const GridComplex K(f.dims);
  const VertexOrder order = build_vertex_order(f);
  const DiscreteGradient g = build_gradient(K, f, order);
  std::vector<SimplexRef> ls;
  K.lower_star(3, order, ls);
  Index criticals = 0;
  for (const auto& s : ls) criticals += g.is_critical(s) ? 1 : 0;
  CHECK(criticals == 0);
  CHECK(g.is_critical(SimplexRef{0, 0}));
  CHECK(critical_count(K, g, 0) == 1);
  // One edge pairs with one of the two triangles, the other two edges
  // pair with vertices; counts must balance per dimension.
  CHECK(critical_count(K, g, 1) == 0);
  CHECK(critical_count(K, g, 2) == 0);
}

TEST_CASE("any field keeps at least one critical simplex") {
  const auto f = fixtures::random_field({5, 5}, 3);
  const GridComplex K(f.dims);
  const auto order = build_vertex_order(f);
  const auto g = build_gradient(K, f, order);
  Index total = 0;
  for (int p = 0; p <= 2; ++p) total += critical_count(K, g, p);
  CHECK(total >= 1);
}

TEST_CASE("critical cells satisfy the Euler relation") {
  for (auto dims : {std::vector<Index>{64, 64}, std::vector<Index>{9, 9, 9}}) {
    for (unsigned seed : {5u, 6u}) {
      const auto f = fixtures::random_field(dims, seed);
      const GridComplex K(f.dims);
      const auto order = build_vertex_order(f);
      const auto g = build_gradient(K, f, order);
      Index chi = 0;
      for (int p = 0; p <= K.dimension(); ++p) {
        chi += (p % 2 == 0 ? 1 : -1) * critical_count(K, g, p);
      }
      CHECK(chi == 1);
    }
  }
}

TEST_CASE("build output passes validation") {
  const auto f = fixtures::random_field({6, 6, 6}, 9);
  const GridComplex K(f.dims);
  const auto order = build_vertex_order(f);
  const auto g = build_gradient(K, f, order);
  CHECK(!validate_gradient(K, g).has_value());
}

TEST_CASE("validation reports corrupted gradients") {
  const auto f = fixtures::random_field({5, 5}, 13);
  const GridComplex K(f.dims);
  const auto order = build_vertex_order(f);
  auto g = build_gradient(K, f, order);

  SUBCASE("broken involution") {
    bool done = false;
    K.for_each_simplex(0, [&](SimplexRef s) {
      if (done || !g.is_paired_up(s)) return;
      g.set_raw(s, DiscreteGradient::kCritical);  // partner still points back
      done = true;
    });
    REQUIRE(done);
    const auto violation = validate_gradient(K, g);
    REQUIRE(violation.has_value());
    CHECK(violation->what == "pairing is not an involution");
  }

  SUBCASE("constructed V-path cycle") {
    // Build a gradient from scratch: everything critical except a fan of
    // (edge, triangle) vectors rotating around an interior vertex, which
    // is a valid involution but a cyclic V-path.
    DiscreteGradient fan(K);
    for (int p = 0; p <= 2; ++p) {
      K.for_each_simplex(p, [&](SimplexRef s) { fan.set_critical(s); });
    }
    auto find_simplex = [&](int dim, std::vector<Index> want) {
      std::sort(want.begin(), want.end());
      SimplexRef found{-1, -1};
      std::array<Index, 4> verts;
      int n = 0;
      K.for_each_simplex(dim, [&](SimplexRef s) {
        K.simplex_vertices(s, verts, n);
        std::vector<Index> have(verts.begin(), verts.begin() + n);
        std::sort(have.begin(), have.end());
        if (have == want) found = s;
      });
      REQUIRE(found.valid());
      return found;
    };
    const Index v = K.vertex_at({1, 1});
    const Index px = K.vertex_at({2, 1}), pxy = K.vertex_at({2, 2});
    const Index py = K.vertex_at({1, 2}), mx = K.vertex_at({0, 1});
    const Index mxy = K.vertex_at({0, 0}), my = K.vertex_at({1, 0});
    const std::array<Index, 6> ring{px, pxy, py, mx, mxy, my};
    const std::array<std::array<Index, 2>, 6> tri_others{
        std::array<Index, 2>{px, pxy}, {py, pxy}, {mx, py},
        {mxy, mx},                     {mxy, my}, {my, px}};
    for (int k = 0; k < 6; ++k) {
      const SimplexRef e = find_simplex(1, {v, ring[k]});
      const SimplexRef t = find_simplex(2, {v, tri_others[k][0], tri_others[k][1]});
      fan.set_pair(e, t);
    }
    const auto violation = validate_gradient(K, fan);
    REQUIRE(violation.has_value());
    CHECK(violation->what == "V-path cycle");
  }
}

TEST_CASE("update with empty set returns the same gradient") {
  const auto f = fixtures::random_field({8, 8}, 21);
  const GridComplex K(f.dims);
  const auto order = build_vertex_order(f);
  const auto g = build_gradient(K, f, order);
  const auto g2 = update_gradient(K, g, f, order, {});
  CHECK(g == g2);
}

TEST_CASE("randomized incremental updates equal full recomputation") {
  std::mt19937_64 rng(2024);
  auto f = fixtures::random_field({16, 16}, 77);
  const GridComplex K(f.dims);
  auto order = build_vertex_order(f);
  auto g = build_gradient(K, f, order);
  std::uniform_int_distribution<Index> pick(0, f.values.size() - 1);
  std::uniform_real_distribution<double> val(0.0, 1.0);
  std::uniform_int_distribution<int> count(1, 12);
  for (int step = 0; step < 100; ++step) {
    UpdatedVertexSet updated;
    const int k = count(rng);
    for (int i = 0; i < k; ++i) {
      const Index v = pick(rng);
      f.values[v] = val(rng);
      updated.push_back(v);
    }
    std::sort(updated.begin(), updated.end());
    updated.erase(std::unique(updated.begin(), updated.end()), updated.end());
    const auto new_order = build_vertex_order(f);
    g = update_gradient(K, g, f, new_order, updated);
    const auto reference = build_gradient(K, f, new_order);
    REQUIRE(g == reference);
    order = new_order;
  }
}

TEST_CASE("threaded and serial runs produce identical pairings") {
  const auto f = fixtures::random_field({24, 24, 8}, 31);
  const GridComplex K(f.dims);
  const auto order = build_vertex_order(f);
  const auto g1 = build_gradient(K, f, order);
  const auto g2 = build_gradient(K, f, order);
  CHECK(g1 == g2);
}
