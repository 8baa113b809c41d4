#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bisectd/analysis.hpp"
#include "bisectd/seed.hpp"

#include <cstdlib>
#include <deque>
#include <random>

using namespace bisectd;

namespace {

Triangulation random_mesh(Triangulation t, int steps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (int i = 0; i < steps; ++i) {
    auto lv = t.leaves();
    t = bisect_with_closure(t, lv[rng() % lv.size()]);
  }
  return t;
}

DyadicPoint ipt(std::vector<long long> n) {
  std::vector<BigInt> v(n.begin(), n.end());
  return DyadicPoint::integer(std::move(v));
}

// Independent patch-diameter brute force over the public LeafIndex API,
// used to cross-check c_of_seed.
int oracle_C(Forest& f) {
  Triangulation roots = Triangulation::of_roots(f);
  Triangulation full = uniform_refine(roots, f.dim());
  LeafIndex idx(full);
  int best = 0;
  for (NodeId r : f.roots()) {
    for (VertId v : f.verts_of(r)) {
      const auto& patch = idx.inc[static_cast<size_t>(v)];
      for (size_t s = 0; s < patch.size(); ++s) {
        std::vector<int> dist(patch.size(), -1);
        dist[s] = 0;
        std::deque<size_t> q{s};
        while (!q.empty()) {
          size_t i = q.front();
          q.pop_front();
          for (size_t j = 0; j < patch.size(); ++j)
            if (dist[j] < 0 && idx.shared_vertices(patch[i], patch[j]) >= 2) {
              dist[j] = dist[i] + 1;
              q.push_back(j);
            }
        }
        for (int dv : dist) {
          REQUIRE(dv >= 0);
          best = std::max(best, dv);
        }
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("simplex_distance basics on the refined square") {
  auto [forest, tria] = new_forest(kuhn_cube(2));
  Triangulation t = uniform_refine(tria, 2);
  auto lv = t.leaves();
  REQUIRE(lv.size() == 8);
  // Every leaf of this mesh contains the square center, so all distinct
  // pairs are adjacent.
  for (NodeId a : lv)
    for (NodeId b : lv) CHECK(simplex_distance(t, a, b) == (a == b ? 0 : 1));
}

TEST_CASE("simplex_distance returns -1 across components") {
  SeedTriangulation s;
  s.dim = 2;
  s.points = {ipt({0, 0}), ipt({1, 0}), ipt({0, 1}),
              ipt({10, 0}), ipt({11, 0}), ipt({10, 1})};
  s.simplices = {{0, 1, 2}, {3, 4, 5}};
  s.colors = {2, 0, 1, 2, 0, 1};
  auto [forest, tria] = new_forest(s);
  auto lv = tria.leaves();
  CHECK(simplex_distance(tria, lv[0], lv[1]) == -1);
}

TEST_CASE("mesh size on a uniform mesh") {
  auto [forest, tria] = new_forest(kuhn_cube(2));
  Triangulation t = uniform_refine(tria, 2);
  GradingReport rep = regularized_mesh_size(t);
  for (Gen s : rep.s) CHECK(s == 1);
  CHECK(rep.max_adjacent_s_diff == 0);
  CHECK(rep.h0 == doctest::Approx(std::sqrt(2.0)));
  // All leaves are congruent half-scale Kuhn triangles with hypotenuse
  // sqrt(2)/2 = h, so the envelope collapses to h/diam = 1.
  CHECK(rep.c1 == doctest::Approx(1.0));
  CHECK(rep.c2 == doctest::Approx(1.0));
}

TEST_CASE("fast mesh size matches the brute-force oracle") {
  for (int d : {2, 3}) {
    auto [forest, tria] = new_forest(kuhn_cube(d));
    Triangulation t = random_mesh(tria, d == 2 ? 80 : 60, 1234);
    GradingReport fast = regularized_mesh_size(t);
    GradingReport slow = regularized_mesh_size_bruteforce(t);
    REQUIRE(fast.leaves == slow.leaves);
    CHECK(fast.s == slow.s);
    CHECK(fast.max_adjacent_s_diff == slow.max_adjacent_s_diff);
    CHECK(fast.h0 == slow.h0);
    CHECK(fast.c1 == slow.c1);
    CHECK(fast.c2 == slow.c2);
  }
}

TEST_CASE("regularized mesh size is graded with factor 2") {
  auto [forest, tria] = new_forest(kuhn_cube(3));
  Triangulation t = random_mesh(tria, 120, 77);
  GradingReport rep = regularized_mesh_size(t);
  // s differs by at most one across intersecting leaves by construction,
  // i.e. h(T) <= 2 h(T') for adjacent pairs.
  CHECK(rep.max_adjacent_s_diff <= 1);
  for (size_t i = 0; i < rep.leaves.size(); ++i)
    CHECK(rep.s[i] >= level_of(forest->node(rep.leaves[i]).gen, 3));
}

TEST_CASE("macro dimension classifies lattice vertices") {
  auto [forest, tria] = new_forest(kuhn_cube(3));
  for (NodeId r : forest->roots())
    for (VertId v : forest->verts_of(r)) CHECK(macro_dimension(*forest, v) == 0);
  uniform_refine(tria, 6);
  auto dim_at = [&](std::vector<BigInt> num, unsigned k) {
    DyadicPoint p(std::move(num), k);
    VertId v = forest->find_vertex(p);
    REQUIRE(v >= 0);
    return macro_dimension(*forest, v);
  };
  CHECK(dim_at({1, 1, 1}, 1) == 1);  // cube center, on the main diagonal
  CHECK(dim_at({1, 0, 0}, 1) == 1);  // cube edge midpoint
  CHECK(dim_at({1, 1, 0}, 1) == 1);  // face center, on the face diagonal
  CHECK(dim_at({3, 1, 0}, 2) == 2);  // interior of a boundary face triangle
  CHECK(dim_at({3, 2, 1}, 2) == 3);  // interior of a single root
}

TEST_CASE("level jumps vanish on uniform meshes") {
  auto [forest, tria] = new_forest(kuhn_cube(2));
  // Full rounds only: edge levels within a leaf are constant exactly when
  // the leaf generation is a multiple of d.
  Triangulation t = uniform_refine(tria, 4);
  JumpStats js = level_jump_stats(t);
  for (size_t v = 0; v < js.jump.size(); ++v) {
    if (js.jump[v] < 0) continue;
    CHECK(js.jump[v] == 0);
    CHECK(js.macro_dim[v] >= 0);
  }
  for (Gen m : js.max_by_macro) CHECK(m <= 0);
}

TEST_CASE("level jumps stay bounded on adaptive meshes") {
  auto [forest, tria] = new_forest(kuhn_cube(3));
  Triangulation t = random_mesh(tria, 100, 5);
  JumpStats js = level_jump_stats(t);
  SeedConstants sc = c_of_seed(*forest);
  for (size_t v = 0; v < js.jump.size(); ++v) {
    if (js.jump[v] < 0) continue;
    int n = js.macro_dim[v];
    CHECK(js.jump[v] <= 2 + sc.J[static_cast<size_t>(n)]);
  }
}

TEST_CASE("seed constants of the Kuhn square") {
  auto [forest, tria] = new_forest(kuhn_cube(2));
  SeedConstants sc = c_of_seed(*forest);
  // Exhaustive patch BFS: each corner of the fully refined square touches
  // exactly two triangles which share the corner and the center.
  CHECK(sc.C == 1);
  CHECK(sc.C == oracle_C(*forest));
  CHECK(sc.Cprime == 1);
  REQUIRE(sc.J.size() == 3);
  CHECK(sc.J[0] == 0);  // ceil((1+1)*(1/2)) - 2 clamped at zero
  CHECK(sc.J[1] == 0);
  CHECK(sc.J[2] == 0);
  CHECK(sc.Gamma == 1);
  CHECK(sc.GammaPlus == 2);
}

TEST_CASE("seed constants structure in 3d") {
  auto [forest, tria] = new_forest(kuhn_cube(3));
  SeedConstants sc = c_of_seed(*forest);
  CHECK(sc.C == oracle_C(*forest));
  CHECK(sc.C >= sc.Cprime);
  REQUIRE(sc.J.size() == 4);
  CHECK(sc.J[1] == 2);
  CHECK(sc.J[2] == 0);
  CHECK(sc.J[3] == 0);
  CHECK(sc.Gamma == 1 + sc.J[0] + sc.J[1]);
  CHECK(sc.GammaPlus == sc.Gamma + 1);
}

TEST_CASE("level estimate holds with the seed constant") {
  for (int d : {2, 3}) {
    auto [forest, tria] = new_forest(kuhn_cube(d));
    SeedConstants sc = c_of_seed(*forest);
    Triangulation t = random_mesh(Triangulation::of_roots(*forest),
                                  d == 2 ? 200 : 150, 99);
    CHECK(!verify_level_estimate(t, sc.Gamma).has_value());
  }
}

TEST_CASE("level estimate counterexample pair is genuine") {
  auto [forest, tria] = new_forest(kuhn_cube(2));
  Triangulation t = random_mesh(tria, 60, 11);
  auto viol = verify_level_estimate(t, -1);
  REQUIRE(viol.has_value());
  Gen lc = level_of(forest->node(viol->coarse).gen, 2);
  Gen lf = level_of(forest->node(viol->fine).gen, 2);
  int delta = simplex_distance(t, viol->coarse, viol->fine);
  REQUIRE(delta >= 0);
  CHECK(lf - lc > delta + (-1));
}

TEST_CASE("simplex property scanner is clean on generated meshes") {
  for (int d : {2, 3}) {
    auto [forest, tria] = new_forest(kuhn_cube(d));
    Triangulation t = random_mesh(tria, 80, 21);
    ScanResult r = scan_simplex_properties(t);
    CHECK(r.checks > 0);
    CHECK(r.violations == std::vector<std::string>{});
  }
  auto [forest, tria] = new_forest(kuhn_cube(4));
  ScanResult r = scan_simplex_properties(uniform_refine(tria, 5));
  CHECK(r.violations == std::vector<std::string>{});
}

TEST_CASE("every leaf edge has its aligned ancestor simplex") {
  auto [forest, tria] = new_forest(kuhn_cube(3));
  Triangulation t = random_mesh(tria, 60, 31);
  ScanResult r = scan_type_d_ancestors(t);
  CHECK(r.checks > 0);
  CHECK(r.violations == std::vector<std::string>{});
}

TEST_CASE("per-vertex gensharp gaps respect the macro bounds") {
  for (int d : {2, 3}) {
    auto [forest, tria] = new_forest(kuhn_cube(d));
    SeedConstants sc = c_of_seed(*forest);
    Triangulation t = random_mesh(Triangulation::of_roots(*forest), 100, 41);
    ScanResult r = scan_gensharp_gaps(t, sc.C);
    CHECK(r.checks > 0);
    CHECK(r.violations == std::vector<std::string>{});
  }
}

TEST_CASE("worker thread count honors the environment") {
  setenv("BISECTD_THREADS", "3", 1);
  CHECK(worker_threads() == 3);
  unsetenv("BISECTD_THREADS");
  CHECK(worker_threads() >= 1);
}
