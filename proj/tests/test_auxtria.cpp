#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bisectd/auxtria.hpp"
#include "bisectd/geometry.hpp"
#include "bisectd/seed.hpp"

#include <algorithm>
#include <set>

using namespace bisectd;

namespace {

VertId origin_vertex(const Forest& f) {
  std::vector<BigInt> z(static_cast<size_t>(f.dim()), BigInt(0));
  VertId v = f.find_vertex(DyadicPoint::integer(std::move(z)));
  REQUIRE(v >= 0);
  return v;
}

}  // namespace

TEST_CASE("build_aux at depth zero is the uniform patch mesh") {
  auto [forest, tria] = new_forest(kuhn_cube(2));
  AuxTriangulation aux = build_aux(*forest, origin_vertex(*forest), 0, 0);
  CHECK(aux.tria.leaf_count() == 2);
  CHECK(aux.patch_roots.size() == 2);  // the origin lies in every root
  // Both roots touch the far faces, so everything is in the boundary band.
  for (const auto& [n, ell] : aux.layer) CHECK(ell == 0);
}

TEST_CASE("build_aux rejects a vertex that is too young") {
  auto [forest, tria] = new_forest(kuhn_cube(2));
  uniform_refine(tria, 2);
  std::vector<BigInt> c{1, 1};
  VertId center = forest->find_vertex(DyadicPoint(std::move(c), 1));
  REQUIRE(center >= 0);
  // level(center) = 1, so m = 1 is not allowed.
  CHECK_THROWS_AS(build_aux(*forest, center, 1, 2), std::invalid_argument);
  AuxTriangulation aux = build_aux(*forest, center, 2, 2);
  CHECK(is_conforming(aux.tria).ok);
}

TEST_CASE("boundary-band leaves carry generation m*d + depth") {
  auto [forest, tria] = new_forest(kuhn_cube(2));
  AuxTriangulation aux = build_aux(*forest, origin_vertex(*forest), 1, 4);
  int band = 0;
  for (const auto& [n, ell] : aux.layer) {
    if (ell == 0) {
      ++band;
      CHECK(forest->node(n).gen == 1 * 2 + 4);
    }
  }
  CHECK(band > 0);
  CHECK(is_conforming(aux.tria).ok);
}

TEST_CASE("layer decomposition: halving layers around the origin") {
  for (auto [d, j, want] : {std::tuple{2, 12, 6}, {3, 9, 3}}) {
    auto [forest, tria] = new_forest(kuhn_cube(d));
    AuxTriangulation aux = build_aux(*forest, origin_vertex(*forest), 0, j);
    CHECK(is_conforming(aux.tria).ok);
    LayerDecomposition dec = decompose_layers(aux);  // throws on mismatch
    CHECK(dec.max_layer == want);                    // j/d layers at depth j
    CHECK(dec.leaves.size() == static_cast<size_t>(aux.tria.leaf_count()));
  }
}

TEST_CASE("sharp chain witnesses unit level increments") {
  auto [forest, tria] = new_forest(kuhn_cube(2));
  AuxTriangulation aux = build_aux(*forest, origin_vertex(*forest), 0, 12);
  std::vector<NodeId> chain = sharp_chain(aux, 4);
  REQUIRE(chain.size() == 5);
  for (size_t k = 0; k < chain.size(); ++k)
    CHECK(level_of(forest->node(chain[k]).gen, 2) ==
          level_of(forest->node(chain[0]).gen, 2) + static_cast<Gen>(k));
  // Consecutive members intersect (share a vertex).
  for (size_t k = 1; k < chain.size(); ++k) {
    auto a = forest->verts_of(chain[k - 1]);
    auto b = forest->verts_of(chain[k]);
    bool share = false;
    for (VertId x : a)
      for (VertId y : b)
        if (x == y) share = true;
    CHECK(share);
  }
  CHECK_THROWS_AS(sharp_chain(aux, 6), std::invalid_argument);
}

TEST_CASE("auxiliary triangulations attain grading two exactly") {
  auto [forest, tria] = new_forest(kuhn_cube(2));
  AuxTriangulation aux = build_aux(*forest, origin_vertex(*forest), 0, 12);
  GradingReport rep = regularized_mesh_size(aux.tria);
  CHECK(rep.max_adjacent_s_diff == 1);  // measured grading = 2^1
}

TEST_CASE("uniform type-d mesh: every bisection edge patch is a pre-diamond") {
  auto [forest, tria] = new_forest(kuhn_cube(2));
  Triangulation t = uniform_refine(tria, 4);
  std::vector<EdgeIds> pd = find_pre_diamonds(t);
  std::set<std::pair<VertId, VertId>> bses;
  for (NodeId n : t.leaves()) {
    EdgeIds e = forest->bse(n);
    bses.insert(std::minmax(e.b0, e.b1));
  }
  CHECK(pd.size() == bses.size());
  for (EdgeIds e : pd) {
    CHECK(type_of(forest->vgen(e.b0), 2) == 1);
    CHECK(bses.count(std::minmax(e.b0, e.b1)) == 1);
  }
}

TEST_CASE("pre-diamond patch members share one generation") {
  auto [forest, tria] = new_forest(kuhn_cube(3));
  Triangulation t = tria;
  for (int i = 0; i < 40; ++i) {
    auto lv = t.leaves();
    t = bisect_with_closure(t, lv[static_cast<size_t>((7 * i) % lv.size())]);
  }
  LeafIndex idx(t);
  for (EdgeIds e : find_pre_diamonds(t)) {
    Gen g = -1;
    for (std::int32_t i : idx.inc[static_cast<size_t>(e.b0)]) {
      NodeId n = idx.leaves[static_cast<size_t>(i)];
      if (!forest->node_has_vertex(n, e.b1)) continue;
      if (g < 0) g = forest->node(n).gen;
      CHECK(forest->node(n).gen == g);
    }
  }
}

TEST_CASE("interior pre-diamonds of an aux mesh sit on the type-one diagonal") {
  auto [forest, tria] = new_forest(kuhn_cube(2));
  VertId v = origin_vertex(*forest);
  AuxTriangulation aux = build_aux(*forest, v, 0, 8);
  LeafIndex idx(aux.tria);
  int interior_found = 0;
  for (EdgeIds e : find_pre_diamonds(aux.tria)) {
    bool interior = true;
    for (std::int32_t i : idx.inc[static_cast<size_t>(e.b0)]) {
      NodeId n = idx.leaves[static_cast<size_t>(i)];
      if (!forest->node_has_vertex(n, e.b1)) continue;
      auto it = aux.layer.find(n);
      if (it == aux.layer.end() || it->second < 1) interior = false;
    }
    if (!interior) continue;
    ++interior_found;
    // Both endpoints lie on the segment from the origin to (1,1).
    for (VertId u : {e.b0, e.b1}) {
      const DyadicPoint& p = forest->vertex(u).point;
      CHECK(p.coord(0) == p.coord(1));
      CHECK(p.coord(0) >= 0);
      CHECK(p.coord(0) <= 1);
    }
  }
  CHECK(interior_found > 0);
}

TEST_CASE("bisection edges respect the layer interfaces") {
  for (auto [d, j] : {std::pair{2, 12}, {3, 9}}) {
    auto [forest, tria] = new_forest(kuhn_cube(d));
    AuxTriangulation aux = build_aux(*forest, origin_vertex(*forest), 0, j);
    ScanResult r = scan_bse_layers(aux);
    CHECK(r.checks > 0);
    CHECK(r.violations == std::vector<std::string>{});
  }
}

TEST_CASE("edge chains obey the staying and leaving level bounds") {
  auto [forest, tria] = new_forest(kuhn_cube(2));
  AuxTriangulation aux = build_aux(*forest, origin_vertex(*forest), 0, 12);
  ScanResult r = scan_edge_chains(aux, 300, 10, 2024);
  CHECK(r.checks > 0);
  CHECK(r.violations == std::vector<std::string>{});
}

TEST_CASE("aux triangulation refines meshes graded around the vertex") {
  auto [forest, tria] = new_forest(kuhn_cube(2));
  VertId v = origin_vertex(*forest);
  Triangulation t = tria;
  for (int i = 0; i < 10; ++i) {
    // Always refine a leaf containing the origin: grading concentrates at v.
    for (NodeId n : t.leaves())
      if (forest->node_has_vertex(n, v)) {
        t = bisect_with_closure(t, n);
        break;
      }
  }
  // Per-mesh jump and minimal edge level at v.
  Gen minlvl = 0, maxlvl = 0;
  bool first = true;
  Gen maxgen = 0;
  for (NodeId n : t.leaves()) {
    maxgen = std::max(maxgen, forest->node(n).gen);
    if (!forest->node_has_vertex(n, v)) continue;
    for (VertId u : forest->verts_of(n)) {
      if (u == v) continue;
      Gen lvl = level_of(std::max(forest->vgen(u), forest->vgen(v)), 2);
      if (first) {
        minlvl = maxlvl = lvl;
        first = false;
      } else {
        minlvl = std::min(minlvl, lvl);
        maxlvl = std::max(maxlvl, lvl);
      }
    }
  }
  Gen jump = maxlvl - minlvl;
  Gen m = std::max(level_of(forest->vgen(v), 2) + 1, jump + minlvl - 1);
  int depth = static_cast<int>(std::max<Gen>(0, maxgen - m * 2));
  AuxTriangulation aux = build_aux(*forest, v, m, depth);
  CHECK(is_refinement(t, aux.tria));
}
