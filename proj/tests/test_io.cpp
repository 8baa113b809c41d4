#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bisectd/auxtria.hpp"
#include "bisectd/io.hpp"
#include "bisectd/seed.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

using namespace bisectd;

namespace {

struct TmpFile {
  std::string path;
  explicit TmpFile(const std::string& name) : path("/tmp/bisectd_" + name) {}
  ~TmpFile() { std::remove(path.c_str()); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
}

}  // namespace

TEST_CASE("seed round trip without a forest section") {
  auto [forest, tria] = new_forest(kuhn_cube(3));
  TmpFile tf("seed.json");
  save_mesh(tria, tf.path, /*with_forest=*/false);
  LoadedMesh back = load_mesh(tf.path);
  Forest& g = *back.forest;
  REQUIRE(g.dim() == 3);
  REQUIRE(back.tria.leaf_count() == tria.leaf_count());
  // Same vertices (exact coordinates and generations) and same root
  // vertex sets, simplex by simplex.
  REQUIRE(g.num_vertices() == forest->num_vertices());
  auto lv0 = tria.leaves();
  auto lv1 = back.tria.leaves();
  for (size_t i = 0; i < lv0.size(); ++i) {
    auto a = forest->points_of(lv0[i]);
    auto b = g.points_of(lv1[i]);
    CHECK(a == b);
    auto va = forest->verts_of(lv0[i]);
    auto vb = g.verts_of(lv1[i]);
    for (size_t k = 0; k < va.size(); ++k)
      CHECK(forest->vgen(va[k]) == g.vgen(vb[k]));
  }
  CHECK(is_conforming(back.tria).ok);
}

TEST_CASE("forest round trip preserves ids, generations, and leaves") {
  auto [forest, tria] = new_forest(kuhn_cube(3));
  std::mt19937_64 rng(4242);
  Triangulation t = tria;
  for (int i = 0; i < 100; ++i) {
    auto lv = t.leaves();
    t = bisect_with_closure(t, lv[rng() % lv.size()]);
  }
  TmpFile tf("forest.json");
  save_mesh(t, tf.path);
  LoadedMesh back = load_mesh(tf.path);
  Forest& g = *back.forest;
  REQUIRE(g.num_nodes() == forest->num_nodes());
  REQUIRE(g.num_vertices() == forest->num_vertices());
  for (std::int32_t v = 0; v < g.num_vertices(); ++v) {
    CHECK(g.vertex(v).point == forest->vertex(v).point);
    CHECK(g.vgen(v) == forest->vgen(v));
  }
  for (NodeId n = 0; n < g.num_nodes(); ++n) {
    CHECK(g.node(n).gen == forest->node(n).gen);
    CHECK(g.node(n).parent == forest->node(n).parent);
    CHECK(g.node(n).child == forest->node(n).child);
    CHECK(g.verts_of(n) == forest->verts_of(n));
  }
  CHECK(back.tria.leaves() == t.leaves());
  CHECK(is_conforming(back.tria).ok);
}

TEST_CASE("saving is byte deterministic") {
  TmpFile a("det_a.json"), b("det_b.json");
  {
    auto [forest, tria] = new_forest(kuhn_cube(2));
    save_mesh(uniform_refine(tria, 3), a.path);
  }
  {
    auto [forest, tria] = new_forest(kuhn_cube(2));
    save_mesh(uniform_refine(tria, 3), b.path);
  }
  CHECK(slurp(a.path) == slurp(b.path));
}

TEST_CASE("float coordinates are rejected") {
  TmpFile tf("float.json");
  spit(tf.path, R"({
    "dimension": 2, "format": "bisectd-mesh", "version": 1,
    "vertices": [
      {"exponent": 0, "generation": -2, "numerators": [0.5, "0"]},
      {"exponent": 0, "generation": 0, "numerators": ["1", "0"]},
      {"exponent": 0, "generation": -1, "numerators": ["1", "1"]}],
    "simplices": [[0, 1, 2]]})");
  CHECK_THROWS_AS(load_mesh(tf.path), FormatError);
  // The same document with decimal strings loads fine.
  spit(tf.path, R"({
    "dimension": 2, "format": "bisectd-mesh", "version": 1,
    "vertices": [
      {"exponent": 0, "generation": -2, "numerators": ["0", "0"]},
      {"exponent": 0, "generation": 0, "numerators": ["1", "0"]},
      {"exponent": 0, "generation": -1, "numerators": ["1", "1"]}],
    "simplices": [[0, 1, 2]]})");
  CHECK(load_mesh(tf.path).tria.leaf_count() == 1);
}

TEST_CASE("malformed documents raise format errors") {
  TmpFile tf("bad.json");
  spit(tf.path, "{not json");
  CHECK_THROWS_AS(load_mesh(tf.path), FormatError);
  spit(tf.path, R"({"format": "something-else", "version": 1})");
  CHECK_THROWS_AS(load_mesh(tf.path), FormatError);
  spit(tf.path, R"({"dimension": 2, "format": "bisectd-mesh", "version": 99,
                    "vertices": [], "simplices": []})");
  CHECK_THROWS_AS(load_mesh(tf.path), FormatError);
  CHECK_THROWS_AS(load_mesh("/tmp/bisectd_does_not_exist.json"), FormatError);
}

TEST_CASE("corrupted forest genealogy is rejected") {
  auto [forest, tria] = new_forest(kuhn_cube(2));
  Triangulation t = uniform_refine(tria, 2);
  TmpFile tf("corrupt.json");
  save_mesh(t, tf.path);
  nlohmann::json doc = nlohmann::json::parse(slurp(tf.path));
  // Flip one recorded node generation: the replayed bisection disagrees.
  doc["forest"]["nodes"][3]["generation"] =
      doc["forest"]["nodes"][3]["generation"].get<Gen>() + 1;
  spit(tf.path, doc.dump(1) + "\n");
  CHECK_THROWS_AS(load_mesh(tf.path), FormatError);
}

TEST_CASE("vtk export writes triangle cells with cell data") {
  auto [forest, tria] = new_forest(kuhn_cube(2));
  Triangulation t = uniform_refine(tria, 2);
  GradingReport rep = regularized_mesh_size(t);
  std::vector<std::int64_t> s(rep.s.begin(), rep.s.end());
  TmpFile tf("mesh.vtk");
  export_vtk(t, tf.path, {{"s_exponent", s}});
  std::string body = slurp(tf.path);
  CHECK(body.find("# vtk DataFile Version 2.0") == 0);
  CHECK(body.find("DATASET UNSTRUCTURED_GRID") != std::string::npos);
  CHECK(body.find("POINTS 9 double") != std::string::npos);
  CHECK(body.find("CELLS 8 32") != std::string::npos);
  CHECK(body.find("CELL_TYPES 8") != std::string::npos);
  CHECK(body.find("SCALARS generation int 1") != std::string::npos);
  CHECK(body.find("SCALARS level int 1") != std::string::npos);
  CHECK(body.find("SCALARS type int 1") != std::string::npos);
  CHECK(body.find("SCALARS s_exponent int 1") != std::string::npos);
  // Mismatched cell array length is refused.
  s.pop_back();
  CHECK_THROWS_AS(export_vtk(t, tf.path, {{"s_exponent", s}}),
                  std::invalid_argument);
}

TEST_CASE("vtk export of an aux mesh carries the layer array") {
  auto [forest, tria] = new_forest(kuhn_cube(2));
  std::vector<BigInt> z{0, 0};
  VertId v = forest->find_vertex(DyadicPoint::integer(std::move(z)));
  REQUIRE(v >= 0);
  AuxTriangulation aux = build_aux(*forest, v, 0, 6);
  std::vector<NodeId> lv = aux.tria.leaves();
  std::vector<std::int64_t> layer(lv.size(), -1);
  for (size_t i = 0; i < lv.size(); ++i) {
    auto it = aux.layer.find(lv[i]);
    if (it != aux.layer.end()) layer[i] = it->second;
  }
  TmpFile tf("aux.vtk");
  export_vtk(aux.tria, tf.path, {{"layer", layer}});
  CHECK(slurp(tf.path).find("SCALARS layer int 1") != std::string::npos);
}

TEST_CASE("vtk export above dimension three keeps the vertex skeleton") {
  auto [forest, tria] = new_forest(kuhn_cube(4));
  TmpFile tf("d4.vtk");
  export_vtk(tria, tf.path);
  std::string body = slurp(tf.path);
  CHECK(body.find("POINTS 16 double") != std::string::npos);
  CHECK(body.find("CELLS 16 32") != std::string::npos);
  CHECK(body.find("CELL_DATA") == std::string::npos);
}

TEST_CASE("csv report lists every leaf") {
  auto [forest, tria] = new_forest(kuhn_cube(2));
  Triangulation t = uniform_refine(tria, 2);
  GradingReport rep = regularized_mesh_size(t);
  TmpFile tf("report.csv");
  export_csv(t, tf.path, &rep);
  std::istringstream in(slurp(tf.path));
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "node,generation,level,type,diameter,s");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    // gen 2 = level 1, type 2, s = 1 on this uniform mesh
    CHECK(line.find(",2,1,2,") != std::string::npos);
    CHECK(line.substr(line.size() - 2) == ",1");
  }
  CHECK(rows == 8);
}
