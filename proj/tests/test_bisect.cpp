#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bisectd/simplex.hpp"

#include <map>
#include <set>

using namespace bisectd;

namespace {

// Standalone vertex-generation table for single-simplex tests.
struct GenTable {
  std::map<VertId, Gen> g;
  Gen operator()(VertId v) const { return g.at(v); }
};

}  // namespace

TEST_CASE("generation-based bisection edge: level jump at the end") {
  // Sorted d=3 Kuhn simplex with gens (0,-1,-2,-3): levels (0,0,0,-1),
  // level(v3) != level(v2) -> bse = (v2, v3).
  GenTable t{{{10, 0}, {11, -1}, {12, -2}, {13, -3}}};
  std::vector<VertId> v{10, 11, 12, 13};
  auto [i0, i1] = bisection_edge_indices(v, 3, t);
  CHECK(i0 == 2);
  CHECK(i1 == 3);
}

TEST_CASE("generation-based bisection edge: equal end levels") {
  // Gens (5,4,3,2) in d=3: levels (2,2,1,1); level(v3)==level(v2),
  // type(v0)=type(5)=2 -> bse = (v2, v3).
  GenTable t{{{0, 5}, {1, 4}, {2, 3}, {3, 2}}};
  std::vector<VertId> v{0, 1, 2, 3};
  auto [i0, i1] = bisection_edge_indices(v, 3, t);
  CHECK(i0 == type_of(5, 3));
  CHECK(i0 == 2);
  CHECK(i1 == 3);
}

TEST_CASE("sorted children drop one bse endpoint and front the new vertex") {
  GenTable t{{{10, 0}, {11, -1}, {12, -2}, {13, -3}, {99, 1}}};
  std::vector<VertId> v{10, 11, 12, 13};
  auto bidx = bisection_edge_indices(v, 3, t);
  auto [c1, c2] = sorted_children(v, bidx, 99, t);
  CHECK(c1 == std::vector<VertId>{99, 10, 11, 13});  // dropped v2 = 12
  CHECK(c2 == std::vector<VertId>{99, 10, 11, 12});  // dropped v3 = 13
  CHECK(is_sorted_by_gen(c1, t));
  CHECK(is_sorted_by_gen(c2, t));
}

TEST_CASE("subsimplex rule on the d=3 Kuhn simplex edges") {
  // Vertices of the sorted Kuhn simplex with generations 0,-1,-2,-3.
  GenTable t{{{0, 0}, {1, -1}, {2, -2}, {3, -3}}};
  const int d = 3;

  // Edge (gen -2 | gen -3): levels 0 and -1 differ -> gen(b) = -2+3 = 1.
  CHECK(gensharp({2, 3}, d, t) == 1);
  // Edge (gen 0, gen -1): levels both 0; youngest of tail is v0 (type 3)
  // -> gen(b) = -1 + 7 - 3 = 3.
  CHECK(gensharp({0, 1}, d, t) == 3);
  // Edge (gen -1 | gen -3): levels differ -> gen(b) = -1+3 = 2.
  CHECK(gensharp({1, 3}, d, t) == 2);

  // The full multiset over the six edges is {3,3,3,1,2,2}.
  std::multiset<Gen> sharps;
  for (VertId a = 0; a < 4; ++a)
    for (VertId b = a + 1; b < 4; ++b) sharps.insert(gensharp({a, b}, d, t));
  CHECK(sharps == std::multiset<Gen>{1, 2, 2, 3, 3, 3});
}

TEST_CASE("gensharp_edge sorts its endpoints") {
  GenTable t{{{7, -2}, {8, -3}}};
  CHECK(gensharp_edge(8, 7, 3, t) == 1);
  CHECK(gensharp_edge(7, 8, 3, t) == 1);
}

TEST_CASE("levelsharp and typesharp arithmetic") {
  CHECK(levelsharp_of(3, 3) == 1);
  CHECK(typesharp_of(3, 3) == 3);
  CHECK(levelsharp_of(1, 3) == 1);
  CHECK(typesharp_of(1, 3) == 1);
}

TEST_CASE("maubach ordering on the d=2 unit triangle") {
  // T = [(0,0),(1,0),(1,1)] as ids 0,1,2 with gen 0: k=2, bse=[v0,v2],
  // T1=[v0,v1,v'], T2=[v1,v2,v'].
  OrderedSimplex t{{0, 1, 2}, 0};
  OrderedBisection r = bisect_maubach(t, 2, 9);
  CHECK(r.bse == EdgeIds{0, 2});
  CHECK(r.child1.v == std::vector<VertId>{0, 1, 9});
  CHECK(r.child2.v == std::vector<VertId>{1, 2, 9});
  CHECK(r.child1.gen == 1);
  CHECK(r.child2.gen == 1);
}

TEST_CASE("traxler ordering on the d=2 unit triangle") {
  // gamma = 0: T1=[v0,v',v1], T2=[v2,v',v1].
  OrderedSimplex t{{0, 1, 2}, 0};
  OrderedBisection r = bisect_traxler(t, 2, 9);
  CHECK(r.bse == EdgeIds{0, 2});
  CHECK(r.child1.v == std::vector<VertId>{0, 9, 1});
  CHECK(r.child2.v == std::vector<VertId>{2, 9, 1});
}

TEST_CASE("traxler reversed block for gamma > 0") {
  // d=3, gen 1 -> gamma=1: T1=[v0,v',v1,v2], T2=[v3,v',v1,v2]; for gen 2
  // (gamma=2): T1=[v0,v',v1,v2], T2=[v3,v',v1,v2] with block reversal
  // T2=[v3,v',v1,v2] vs [v3,v',v1,v2]... exercised below numerically.
  OrderedSimplex t{{0, 1, 2, 3}, 1};
  OrderedBisection r = bisect_traxler(t, 3, 9);
  CHECK(r.bse == EdgeIds{0, 3});
  CHECK(r.child1.v == std::vector<VertId>{0, 9, 1, 2});
  CHECK(r.child2.v == std::vector<VertId>{3, 9, 1, 2});

  OrderedSimplex u{{0, 1, 2, 3}, 3};  // gamma = 0
  OrderedBisection s = bisect_traxler(u, 3, 9);
  CHECK(s.child1.v == std::vector<VertId>{0, 9, 1, 2});
  CHECK(s.child2.v == std::vector<VertId>{3, 9, 2, 1});  // reversed block
}

TEST_CASE("maubach split for d=3 interior generation") {
  OrderedSimplex t{{0, 1, 2, 3}, 1};  // k = 2
  OrderedBisection r = bisect_maubach(t, 3, 9);
  CHECK(r.bse == EdgeIds{0, 2});
  CHECK(r.child1.v == std::vector<VertId>{0, 1, 9, 3});
  CHECK(r.child2.v == std::vector<VertId>{1, 2, 9, 3});
}
