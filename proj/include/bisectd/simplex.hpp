// Bisection procedures on single simplices, independent of any mesh.
//
// Canonical representation: vertex ids sorted by strictly decreasing
// generation. The generation-based rule needs only this sorted form plus the
// head/tail level split. The classic Maubach and Traxler orderings are kept
// as separate ordered representations, materialized for the equivalence
// tests; all three rules must agree on the bisection edge and children.
//
// Vertex generations are looked up through a caller-supplied functor
// (id -> Gen) so these routines work against any vertex store.
#pragma once

#include "bisectd/genarith.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace bisectd {

using VertId = std::int32_t;

// Edge as an id pair ordered by decreasing generation (first is younger).
struct EdgeIds {
  VertId b0 = -1;
  VertId b1 = -1;
  bool operator==(const EdgeIds&) const = default;
};

template <class GenFn>
inline bool is_sorted_by_gen(const std::vector<VertId>& v, GenFn&& gen) {
  for (size_t i = 1; i < v.size(); ++i)
    if (!(gen(v[i - 1]) > gen(v[i]))) return false;
  return true;
}

template <class GenFn>
inline void sort_by_gen(std::vector<VertId>& v, GenFn&& gen) {
  std::sort(v.begin(), v.end(),
            [&](VertId a, VertId b) { return gen(a) > gen(b); });
}

// Generation-based bisection edge of a d-simplex sorted by decreasing
// generation. Returns indices (i0, i1) into the sorted list, i0 younger.
template <class GenFn>
inline std::pair<int, int> bisection_edge_indices(
    const std::vector<VertId>& v, int d, GenFn&& gen) {
  const int last = static_cast<int>(v.size()) - 1;
  if (last != d) throw std::invalid_argument("bisection_edge_indices: need d+1 ids");
  if (level_of(gen(v[last]), d) != level_of(gen(v[last - 1]), d)) {
    return {last - 1, last};  // two oldest vertices
  }
  int t0 = type_of(gen(v[0]), d);  // index of the youngest tail vertex
  return {t0, last};
}

// Children of the generation-based bisection: each child replaces one
// bisection-edge endpoint with the new vertex b (which has the highest
// generation and therefore sorts to the front).
template <class GenFn>
inline std::pair<std::vector<VertId>, std::vector<VertId>> sorted_children(
    const std::vector<VertId>& v, std::pair<int, int> bse_idx, VertId b,
    GenFn&& /*gen*/) {
  std::vector<VertId> c1, c2;
  c1.reserve(v.size());
  c2.reserve(v.size());
  c1.push_back(b);
  c2.push_back(b);
  for (int i = 0; i < static_cast<int>(v.size()); ++i) {
    if (i != bse_idx.first) c1.push_back(v[static_cast<size_t>(i)]);
    if (i != bse_idx.second) c2.push_back(v[static_cast<size_t>(i)]);
  }
  return {std::move(c1), std::move(c2)};
}

// Subsimplex bisection rule for an m-simplex (1 <= m <= d) sorted by
// decreasing generation: the edge split first by the refinement routine and
// the generation of the midpoint it creates.
struct SubBisection {
  EdgeIds bse;
  Gen bsv_gen = 0;
};

template <class GenFn>
inline SubBisection subsimplex_bisection(const std::vector<VertId>& s, int d,
                                         GenFn&& gen) {
  const int m = static_cast<int>(s.size()) - 1;
  if (m < 1 || m > d)
    throw std::invalid_argument("subsimplex_bisection: need 1 <= m <= d");
  const Gen gm = gen(s[static_cast<size_t>(m)]);
  const Gen gm1 = gen(s[static_cast<size_t>(m - 1)]);
  if (level_of(gm, d) != level_of(gm1, d)) {
    return {{s[static_cast<size_t>(m - 1)], s[static_cast<size_t>(m)]},
            gm1 + d};
  }
  // Youngest vertex of the tail: first index whose level equals level(v_m).
  const Gen lvl_m = level_of(gm, d);
  int ell = 0;
  while (level_of(gen(s[static_cast<size_t>(ell)]), d) != lvl_m) ++ell;
  return {{s[static_cast<size_t>(ell)], s[static_cast<size_t>(m)]},
          gm + 2 * d + 1 - type_of(gen(s[static_cast<size_t>(ell)]), d)};
}

// #-generation of a sorted m-simplex: the generation of the bisection vertex
// it will produce. For edges this is an "age until split" measure.
template <class GenFn>
inline Gen gensharp(const std::vector<VertId>& s, int d, GenFn&& gen) {
  return subsimplex_bisection(s, d, gen).bsv_gen;
}

template <class GenFn>
inline Gen gensharp_edge(VertId a, VertId b, int d, GenFn&& gen) {
  std::vector<VertId> e{a, b};
  if (gen(a) < gen(b)) std::swap(e[0], e[1]);
  return gensharp(e, d, gen);
}

inline Gen levelsharp_of(Gen gensharp_val, int d) { return level_of(gensharp_val, d); }
inline int typesharp_of(Gen gensharp_val, int d) { return type_of(gensharp_val, d); }

// ---------------------------------------------------------------------------
// Ordered representations for the equivalence tests.

struct OrderedSimplex {
  std::vector<VertId> v;
  Gen gen = 0;
};

struct OrderedBisection {
  OrderedSimplex child1, child2;
  EdgeIds bse;  // (v0, v_split) in list order, not generation order
};

// Maubach ordering: k = d - (gen mod d), bse = [v0, vk],
// T1 = [v0,...,v_{k-1}, v', v_{k+1},...,v_d],
// T2 = [v1,...,v_k,     v', v_{k+1},...,v_d].
inline OrderedBisection bisect_maubach(const OrderedSimplex& t, int d,
                                       VertId vnew) {
  const int k = maubach_k(t.gen, d);
  OrderedBisection r;
  r.bse = {t.v[0], t.v[static_cast<size_t>(k)]};
  auto& c1 = r.child1.v;
  auto& c2 = r.child2.v;
  for (int i = 0; i <= d; ++i)
    c1.push_back(i == k ? vnew : t.v[static_cast<size_t>(i)]);
  for (int i = 1; i <= k; ++i) c2.push_back(t.v[static_cast<size_t>(i)]);
  c2.push_back(vnew);
  for (int i = k + 1; i <= d; ++i) c2.push_back(t.v[static_cast<size_t>(i)]);
  r.child1.gen = r.child2.gen = t.gen + 1;
  return r;
}

// Traxler ordering: gamma = gen mod d, bse = [v0, vd],
// T1 = [v0, v', v1,...,v_gamma, v_{gamma+1},...,v_{d-1}],
// T2 = [vd, v', v1,...,v_gamma, v_{d-1},...,v_{gamma+1}].
inline OrderedBisection bisect_traxler(const OrderedSimplex& t, int d,
                                       VertId vnew) {
  const int g = traxler_gamma(t.gen, d);
  OrderedBisection r;
  r.bse = {t.v[0], t.v[static_cast<size_t>(d)]};
  auto& c1 = r.child1.v;
  auto& c2 = r.child2.v;
  c1.push_back(t.v[0]);
  c1.push_back(vnew);
  for (int i = 1; i <= d - 1; ++i) c1.push_back(t.v[static_cast<size_t>(i)]);
  c2.push_back(t.v[static_cast<size_t>(d)]);
  c2.push_back(vnew);
  for (int i = 1; i <= g; ++i) c2.push_back(t.v[static_cast<size_t>(i)]);
  for (int i = d - 1; i >= g + 1; --i) c2.push_back(t.v[static_cast<size_t>(i)]);
  r.child1.gen = r.child2.gen = t.gen + 1;
  return r;
}

}  // namespace bisectd
