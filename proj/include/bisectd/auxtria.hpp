// Strongly graded auxiliary triangulations around a vertex: a uniform vertex
// patch whose surroundings are refined layer by layer, the layer
// decomposition, pre-diamond detection, and the sharpness-witness chain.
#pragma once

#include "bisectd/analysis.hpp"
#include "bisectd/forest.hpp"

#include <unordered_map>
#include <vector>

namespace bisectd {

// The triangulation obtained from the uniform generation-m*d mesh by `depth`
// rounds that bisect every leaf except the patch leaves not touching the
// patch boundary. Patch leaves that stop touching the boundary are final;
// they form layers of halving width around the base vertex.
struct AuxTriangulation {
  Forest* f = nullptr;
  Triangulation tria;
  VertId v = -1;
  Gen m = 0;
  int depth = 0;
  std::vector<NodeId> patch_roots;  // generation m*d simplices containing v

  // Per patch leaf: layer >= 1 for final interior leaves (level - m),
  // 0 for leaves still touching the patch boundary. Non-patch leaves absent.
  std::unordered_map<NodeId, int> layer;

  // Exact membership of the vertex in the patch boundary (the union of the
  // patch-root faces opposite v). Cached per vertex id.
  bool on_patch_boundary(VertId u) const;
  // True when the generation-m*d ancestor of n is a patch root.
  bool is_patch_node(NodeId n) const;

  std::vector<std::vector<DyadicPoint>> boundary_faces;
  mutable std::unordered_map<VertId, bool> boundary_cache;
  std::vector<char> patch_root_mark;  // node id -> is patch root
};

// Requires level(v) < m. Each round asserts that bisecting the chosen leaves
// keeps the mesh conforming (no closure step); a violation throws
// InvariantViolation.
AuxTriangulation build_aux(Forest& f, VertId v, Gen m, int depth,
                           std::int64_t budget = kDefaultBudget);

struct LayerDecomposition {
  std::vector<NodeId> leaves;  // patch leaves
  std::vector<int> layer;      // parallel to leaves; >= 1 interior, 0 boundary
  int max_layer = 0;
};

// Re-derives layers by BFS distance from the v-containing leaves and
// cross-checks them against the stored (level-based) tags, the per-layer
// level rule, interface vertex levels, and disjointness of layers two
// apart. Any mismatch throws InvariantViolation.
LayerDecomposition decompose_layers(const AuxTriangulation& aux);

// Edges whose full leaf patch agrees on them as the bisection edge.
// Canonical orientation (younger vertex first), ascending id order.
std::vector<EdgeIds> find_pre_diamonds(const Triangulation& tria);

// Chain T_0, ..., T_N of pairwise-intersecting leaves, one per layer, with
// level(T_k) = level(T_0) + k. Requires depth >= d*(N+1) so that layer N+1
// is final; throws std::invalid_argument naming the required depth.
std::vector<NodeId> sharp_chain(const AuxTriangulation& aux, int N);

// Bisection edges relative to layers: a final leaf of layer l with type != d
// has both bisection-edge endpoints of level m+l-1; with type d the edge
// crosses the layer (older endpoint level m+l-1 or the base vertex, younger
// endpoint level m+l).
ScanResult scan_bse_layers(const AuxTriangulation& aux);

// Random edge chains from the base vertex: while the chain stays strictly
// inside the patch, level(e_j) <= m+j; the edge leaving the patch after N
// interior vertices satisfies level(e_N) < m+N.
ScanResult scan_edge_chains(const AuxTriangulation& aux, int chains,
                            int max_len, std::uint64_t seed);

}  // namespace bisectd
