// Master-tree forest store and triangulation views.
//
// The forest is an append-only arena of simplex nodes rooted at the initial
// triangulation. Bisecting a node creates its two children at most once;
// every triangulation over the same seed shares the arena, which is what
// makes the join/meet lattice operations cheap bitmap operations on forest
// node sets. A Triangulation is a leaf bitmap over the arena.
#pragma once

#include "bisectd/dyadic.hpp"
#include "bisectd/errors.hpp"
#include "bisectd/simplex.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace bisectd {

inline constexpr int kMaxDim = 8;
inline constexpr std::int64_t kDefaultBudget = std::int64_t(1) << 24;

using NodeId = std::int32_t;

struct Vertex {
  DyadicPoint point;
  Gen gen = 0;
};

struct SimplexNode {
  std::array<VertId, kMaxDim + 1> v{};  // sorted by decreasing generation
  Gen gen = 0;
  NodeId parent = -1;
  NodeId child = -1;  // first of two consecutively stored children
};

class Forest {
 public:
  explicit Forest(int dim);

  int dim() const { return dim_; }

  // Vertices ----------------------------------------------------------------
  VertId intern_vertex(const DyadicPoint& p, Gen gen);
  VertId find_vertex(const DyadicPoint& p) const;  // -1 if absent
  const Vertex& vertex(VertId id) const { return verts_[static_cast<size_t>(id)]; }
  Gen vgen(VertId id) const { return verts_[static_cast<size_t>(id)].gen; }
  std::int32_t num_vertices() const { return static_cast<std::int32_t>(verts_.size()); }

  // Nodes -------------------------------------------------------------------
  const SimplexNode& node(NodeId id) const { return nodes_[static_cast<size_t>(id)]; }
  NodeId num_nodes() const { return static_cast<NodeId>(nodes_.size()); }
  const std::vector<NodeId>& roots() const { return roots_; }
  NodeId add_root(const std::vector<VertId>& sorted_verts);

  // Create the two children of n if absent; returns the first child id.
  // The bisection vertex gets generation gen(n) + 1, consistency with any
  // previously interned vertex at the midpoint is asserted.
  NodeId ensure_children(NodeId n);

  // Bisection edge vertex ids of node n (generation-based rule).
  EdgeIds bse(NodeId n) const;

  std::vector<VertId> verts_of(NodeId n) const;
  std::vector<DyadicPoint> points_of(NodeId n) const;
  bool node_has_vertex(NodeId n, VertId v) const;

  std::int64_t bisections_performed() const { return bisections_; }

 private:
  int dim_;
  std::vector<Vertex> verts_;
  std::unordered_map<DyadicPoint, VertId, DyadicPointHash> vert_index_;
  std::vector<SimplexNode> nodes_;
  std::vector<NodeId> roots_;
  std::int64_t bisections_ = 0;
};

class Triangulation {
 public:
  Triangulation() = default;
  Triangulation(Forest* f, std::vector<std::uint64_t> bits, std::int64_t count)
      : f_(f), bits_(std::move(bits)), count_(count) {}

  static Triangulation of_roots(Forest& f);

  Forest& forest() const { return *f_; }
  std::int64_t leaf_count() const { return count_; }

  bool is_leaf(NodeId n) const {
    size_t w = static_cast<size_t>(n) >> 6;
    if (w >= bits_.size()) return false;
    return (bits_[w] >> (n & 63)) & 1u;
  }

  std::vector<NodeId> leaves() const;  // ascending node id
  const std::vector<std::uint64_t>& bits() const { return bits_; }

 private:
  Forest* f_ = nullptr;
  std::vector<std::uint64_t> bits_;
  std::int64_t count_ = 0;
};

// Refinement ----------------------------------------------------------------

// Bisect `target` and restore conformity recursively; returns the smallest
// conforming refinement of `tria` in which target is bisected.
Triangulation bisect_with_closure(const Triangulation& tria, NodeId target,
                                  std::int64_t budget = kDefaultBudget);

// Bisect every marked leaf at least once, with closure after each.
Triangulation refine_marked(const Triangulation& tria,
                            const std::vector<NodeId>& marks,
                            std::int64_t budget = kDefaultBudget);

// n rounds of bisecting every leaf exactly once. Throws NeedsClosure if any
// round would leave a hanging vertex (only possible for inadmissible seeds
// or non-uniform inputs).
Triangulation uniform_refine(const Triangulation& tria, int steps,
                             std::int64_t budget = kDefaultBudget);

// Incremental refinement engine: keeps the vertex->leaf incidence alive
// across many refinement calls, which is what the large random-refinement
// runs need. All single-shot functions above are wrappers.
class Refiner {
 public:
  explicit Refiner(const Triangulation& tria, std::int64_t budget = kDefaultBudget);

  void refine_leaf(NodeId target);           // closure refinement of one leaf
  bool is_leaf(NodeId n) const { return leaf(n); }
  NodeId random_leaf(std::uint64_t raw) const;  // dense leaf list lookup
  const std::vector<NodeId>& leaf_list() const { return leaf_list_; }
  std::int64_t leaf_count() const { return static_cast<std::int64_t>(leaf_list_.size()); }
  std::int64_t bisections_used() const { return used_; }
  Triangulation snapshot() const;

 private:
  bool leaf(NodeId n) const {
    size_t w = static_cast<size_t>(n) >> 6;
    return w < bits_.size() && ((bits_[w] >> (n & 63)) & 1u);
  }
  void set_leaf(NodeId n, bool on);
  std::vector<NodeId> edge_patch(VertId a, VertId b);
  void bisect_leaf_raw(NodeId n);
  void refine_recursive(NodeId n, int depth);

  Forest& f_;
  std::vector<std::uint64_t> bits_;
  std::vector<NodeId> leaf_list_;          // dense, order not meaningful
  std::vector<std::int32_t> leaf_pos_;     // node id -> index in leaf_list_
  std::vector<std::vector<NodeId>> inc_;   // vertex -> candidate leaves (stale ok)
  std::int64_t budget_;
  std::int64_t used_ = 0;
};

// Conformity ----------------------------------------------------------------

struct ConformityReport {
  bool ok = true;
  std::string violation;  // empty when ok
};

// Exact conformity check: (a) leaf volumes partition each root exactly,
// (b) every leaf hyperface is shared by at most two leaves, and faces owned
// by a single leaf lie on the domain boundary (exact membership in root
// boundary faces). Holds a per-vertex boundary membership cache so repeated
// checks over a growing mesh stay affordable.
class ConformityChecker {
 public:
  explicit ConformityChecker(Forest& f);
  ConformityReport check(const Triangulation& tria);
  // Additionally locate every vertex in the mesh and require it to be a
  // vertex of each leaf whose closed hull contains it. Quadratic-ish; meant
  // for moderate meshes and unit tests.
  ConformityReport check_thorough(const Triangulation& tria);

 private:
  bool vertex_on_boundary_face(VertId v, std::int32_t face);
  Forest& f_;
  std::vector<std::vector<VertId>> boundary_faces_;  // root hyperfaces on domain boundary
  std::vector<std::vector<std::int32_t>> on_face_;   // vertex -> boundary face ids
  std::int32_t cached_verts_ = 0;
};

ConformityReport is_conforming(const Triangulation& tria);

// Lattice -------------------------------------------------------------------

Triangulation join(const Triangulation& a, const Triangulation& b);
Triangulation meet(const Triangulation& a, const Triangulation& b);
// True iff `fine` refines `coarse` (every forest node of coarse is a forest
// node of fine).
bool is_refinement(const Triangulation& coarse, const Triangulation& fine);

// Forest-node set of a triangulation (ancestors-or-self of its leaves),
// as a bitmap over the arena. Exposed for tests.
std::vector<std::uint64_t> forest_set(const Triangulation& t);

}  // namespace bisectd
