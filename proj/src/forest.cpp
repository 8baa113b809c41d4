#include "bisectd/forest.hpp"

#include "bisectd/geometry.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace bisectd {

namespace {

void set_bit(std::vector<std::uint64_t>& bits, NodeId n, bool on) {
  size_t w = static_cast<size_t>(n) >> 6;
  if (w >= bits.size()) bits.resize(w + 1, 0);
  if (on)
    bits[w] |= std::uint64_t(1) << (n & 63);
  else
    bits[w] &= ~(std::uint64_t(1) << (n & 63));
}

bool get_bit(const std::vector<std::uint64_t>& bits, NodeId n) {
  size_t w = static_cast<size_t>(n) >> 6;
  return w < bits.size() && ((bits[w] >> (n & 63)) & 1u);
}

}  // namespace

// Forest ---------------------------------------------------------------------

Forest::Forest(int dim) : dim_(dim) {
  if (dim < 2 || dim > kMaxDim)
    throw std::invalid_argument("Forest: dimension out of range");
}

VertId Forest::intern_vertex(const DyadicPoint& p, Gen gen) {
  auto it = vert_index_.find(p);
  if (it != vert_index_.end()) {
    if (verts_[static_cast<size_t>(it->second)].gen != gen)
      throw InvariantViolation(
          "vertex generation conflict at shared midpoint (gen " +
          std::to_string(verts_[static_cast<size_t>(it->second)].gen) +
          " vs " + std::to_string(gen) + ")");
    return it->second;
  }
  VertId id = static_cast<VertId>(verts_.size());
  verts_.push_back(Vertex{p, gen});
  vert_index_.emplace(p, id);
  return id;
}

VertId Forest::find_vertex(const DyadicPoint& p) const {
  auto it = vert_index_.find(p);
  return it == vert_index_.end() ? -1 : it->second;
}

NodeId Forest::add_root(const std::vector<VertId>& sorted_verts) {
  if (static_cast<int>(sorted_verts.size()) != dim_ + 1)
    throw std::invalid_argument("add_root: wrong vertex count");
  auto g = [&](VertId v) { return vgen(v); };
  if (!is_sorted_by_gen(sorted_verts, g))
    throw std::invalid_argument("add_root: vertices not sorted by decreasing generation");
  SimplexNode n;
  for (int i = 0; i <= dim_; ++i) n.v[static_cast<size_t>(i)] = sorted_verts[static_cast<size_t>(i)];
  n.gen = 0;
  NodeId id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(n);
  roots_.push_back(id);
  return id;
}

std::vector<VertId> Forest::verts_of(NodeId n) const {
  const SimplexNode& s = node(n);
  return std::vector<VertId>(s.v.begin(), s.v.begin() + dim_ + 1);
}

std::vector<DyadicPoint> Forest::points_of(NodeId n) const {
  std::vector<DyadicPoint> pts;
  pts.reserve(static_cast<size_t>(dim_) + 1);
  const SimplexNode& s = node(n);
  for (int i = 0; i <= dim_; ++i)
    pts.push_back(verts_[static_cast<size_t>(s.v[static_cast<size_t>(i)])].point);
  return pts;
}

bool Forest::node_has_vertex(NodeId n, VertId v) const {
  const SimplexNode& s = node(n);
  for (int i = 0; i <= dim_; ++i)
    if (s.v[static_cast<size_t>(i)] == v) return true;
  return false;
}

EdgeIds Forest::bse(NodeId n) const {
  const SimplexNode& s = node(n);
  auto g = [&](VertId v) { return vgen(v); };
  std::vector<VertId> ids(s.v.begin(), s.v.begin() + dim_ + 1);
  auto [i0, i1] = bisection_edge_indices(ids, dim_, g);
  return {ids[static_cast<size_t>(i0)], ids[static_cast<size_t>(i1)]};
}

NodeId Forest::ensure_children(NodeId n) {
  SimplexNode& parent = nodes_[static_cast<size_t>(n)];
  if (parent.child >= 0) return parent.child;

  auto g = [&](VertId v) { return vgen(v); };
  std::vector<VertId> ids(parent.v.begin(), parent.v.begin() + dim_ + 1);
  auto bidx = bisection_edge_indices(ids, dim_, g);
  VertId a = ids[static_cast<size_t>(bidx.first)];
  VertId b = ids[static_cast<size_t>(bidx.second)];
  DyadicPoint mid = midpoint(vertex(a).point, vertex(b).point);
  VertId w = intern_vertex(mid, parent.gen + 1);

  auto [c1, c2] = sorted_children(ids, bidx, w, g);
  const Gen child_gen = parent.gen + 1;  // push_back below may reallocate
  NodeId first = static_cast<NodeId>(nodes_.size());
  for (const auto& cv : {c1, c2}) {
    SimplexNode c;
    for (int i = 0; i <= dim_; ++i) c.v[static_cast<size_t>(i)] = cv[static_cast<size_t>(i)];
    c.gen = child_gen;
    c.parent = n;
    nodes_.push_back(c);
  }
  nodes_[static_cast<size_t>(n)].child = first;
  ++bisections_;
  return first;
}

// Triangulation --------------------------------------------------------------

Triangulation Triangulation::of_roots(Forest& f) {
  std::vector<std::uint64_t> bits;
  for (NodeId r : f.roots()) set_bit(bits, r, true);
  return Triangulation(&f, std::move(bits),
                       static_cast<std::int64_t>(f.roots().size()));
}

std::vector<NodeId> Triangulation::leaves() const {
  std::vector<NodeId> out;
  out.reserve(static_cast<size_t>(count_));
  for (size_t w = 0; w < bits_.size(); ++w) {
    std::uint64_t word = bits_[w];
    while (word) {
      int b = __builtin_ctzll(word);
      word &= word - 1;
      out.push_back(static_cast<NodeId>((w << 6) + static_cast<size_t>(b)));
    }
  }
  return out;
}

// Refiner --------------------------------------------------------------------

Refiner::Refiner(const Triangulation& tria, std::int64_t budget)
    : f_(tria.forest()), bits_(tria.bits()), budget_(budget) {
  leaf_pos_.assign(static_cast<size_t>(f_.num_nodes()), -1);
  inc_.resize(static_cast<size_t>(f_.num_vertices()));
  for (NodeId n : tria.leaves()) {
    leaf_pos_[static_cast<size_t>(n)] = static_cast<std::int32_t>(leaf_list_.size());
    leaf_list_.push_back(n);
    for (VertId v : f_.verts_of(n)) inc_[static_cast<size_t>(v)].push_back(n);
  }
}

void Refiner::set_leaf(NodeId n, bool on) {
  set_bit(bits_, n, on);
  if (on) {
    if (static_cast<size_t>(n) >= leaf_pos_.size())
      leaf_pos_.resize(static_cast<size_t>(n) + 1, -1);
    leaf_pos_[static_cast<size_t>(n)] = static_cast<std::int32_t>(leaf_list_.size());
    leaf_list_.push_back(n);
  } else {
    std::int32_t pos = leaf_pos_[static_cast<size_t>(n)];
    NodeId back = leaf_list_.back();
    leaf_list_[static_cast<size_t>(pos)] = back;
    leaf_pos_[static_cast<size_t>(back)] = pos;
    leaf_list_.pop_back();
    leaf_pos_[static_cast<size_t>(n)] = -1;
  }
}

NodeId Refiner::random_leaf(std::uint64_t raw) const {
  return leaf_list_[static_cast<size_t>(raw % leaf_list_.size())];
}

std::vector<NodeId> Refiner::edge_patch(VertId a, VertId b) {
  auto& cand = inc_[static_cast<size_t>(a)];
  std::vector<NodeId> out;
  size_t kept = 0;
  for (NodeId n : cand) {
    if (!leaf(n) || !f_.node_has_vertex(n, a)) continue;  // stale entry
    cand[kept++] = n;
    if (f_.node_has_vertex(n, b)) out.push_back(n);
  }
  cand.resize(kept);
  return out;
}

void Refiner::bisect_leaf_raw(NodeId n) {
  if (++used_ > budget_) {
    throw BudgetExceeded(
        "closure exceeded its bisection budget (" + std::to_string(budget_) +
        "); the seed likely violates the admissibility condition on initial "
        "triangulations (budget is an engineering cap, raise with --budget)");
  }
  NodeId c = f_.ensure_children(n);
  if (static_cast<size_t>(f_.num_vertices()) > inc_.size())
    inc_.resize(static_cast<size_t>(f_.num_vertices()));
  set_leaf(n, false);
  for (NodeId ch : {c, static_cast<NodeId>(c + 1)}) {
    set_leaf(ch, true);
    for (VertId v : f_.verts_of(ch)) inc_[static_cast<size_t>(v)].push_back(ch);
  }
}

void Refiner::refine_recursive(NodeId n, int depth) {
  if (depth > 1 << 16)
    throw BudgetExceeded("closure recursion depth exceeded; inadmissible seed");
  if (!leaf(n)) return;
  EdgeIds e = f_.bse(n);
  while (leaf(n)) {
    std::vector<NodeId> patch = edge_patch(e.b0, e.b1);
    std::vector<NodeId> incompatible;
    for (NodeId u : patch) {
      EdgeIds eu = f_.bse(u);
      if (!((eu.b0 == e.b0 && eu.b1 == e.b1) || (eu.b0 == e.b1 && eu.b1 == e.b0)))
        incompatible.push_back(u);
    }
    if (incompatible.empty()) {
      // The whole patch agrees on the edge; bisect it in one sweep. This
      // cannot create a hanging vertex because every leaf containing the
      // edge is in the patch.
      for (NodeId u : patch) bisect_leaf_raw(u);
      return;
    }
    for (NodeId u : incompatible) refine_recursive(u, depth + 1);
  }
}

void Refiner::refine_leaf(NodeId target) {
  if (!leaf(target))
    throw std::invalid_argument("refine_leaf: target is not a leaf");
  refine_recursive(target, 0);
}

Triangulation Refiner::snapshot() const {
  return Triangulation(&f_, bits_,
                       static_cast<std::int64_t>(leaf_list_.size()));
}

// Wrappers -------------------------------------------------------------------

Triangulation bisect_with_closure(const Triangulation& tria, NodeId target,
                                  std::int64_t budget) {
  Refiner r(tria, budget);
  r.refine_leaf(target);
  return r.snapshot();
}

Triangulation refine_marked(const Triangulation& tria,
                            const std::vector<NodeId>& marks,
                            std::int64_t budget) {
  for (NodeId m : marks)
    if (!tria.is_leaf(m))
      throw std::invalid_argument("refine_marked: mark is not a leaf");
  // Deterministic processing order: (generation, node id).
  std::vector<NodeId> order(marks);
  Forest& f = tria.forest();
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    if (f.node(a).gen != f.node(b).gen) return f.node(a).gen < f.node(b).gen;
    return a < b;
  });
  Refiner r(tria, budget);
  for (NodeId m : order) {
    // A mark may already have been bisected by the closure of an earlier one.
    if (r.is_leaf(m)) r.refine_leaf(m);
  }
  return r.snapshot();
}

Triangulation uniform_refine(const Triangulation& tria, int steps,
                             std::int64_t budget) {
  Forest& f = tria.forest();
  std::vector<std::uint64_t> bits = tria.bits();
  std::int64_t count = tria.leaf_count();
  std::int64_t used = 0;
  for (int s = 0; s < steps; ++s) {
    Triangulation cur(&f, bits, count);
    std::vector<NodeId> old_leaves = cur.leaves();
    std::vector<EdgeIds> split_edges;
    split_edges.reserve(old_leaves.size());
    for (NodeId n : old_leaves) {
      if (++used > budget) throw BudgetExceeded("uniform_refine budget exceeded");
      split_edges.push_back(f.bse(n));
      NodeId c = f.ensure_children(n);
      set_bit(bits, n, false);
      set_bit(bits, c, true);
      set_bit(bits, static_cast<NodeId>(c + 1), true);
    }
    count *= 2;
    // Hanging-vertex detection: after a uniform step no remaining leaf may
    // still contain a split edge unbroken.
    std::vector<std::vector<NodeId>> inc(static_cast<size_t>(f.num_vertices()));
    Triangulation next(&f, bits, count);
    for (NodeId n : next.leaves())
      for (VertId v : f.verts_of(n)) inc[static_cast<size_t>(v)].push_back(n);
    for (const EdgeIds& e : split_edges) {
      for (NodeId n : inc[static_cast<size_t>(e.b0)]) {
        if (f.node_has_vertex(n, e.b1))
          throw NeedsClosure(
              "uniform refinement produced a hanging vertex; seed fails the "
              "matching neighbor condition");
      }
    }
  }
  return Triangulation(&f, std::move(bits), count);
}

// Conformity -----------------------------------------------------------------

namespace {

// Key for a hyperface: sorted vertex ids.
struct FaceKey {
  std::array<VertId, kMaxDim> v{};
  int n = 0;
  bool operator==(const FaceKey&) const = default;
};

struct FaceKeyHash {
  size_t operator()(const FaceKey& k) const {
    size_t h = 1469598103934665603ull;
    for (int i = 0; i < k.n; ++i) {
      h ^= static_cast<size_t>(k.v[static_cast<size_t>(i)]) + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return h;
  }
};

FaceKey face_of(const Forest& f, NodeId n, int skip) {
  FaceKey key;
  const SimplexNode& s = f.node(n);
  for (int i = 0; i <= f.dim(); ++i) {
    if (i == skip) continue;
    key.v[static_cast<size_t>(key.n++)] = s.v[static_cast<size_t>(i)];
  }
  std::sort(key.v.begin(), key.v.begin() + key.n);
  return key;
}

}  // namespace

ConformityChecker::ConformityChecker(Forest& f) : f_(f) {
  // Domain boundary = root hyperfaces owned by exactly one root.
  std::unordered_map<FaceKey, int, FaceKeyHash> counts;
  for (NodeId r : f.roots())
    for (int i = 0; i <= f.dim(); ++i) ++counts[face_of(f, r, i)];
  for (const auto& [key, c] : counts) {
    if (c == 1) {
      std::vector<VertId> face(key.v.begin(), key.v.begin() + key.n);
      boundary_faces_.push_back(std::move(face));
    }
  }
}

bool ConformityChecker::vertex_on_boundary_face(VertId v, std::int32_t face) {
  if (static_cast<size_t>(v) >= on_face_.size() ||
      cached_verts_ <= v) {
    // Fill the cache up to the current vertex count.
    on_face_.resize(static_cast<size_t>(f_.num_vertices()));
    for (VertId u = cached_verts_; u < f_.num_vertices(); ++u) {
      for (std::int32_t bf = 0; bf < static_cast<std::int32_t>(boundary_faces_.size()); ++bf) {
        std::vector<DyadicPoint> pts;
        for (VertId w : boundary_faces_[static_cast<size_t>(bf)])
          pts.push_back(f_.vertex(w).point);
        if (simplex_contains(pts, f_.vertex(u).point))
          on_face_[static_cast<size_t>(u)].push_back(bf);
      }
    }
    cached_verts_ = f_.num_vertices();
  }
  const auto& lst = on_face_[static_cast<size_t>(v)];
  return std::find(lst.begin(), lst.end(), face) != lst.end();
}

ConformityReport ConformityChecker::check(const Triangulation& tria) {
  Forest& f = f_;
  const int d = f.dim();
  std::vector<NodeId> lv = tria.leaves();

  // (a) Exact volume partition per root: sum of 2^{-gen} over each root's
  // leaves must equal 1. Scaled by 2^{maxgen} this is an integer identity.
  {
    std::unordered_map<NodeId, std::vector<Gen>> by_root;
    for (NodeId n : lv) {
      NodeId r = n;
      while (f.node(r).parent >= 0) r = f.node(r).parent;
      by_root[r].push_back(f.node(n).gen);
    }
    if (by_root.size() != f.roots().size())
      return {false, "volume partition: some root has no leaves"};
    for (auto& [root, gens] : by_root) {
      Gen maxg = *std::max_element(gens.begin(), gens.end());
      BigInt total = 0;
      for (Gen g : gens) total += BigInt(1) << static_cast<unsigned>(maxg - g);
      if (total != BigInt(1) << static_cast<unsigned>(maxg))
        return {false, "volume partition violated at root " + std::to_string(root)};
    }
  }

  // (b) Hyperface matching.
  std::unordered_map<FaceKey, std::pair<int, NodeId>, FaceKeyHash> counts;
  counts.reserve(lv.size() * static_cast<size_t>(d + 1));
  for (NodeId n : lv) {
    for (int i = 0; i <= d; ++i) {
      auto& e = counts[face_of(f, n, i)];
      ++e.first;
      e.second = n;
    }
  }
  for (const auto& [key, entry] : counts) {
    if (entry.first > 2)
      return {false, "hyperface shared by more than two leaves (leaf " +
                         std::to_string(entry.second) + ")"};
    if (entry.first == 1) {
      // Must lie inside a single root boundary face: the vertex boundary
      // face sets of all face vertices must intersect.
      bool found = false;
      for (std::int32_t bf = 0;
           bf < static_cast<std::int32_t>(boundary_faces_.size()) && !found; ++bf) {
        bool all = true;
        for (int i = 0; i < key.n && all; ++i)
          all = vertex_on_boundary_face(key.v[static_cast<size_t>(i)], bf);
        found = all;
      }
      if (!found)
        return {false,
                "interior hyperface owned by a single leaf (hanging vertex), leaf " +
                    std::to_string(entry.second)};
    }
  }
  return {true, ""};
}

ConformityReport ConformityChecker::check_thorough(const Triangulation& tria) {
  ConformityReport r = check(tria);
  if (!r.ok) return r;
  Forest& f = f_;
  // Locate every vertex of the mesh by descending the forest; any leaf whose
  // closed hull contains the vertex must have it as a vertex.
  std::vector<NodeId> lv = tria.leaves();
  std::vector<bool> used_vertex(static_cast<size_t>(f.num_vertices()), false);
  for (NodeId n : lv)
    for (VertId v : f.verts_of(n)) used_vertex[static_cast<size_t>(v)] = true;
  for (VertId v = 0; v < f.num_vertices(); ++v) {
    if (!used_vertex[static_cast<size_t>(v)]) continue;
    const DyadicPoint& p = f.vertex(v).point;
    std::vector<NodeId> stack;
    for (NodeId root : f.roots())
      if (simplex_contains(f.points_of(root), p)) stack.push_back(root);
    while (!stack.empty()) {
      NodeId n = stack.back();
      stack.pop_back();
      if (tria.is_leaf(n)) {
        if (!f.node_has_vertex(n, v))
          return {false, "vertex " + std::to_string(v) +
                             " hangs inside leaf " + std::to_string(n)};
        continue;
      }
      NodeId c = f.node(n).child;
      if (c < 0) continue;  // node outside this triangulation's forest set
      for (NodeId ch : {c, static_cast<NodeId>(c + 1)})
        if (simplex_contains(f.points_of(ch), p)) stack.push_back(ch);
    }
  }
  return {true, ""};
}

ConformityReport is_conforming(const Triangulation& tria) {
  ConformityChecker c(tria.forest());
  return c.check(tria);
}

// Lattice --------------------------------------------------------------------

std::vector<std::uint64_t> forest_set(const Triangulation& t) {
  Forest& f = t.forest();
  std::vector<std::uint64_t> bits((static_cast<size_t>(f.num_nodes()) + 63) / 64, 0);
  for (NodeId n : t.leaves()) set_bit(bits, n, true);
  // Parents have smaller ids than children; one descending sweep closes the
  // set under taking ancestors.
  for (NodeId n = f.num_nodes() - 1; n >= 0; --n) {
    if (get_bit(bits, n)) {
      NodeId p = f.node(n).parent;
      if (p >= 0) set_bit(bits, p, true);
    }
  }
  return bits;
}

namespace {

Triangulation leaves_of_forest_set(Forest& f, const std::vector<std::uint64_t>& set) {
  std::vector<std::uint64_t> bits(set.size(), 0);
  std::int64_t count = 0;
  for (NodeId n = 0; n < f.num_nodes(); ++n) {
    if (!get_bit(set, n)) continue;
    NodeId c = f.node(n).child;
    bool inner = c >= 0 && get_bit(set, c) && get_bit(set, static_cast<NodeId>(c + 1));
    if (!inner) {
      set_bit(bits, n, true);
      ++count;
    }
  }
  return Triangulation(&f, std::move(bits), count);
}

void require_same_forest(const Triangulation& a, const Triangulation& b) {
  if (&a.forest() != &b.forest())
    throw std::invalid_argument("lattice operation across different forests");
}

}  // namespace

Triangulation join(const Triangulation& a, const Triangulation& b) {
  require_same_forest(a, b);
  auto sa = forest_set(a);
  auto sb = forest_set(b);
  if (sb.size() > sa.size()) sa.resize(sb.size(), 0);
  for (size_t i = 0; i < sb.size(); ++i) sa[i] |= sb[i];
  return leaves_of_forest_set(a.forest(), sa);
}

Triangulation meet(const Triangulation& a, const Triangulation& b) {
  require_same_forest(a, b);
  auto sa = forest_set(a);
  auto sb = forest_set(b);
  size_t n = std::min(sa.size(), sb.size());
  sa.resize(n);
  for (size_t i = 0; i < n; ++i) sa[i] &= sb[i];
  return leaves_of_forest_set(a.forest(), sa);
}

bool is_refinement(const Triangulation& coarse, const Triangulation& fine) {
  require_same_forest(coarse, fine);
  auto sc = forest_set(coarse);
  auto sf = forest_set(fine);
  for (size_t i = 0; i < sc.size(); ++i) {
    std::uint64_t f = i < sf.size() ? sf[i] : 0;
    if (sc[i] & ~f) return false;
  }
  return true;
}

}  // namespace bisectd
