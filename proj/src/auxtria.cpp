#include "bisectd/auxtria.hpp"

#include "bisectd/geometry.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <random>
#include <stdexcept>

namespace bisectd {

bool AuxTriangulation::on_patch_boundary(VertId u) const {
  auto it = boundary_cache.find(u);
  if (it != boundary_cache.end()) return it->second;
  const DyadicPoint& p = f->vertex(u).point;
  bool on = false;
  for (const auto& face : boundary_faces) {
    auto lambda = barycentric(face, p);
    if (!lambda) continue;
    bool inside = true;
    for (const BigRat& l : *lambda)
      if (l < 0) {
        inside = false;
        break;
      }
    if (inside) {
      on = true;
      break;
    }
  }
  boundary_cache.emplace(u, on);
  return on;
}

bool AuxTriangulation::is_patch_node(NodeId n) const {
  const Gen base = m * f->dim();
  while (f->node(n).gen > base) n = f->node(n).parent;
  return n >= 0 && static_cast<size_t>(n) < patch_root_mark.size() &&
         patch_root_mark[static_cast<size_t>(n)];
}

AuxTriangulation build_aux(Forest& f, VertId v, Gen m, int depth,
                           std::int64_t budget) {
  const int d = f.dim();
  if (v < 0 || v >= f.num_vertices())
    throw std::invalid_argument("build_aux: unknown vertex");
  if (m < 0 || depth < 0) throw std::invalid_argument("build_aux: bad m or depth");
  if (!(level_of(f.vgen(v), d) < m))
    throw std::invalid_argument("build_aux: need level(v) < m");

  AuxTriangulation aux;
  aux.f = &f;
  aux.v = v;
  aux.m = m;
  aux.depth = depth;
  aux.tria = uniform_refine(Triangulation::of_roots(f),
                            static_cast<int>(m) * d, budget);

  for (NodeId n : aux.tria.leaves())
    if (f.node_has_vertex(n, v)) aux.patch_roots.push_back(n);
  if (aux.patch_roots.empty())
    throw std::invalid_argument("build_aux: empty vertex patch");
  aux.patch_root_mark.assign(static_cast<size_t>(f.num_nodes()), 0);
  for (NodeId n : aux.patch_roots) {
    aux.patch_root_mark[static_cast<size_t>(n)] = 1;
    std::vector<DyadicPoint> face;
    for (VertId u : f.verts_of(n))
      if (u != v) face.push_back(f.vertex(u).point);
    aux.boundary_faces.push_back(std::move(face));
  }

  std::int64_t used = 0;
  ConformityChecker checker(f);
  for (int round = 1; round <= depth; ++round) {
    std::vector<NodeId> to_bisect;
    for (NodeId n : aux.tria.leaves()) {
      bool keep = aux.is_patch_node(n);
      if (keep) {
        for (VertId u : f.verts_of(n))
          if (aux.on_patch_boundary(u)) {
            keep = false;
            break;
          }
      }
      if (!keep) to_bisect.push_back(n);
    }
    std::vector<std::uint64_t> bits = aux.tria.bits();
    std::int64_t count = aux.tria.leaf_count();
    auto clear_bit = [&](NodeId n) {
      bits[static_cast<size_t>(n) >> 6] &= ~(std::uint64_t(1) << (n & 63));
    };
    auto set_bit = [&](NodeId n) {
      size_t w = static_cast<size_t>(n) >> 6;
      if (w >= bits.size()) bits.resize(w + 1, 0);
      bits[w] |= std::uint64_t(1) << (n & 63);
    };
    for (NodeId n : to_bisect) {
      if (++used > budget) throw BudgetExceeded("build_aux: budget exhausted");
      NodeId c = f.ensure_children(n);
      clear_bit(n);
      set_bit(c);
      set_bit(c + 1);
      ++count;
    }
    aux.tria = Triangulation(&f, std::move(bits), count);
    ConformityReport rep = checker.check(aux.tria);
    if (!rep.ok)
      throw InvariantViolation(
          "build_aux: boundary-band bisection required a closure step: " +
          rep.violation);
  }

  for (NodeId n : aux.tria.leaves()) {
    if (!aux.is_patch_node(n)) continue;
    bool touches = false;
    for (VertId u : f.verts_of(n))
      if (aux.on_patch_boundary(u)) {
        touches = true;
        break;
      }
    aux.layer[n] =
        touches ? 0 : static_cast<int>(level_of(f.node(n).gen, d) - m);
  }
  return aux;
}

LayerDecomposition decompose_layers(const AuxTriangulation& aux) {
  const Forest& f = *aux.f;
  const int d = f.dim();
  LeafIndex idx(aux.tria);
  LayerDecomposition out;
  std::vector<int> dist(idx.leaves.size(), -1);
  std::deque<std::int32_t> queue;
  for (size_t i = 0; i < idx.leaves.size(); ++i) {
    if (f.node_has_vertex(idx.leaves[i], aux.v)) {
      dist[i] = 0;
      queue.push_back(static_cast<std::int32_t>(i));
    }
  }
  while (!queue.empty()) {
    std::int32_t i = queue.front();
    queue.pop_front();
    for (VertId u : f.verts_of(idx.leaves[static_cast<size_t>(i)]))
      for (std::int32_t j : idx.inc[static_cast<size_t>(u)]) {
        if (dist[static_cast<size_t>(j)] >= 0) continue;
        if (!aux.layer.count(idx.leaves[static_cast<size_t>(j)])) continue;
        dist[static_cast<size_t>(j)] = dist[static_cast<size_t>(i)] + 1;
        queue.push_back(j);
      }
  }

  for (size_t i = 0; i < idx.leaves.size(); ++i) {
    NodeId n = idx.leaves[i];
    auto it = aux.layer.find(n);
    if (it == aux.layer.end()) continue;
    out.leaves.push_back(n);
    out.layer.push_back(it->second);
    out.max_layer = std::max(out.max_layer, it->second);
    if (it->second >= 1) {
      // Distance and level characterizations must coincide.
      if (dist[i] < 0 || dist[i] + 1 != it->second)
        throw InvariantViolation("decompose_layers: BFS layer mismatch");
      if (level_of(f.node(n).gen, d) != aux.m + it->second)
        throw InvariantViolation("decompose_layers: layer level mismatch");
    }
  }

  // Interface vertices: a vertex all of whose leaves are final interior
  // patch leaves spans at most two consecutive layers, and its level names
  // the inner one.
  for (VertId u = 0; u < f.num_vertices(); ++u) {
    if (u == aux.v) continue;
    const auto& patch = idx.inc[static_cast<size_t>(u)];
    if (patch.empty()) continue;
    int lo = 0, hi = 0;
    bool all_interior = true, first = true;
    for (std::int32_t i : patch) {
      auto it = aux.layer.find(idx.leaves[static_cast<size_t>(i)]);
      if (it == aux.layer.end() || it->second < 1) {
        all_interior = false;
        break;
      }
      if (first) {
        lo = hi = it->second;
        first = false;
      } else {
        lo = std::min(lo, it->second);
        hi = std::max(hi, it->second);
      }
    }
    if (!all_interior) continue;
    if (hi - lo > 1)
      throw InvariantViolation("decompose_layers: layers two apart intersect");
    if (level_of(f.vgen(u), d) != aux.m + lo)
      throw InvariantViolation("decompose_layers: interface vertex level");
  }
  return out;
}

std::vector<EdgeIds> find_pre_diamonds(const Triangulation& tria) {
  const Forest& f = tria.forest();
  LeafIndex idx(tria);
  std::map<std::pair<VertId, VertId>, bool> candidate;  // bse edges seen
  for (NodeId n : idx.leaves) {
    EdgeIds e = f.bse(n);
    std::pair<VertId, VertId> key = std::minmax(e.b0, e.b1);
    candidate.emplace(key, true);
  }
  std::vector<EdgeIds> out;
  for (auto& [key, ok] : candidate) {
    auto [a, b] = key;
    for (std::int32_t i : idx.inc[static_cast<size_t>(a)]) {
      NodeId n = idx.leaves[static_cast<size_t>(i)];
      if (!f.node_has_vertex(n, b)) continue;
      EdgeIds e = f.bse(n);
      std::pair<VertId, VertId> k = std::minmax(e.b0, e.b1);
      if (k != key) {
        ok = false;
        break;
      }
    }
    if (ok) {
      // Younger endpoint first, matching the bisection-edge convention.
      if (f.vgen(a) >= f.vgen(b))
        out.push_back({a, b});
      else
        out.push_back({b, a});
    }
  }
  return out;
}

std::vector<NodeId> sharp_chain(const AuxTriangulation& aux, int N) {
  const Forest& f = *aux.f;
  const int d = f.dim();
  if (N < 0) throw std::invalid_argument("sharp_chain: negative length");
  if (aux.depth < d * (N + 1))
    throw std::invalid_argument(
        "sharp_chain: depth " + std::to_string(aux.depth) +
        " insufficient for N = " + std::to_string(N) + ", need depth >= " +
        std::to_string(d * (N + 1)));
  LeafIndex idx(aux.tria);
  auto layer_of = [&](NodeId n) {
    auto it = aux.layer.find(n);
    return it == aux.layer.end() ? -1 : it->second;
  };
  NodeId cur = -1;
  for (NodeId n : idx.leaves)
    if (layer_of(n) == 1) {
      cur = n;
      break;
    }
  if (cur < 0) throw InvariantViolation("sharp_chain: no layer-1 leaf");
  std::vector<NodeId> chain{cur};
  for (int k = 2; k <= N + 1; ++k) {
    NodeId next = -1;
    for (VertId u : f.verts_of(cur)) {
      for (std::int32_t i : idx.inc[static_cast<size_t>(u)]) {
        NodeId cand = idx.leaves[static_cast<size_t>(i)];
        if (layer_of(cand) == k) {
          next = cand;
          break;
        }
      }
      if (next >= 0) break;
    }
    if (next < 0)
      throw InvariantViolation("sharp_chain: no adjacent leaf in next layer");
    chain.push_back(next);
    cur = next;
  }
  // Re-verify the witness: unit level increments along intersecting leaves.
  Gen base = level_of(f.node(chain[0]).gen, d);
  for (size_t k = 0; k < chain.size(); ++k)
    if (level_of(f.node(chain[k]).gen, d) != base + static_cast<Gen>(k))
      throw InvariantViolation("sharp_chain: level increment mismatch");
  return chain;
}

ScanResult scan_bse_layers(const AuxTriangulation& aux) {
  const Forest& f = *aux.f;
  const int d = f.dim();
  ScanResult res;
  for (const auto& [n, ell] : aux.layer) {
    if (ell < 1) continue;
    ++res.checks;
    EdgeIds e = f.bse(n);  // b0 younger, b1 older
    Gen l0 = level_of(f.vgen(e.b0), d);
    Gen l1 = level_of(f.vgen(e.b1), d);
    bool ok;
    if (type_of(f.node(n).gen, d) != d) {
      ok = (l0 == aux.m + ell - 1) && (l1 == aux.m + ell - 1);
    } else {
      bool older_ok = (ell == 1) ? (e.b1 == aux.v) : (l1 == aux.m + ell - 1);
      ok = older_ok && (l0 == aux.m + ell);
    }
    if (!ok && res.violations.size() < 32)
      res.violations.push_back("leaf " + std::to_string(n) +
                               ": bisection edge off its layer interface");
  }
  return res;
}

ScanResult scan_edge_chains(const AuxTriangulation& aux, int chains,
                            int max_len, std::uint64_t seed) {
  const Forest& f = *aux.f;
  const int d = f.dim();
  LeafIndex idx(aux.tria);
  auto inside = [&](VertId u) {
    // Strictly inside the patch region: touches a patch leaf and is not on
    // the patch boundary.
    bool touches_patch = false;
    for (std::int32_t i : idx.inc[static_cast<size_t>(u)])
      if (aux.layer.count(idx.leaves[static_cast<size_t>(i)])) {
        touches_patch = true;
        break;
      }
    return touches_patch && !aux.on_patch_boundary(u);
  };
  auto neighbors = [&](VertId u) {
    std::vector<VertId> out;
    for (std::int32_t i : idx.inc[static_cast<size_t>(u)])
      for (VertId w : f.verts_of(idx.leaves[static_cast<size_t>(i)]))
        if (w != u) out.push_back(w);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };
  std::mt19937_64 rng(seed);
  ScanResult res;
  for (int c = 0; c < chains; ++c) {
    VertId prev = aux.v;
    for (int j = 1; j <= max_len; ++j) {
      auto nb = neighbors(prev);
      VertId next = nb[rng() % nb.size()];
      Gen lvl_e = level_of(std::max(f.vgen(prev), f.vgen(next)), d);
      ++res.checks;
      if (inside(next)) {
        // The whole chain so far stays in the patch interior.
        if (lvl_e > aux.m + j && res.violations.size() < 32)
          res.violations.push_back("staying chain: level(e_" +
                                   std::to_string(j) + ") > m + j");
        prev = next;
      } else {
        if (lvl_e >= aux.m + j && res.violations.size() < 32)
          res.violations.push_back("leaving chain: level(e_" +
                                   std::to_string(j) + ") >= m + j");
        break;
      }
    }
  }
  return res;
}

}  // namespace bisectd
