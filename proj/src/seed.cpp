#include "bisectd/seed.hpp"

#include "bisectd/geometry.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

namespace bisectd {

namespace {

// Floating-point barycentric screen for the quadratic overlap probe: solves
// [verts^T; 1] lambda = [p; 1] in doubles and returns the smallest lambda,
// or nullopt when the system is near-singular (then the exact test decides).
std::optional<double> approx_min_lambda(const std::vector<DyadicPoint>& verts,
                                        const DyadicPoint& p) {
  const int d = p.dim();
  const size_t cols = verts.size();
  const size_t rows = static_cast<size_t>(d) + 1;
  if (cols != rows) return std::nullopt;  // full-dimensional simplices only
  std::vector<std::vector<double>> m(rows, std::vector<double>(cols + 1));
  for (size_t j = 0; j < cols; ++j) {
    for (int i = 0; i < d; ++i)
      m[static_cast<size_t>(i)][j] = verts[j].coord_double(i);
    m[static_cast<size_t>(d)][j] = 1.0;
  }
  for (int i = 0; i < d; ++i) m[static_cast<size_t>(i)][cols] = p.coord_double(i);
  m[static_cast<size_t>(d)][cols] = 1.0;
  for (size_t col = 0; col < cols; ++col) {
    size_t piv = col;
    for (size_t r = col + 1; r < rows; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    if (std::abs(m[piv][col]) < 1e-12) return std::nullopt;
    std::swap(m[piv], m[col]);
    for (size_t r = 0; r < rows; ++r) {
      if (r == col) continue;
      double f = m[r][col] / m[col][col];
      for (size_t j = col; j <= cols; ++j) m[r][j] -= f * m[col][j];
    }
  }
  double lo = 1.0;
  for (size_t r = 0; r < cols; ++r) lo = std::min(lo, m[r][cols] / m[r][r]);
  return lo;
}

}  // namespace

SeedTriangulation kuhn_cube(int d) {
  if (d < 2 || d > kMaxDim)
    throw std::invalid_argument("kuhn_cube: 2 <= d <= 8 required");
  SeedTriangulation seed;
  seed.dim = d;
  std::unordered_map<DyadicPoint, VertId, DyadicPointHash> index;
  auto intern = [&](std::vector<BigInt> coords) {
    DyadicPoint p = DyadicPoint::integer(std::move(coords));
    auto it = index.find(p);
    if (it != index.end()) return it->second;
    VertId id = static_cast<VertId>(seed.points.size());
    int norm1 = 0;
    for (int i = 0; i < d; ++i)
      norm1 += static_cast<int>(p.numerators()[static_cast<size_t>(i)]);
    seed.points.push_back(p);
    seed.colors.push_back(norm1 == 0 ? d : norm1 - 1);
    index.emplace(seed.points.back(), id);
    return id;
  };

  std::vector<int> perm(static_cast<size_t>(d));
  std::iota(perm.begin(), perm.end(), 0);
  do {
    std::vector<VertId> simplex;
    std::vector<BigInt> acc(static_cast<size_t>(d), 0);
    simplex.push_back(intern(acc));
    for (int i = 0; i < d; ++i) {
      acc[static_cast<size_t>(perm[static_cast<size_t>(i)])] = 1;
      simplex.push_back(intern(acc));
    }
    seed.simplices.push_back(std::move(simplex));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return seed;
}

std::optional<SeedViolation> validate_coloring(const SeedTriangulation& seed) {
  if (!seed.colored()) return SeedViolation{"seed has no colors", -1};
  if (seed.colors.size() != seed.points.size())
    return SeedViolation{"color table size mismatch", -1};
  for (int c : seed.colors)
    if (c < 0 || c > seed.dim)
      return SeedViolation{"color out of range 0..d", -1};
  for (size_t s = 0; s < seed.simplices.size(); ++s) {
    std::set<int> seen;
    for (VertId v : seed.simplices[s]) seen.insert(seed.colors[static_cast<size_t>(v)]);
    if (static_cast<int>(seen.size()) != seed.dim + 1)
      return SeedViolation{"simplex misses a color (not (d+1)-chromatic)",
                           static_cast<int>(s)};
  }
  return std::nullopt;
}

std::optional<SeedViolation> validate_seed_geometry(const SeedTriangulation& seed) {
  const int d = seed.dim;
  // Non-degenerate simplices.
  for (size_t s = 0; s < seed.simplices.size(); ++s) {
    if (static_cast<int>(seed.simplices[s].size()) != d + 1)
      return SeedViolation{"simplex has wrong vertex count", static_cast<int>(s)};
    std::vector<DyadicPoint> pts;
    for (VertId v : seed.simplices[s]) pts.push_back(seed.points[static_cast<size_t>(v)]);
    try {
      simplex_volume(pts);
    } catch (const std::invalid_argument&) {
      return SeedViolation{"degenerate simplex", static_cast<int>(s)};
    }
  }
  // Face matching: every hyperface in at most two simplices.
  std::map<std::vector<VertId>, int> faces;
  for (size_t s = 0; s < seed.simplices.size(); ++s) {
    for (int skip = 0; skip <= d; ++skip) {
      std::vector<VertId> face;
      for (int i = 0; i <= d; ++i)
        if (i != skip) face.push_back(seed.simplices[s][static_cast<size_t>(i)]);
      std::sort(face.begin(), face.end());
      if (++faces[face] > 2)
        return SeedViolation{"hyperface shared by more than two simplices",
                             static_cast<int>(s)};
    }
  }
  // Hanging vertices: a vertex inside the closed hull of a simplex must be
  // one of its vertices.
  for (size_t s = 0; s < seed.simplices.size(); ++s) {
    std::vector<DyadicPoint> pts;
    for (VertId v : seed.simplices[s]) pts.push_back(seed.points[static_cast<size_t>(v)]);
    for (VertId v = 0; v < static_cast<VertId>(seed.points.size()); ++v) {
      bool own = std::find(seed.simplices[s].begin(), seed.simplices[s].end(), v) !=
                 seed.simplices[s].end();
      if (own) continue;
      auto lo = approx_min_lambda(pts, seed.points[static_cast<size_t>(v)]);
      if (lo && *lo < -1e-7) continue;  // clearly outside the closed simplex
      if (simplex_contains(pts, seed.points[static_cast<size_t>(v)]))
        return SeedViolation{"vertex hangs on a simplex", static_cast<int>(s)};
    }
  }
  // Interior overlap probe: no edge midpoint of any simplex may lie strictly
  // inside another simplex. Midpoints are deduplicated, then screened per
  // simplex with a double-precision barycentric solve; only candidates whose
  // approximate coordinates are all clearly positive are confirmed in exact
  // arithmetic. Midpoints within 1e-7 of a simplex boundary count as
  // non-interior (boundary contact is legitimate in a conforming complex).
  {
    std::unordered_map<DyadicPoint, bool, DyadicPointHash> mids;
    for (const auto& simplex : seed.simplices) {
      for (size_t a = 0; a < simplex.size(); ++a)
        for (size_t b = a + 1; b < simplex.size(); ++b)
          mids.emplace(
              midpoint(seed.points[static_cast<size_t>(simplex[a])],
                       seed.points[static_cast<size_t>(simplex[b])]),
              true);
    }
    for (size_t t = 0; t < seed.simplices.size(); ++t) {
      std::vector<DyadicPoint> qts;
      for (VertId v : seed.simplices[t])
        qts.push_back(seed.points[static_cast<size_t>(v)]);
      for (const auto& [mid, unused] : mids) {
        auto lo = approx_min_lambda(qts, mid);
        if (lo && *lo < 1e-7) continue;  // clearly outside or on the boundary
        auto lambda = barycentric(qts, mid);
        if (!lambda) continue;
        bool strict_interior = true;
        for (const BigRat& l : *lambda)
          if (l <= 0) strict_interior = false;
        if (strict_interior)
          return SeedViolation{"simplices overlap", static_cast<int>(t)};
      }
    }
  }
  return std::nullopt;
}

std::vector<Gen> assign_initial_generations(const SeedTriangulation& seed) {
  auto bad = validate_coloring(seed);
  if (bad) throw FormatError("assign_initial_generations: " + bad->message);
  std::vector<Gen> gens(seed.points.size());
  for (size_t i = 0; i < gens.size(); ++i) gens[i] = -static_cast<Gen>(seed.colors[i]);
  return gens;
}

std::pair<std::unique_ptr<Forest>, Triangulation> new_forest(
    const SeedTriangulation& seed) {
  auto badc = validate_coloring(seed);
  if (badc) throw FormatError("new_forest: " + badc->message);
  auto badg = validate_seed_geometry(seed);
  if (badg) throw FormatError("new_forest: " + badg->message);

  auto forest = std::make_unique<Forest>(seed.dim);
  std::vector<Gen> gens = assign_initial_generations(seed);
  std::vector<VertId> map(seed.points.size());
  for (size_t i = 0; i < seed.points.size(); ++i)
    map[i] = forest->intern_vertex(seed.points[i], gens[i]);
  for (const auto& simplex : seed.simplices) {
    std::vector<VertId> ids;
    for (VertId v : simplex) ids.push_back(map[static_cast<size_t>(v)]);
    sort_by_gen(ids, [&](VertId v) { return forest->vgen(v); });
    forest->add_root(ids);
  }
  Triangulation tria = Triangulation::of_roots(*forest);
  return {std::move(forest), tria};
}

SeedTriangulation onboard_matching_neighbor(const SeedTriangulation& seed) {
  const int d = seed.dim;
  auto badg = validate_seed_geometry(seed);
  if (badg)
    throw NeedsClosure("onboarding rejected: nonconforming input seed: " +
                       badg->message);

  // Working copies: all initial vertices carry generation -d; the input
  // vertex order of each simplex defines its refinement edge evolution.
  std::vector<DyadicPoint> points = seed.points;
  std::vector<Gen> gens(points.size(), -static_cast<Gen>(d));
  std::unordered_map<DyadicPoint, VertId, DyadicPointHash> index;
  for (size_t i = 0; i < points.size(); ++i)
    index.emplace(points[i], static_cast<VertId>(i));

  std::vector<OrderedSimplex> cur;
  for (const auto& s : seed.simplices) cur.push_back(OrderedSimplex{s, 0});

  for (int step = 1; step <= d; ++step) {
    std::vector<OrderedSimplex> next;
    std::vector<EdgeIds> split_edges;
    next.reserve(cur.size() * 2);
    for (const OrderedSimplex& t : cur) {
      int k = maubach_k(t.gen, d);
      VertId a = t.v[0];
      VertId b = t.v[static_cast<size_t>(k)];
      DyadicPoint mid = midpoint(points[static_cast<size_t>(a)],
                                 points[static_cast<size_t>(b)]);
      VertId w;
      auto it = index.find(mid);
      if (it != index.end()) {
        w = it->second;
        if (gens[static_cast<size_t>(w)] != -static_cast<Gen>(d) + step)
          throw NeedsClosure(
              "onboarding rejected: midpoint generation conflict; seed fails "
              "the matching neighbor condition");
      } else {
        w = static_cast<VertId>(points.size());
        points.push_back(mid);
        gens.push_back(-static_cast<Gen>(d) + step);
        index.emplace(points.back(), w);
      }
      OrderedBisection r = bisect_maubach(t, d, w);
      split_edges.push_back({a, b});
      next.push_back(std::move(r.child1));
      next.push_back(std::move(r.child2));
    }
    // Hanging-vertex detection: no simplex of the refined partition may
    // still contain a split edge unbroken.
    for (const OrderedSimplex& t : next) {
      for (const EdgeIds& e : split_edges) {
        bool has0 = std::find(t.v.begin(), t.v.end(), e.b0) != t.v.end();
        bool has1 = std::find(t.v.begin(), t.v.end(), e.b1) != t.v.end();
        if (has0 && has1)
          throw NeedsClosure(
              "onboarding rejected: uniform refinement produced a hanging "
              "vertex; seed fails the matching neighbor condition");
      }
    }
    cur = std::move(next);
  }

  SeedTriangulation out;
  out.dim = d;
  out.points = std::move(points);
  out.colors.resize(out.points.size());
  for (size_t i = 0; i < gens.size(); ++i) {
    if (gens[i] > 0 || gens[i] < -static_cast<Gen>(d))
      throw InvariantViolation("onboarding produced generation outside -d..0");
    out.colors[i] = static_cast<int>(-gens[i]);
  }
  for (const OrderedSimplex& t : cur) {
    std::vector<VertId> ids = t.v;
    sort_by_gen(ids, [&](VertId v) { return gens[static_cast<size_t>(v)]; });
    out.simplices.push_back(std::move(ids));
  }
  auto badc = validate_coloring(out);
  if (badc)
    throw InvariantViolation("onboarding produced an uncolored complex: " +
                             badc->message);
  return out;
}

}  // namespace bisectd
