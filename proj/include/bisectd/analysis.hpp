// Distances, the regularized mesh size function, grading certification,
// macro-vertex classification, level-jump statistics, seed constants, and
// the level-estimate verifiers.
#pragma once

#include "bisectd/forest.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace bisectd {

// Leaves of a triangulation with a vertex -> leaf incidence table; the
// adjacency (share >= 1 vertex) and 1-neighbor (share >= 2 vertices)
// relations are derived from it on the fly.
struct LeafIndex {
  explicit LeafIndex(const Triangulation& tria);
  const Forest* f;
  std::vector<NodeId> leaves;                   // ascending node id
  std::vector<std::int32_t> pos;                // node id -> leaf index or -1
  std::vector<std::vector<std::int32_t>> inc;   // vertex id -> leaf indices
  int shared_vertices(std::int32_t a, std::int32_t b) const;
};

// Shortest chain of pairwise-intersecting leaves from a to b, minus one.
// Returns -1 when disconnected.
int simplex_distance(const Triangulation& tria, NodeId a, NodeId b);

struct GradingReport {
  std::vector<NodeId> leaves;
  std::vector<Gen> s;        // h(T) = h0 * 2^{-s(T)}, integer exponents
  double h0 = 0;             // mean root diameter
  int max_adjacent_s_diff = 0;  // measured grading = 2^this
  double c1 = 0, c2 = 0;     // min/max of h(T)/diam(T)
};

// s(T) = max_{T'} (level(T') - delta(T,T')) via a multi-source pass with a
// bucket queue over unit steps; h0, c1, c2 in floating point only.
GradingReport regularized_mesh_size(const Triangulation& tria);

// O(n^2) reference: BFS from every leaf. Test oracle.
GradingReport regularized_mesh_size_bruteforce(const Triangulation& tria);

// Dimension of the smallest closed subsimplex of the initial triangulation
// containing the vertex; 0 for seed vertices, d for root-interior vertices.
// Critical vertices are those with macro dimension <= d-2.
int macro_dimension(const Forest& f, VertId v);

struct JumpStats {
  // Per vertex id: max level difference over pairs of leaf edges at the
  // vertex, or -1 for vertices absent from the triangulation.
  std::vector<Gen> jump;
  std::vector<int> macro_dim;                 // aligned with jump, -1 absent
  std::array<Gen, kMaxDim + 1> max_by_macro;  // -1 where no vertex has that dim
};
JumpStats level_jump_stats(const Triangulation& tria);

struct SeedConstants {
  int C = 0;        // max 1-chain diameter of full-refinement vertex patches
  int Cprime = 0;   // same over root patches
  std::vector<int> J;  // J[n] for n = 0..d
  int Gamma = 0;
  int GammaPlus = 0;
};
// Builds the full refinement of the roots (d uniform steps) inside the given
// forest and measures the patch constants of its seed vertices.
SeedConstants c_of_seed(Forest& f);

struct PairViolation {
  NodeId coarse = -1;  // T with the small level
  NodeId fine = -1;    // T' violating level(T') - level(T) > delta + Gamma
};
// Exhaustive check of level(T') - level(T) <= delta(T',T) + Gamma over all
// leaf pairs (via the multi-source potentials, which realize the max).
std::optional<PairViolation> verify_level_estimate(const Triangulation& tria,
                                                   Gen gamma_const);

// Invariant scanners -------------------------------------------------------

struct ScanResult {
  long long checks = 0;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Per-leaf structural properties: distinct vertex generations, oldest vertex
// on the bisection edge, unique oldest edge, edge/face level and generation
// envelopes, bisection-edge level and type rules, type-one edge census,
// #-generation rules (strict minimality at the bisection edge, level lift,
// child-edge shifts, per-vertex gap <= d-1).
ScanResult scan_simplex_properties(const Triangulation& tria);

// Every leaf edge belongs to a type-d simplex of generation level(e)*d in
// the master tree (materializing missing descendants as needed).
ScanResult scan_type_d_ancestors(const Triangulation& tria);

// Per-vertex #-generation gaps over leaf edge pairs: <= 2d at non-critical
// vertices, <= 4d at critical vertices of macro dimension >= 1, and
// <= (C+1)(d-1) at seed vertices when C >= 0 is supplied (skip with C < 0).
ScanResult scan_gensharp_gaps(const Triangulation& tria, int C);

// Worker pool size: BISECTD_THREADS env var, else hardware concurrency.
int worker_threads();

}  // namespace bisectd
