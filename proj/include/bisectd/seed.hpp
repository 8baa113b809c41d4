// Construction and validation of admissible initial triangulations: Kuhn
// cubes, coloring checks, initial generation assignment, and onboarding of
// uncolored seeds through one full refinement.
#pragma once

#include "bisectd/dyadic.hpp"
#include "bisectd/forest.hpp"

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bisectd {

struct SeedTriangulation {
  int dim = 0;
  std::vector<DyadicPoint> points;
  // Vertex-id lists. For colored seeds the order is irrelevant (the forest
  // sorts by generation); for uncolored seeds the order defines each root's
  // refinement edge (classic ordered-simplex convention).
  std::vector<std::vector<VertId>> simplices;
  std::vector<int> colors;  // per point, empty if uncolored
  bool colored() const { return !colors.empty(); }
};

// The [0,1]^d cube split into d! Kuhn simplices
// [0, e_{p(1)}, e_{p(1)}+e_{p(2)}, ...], colored c(0) = d, c(v) = |v|_1 - 1.
SeedTriangulation kuhn_cube(int d);

struct SeedViolation {
  std::string message;
  int simplex = -1;  // offending simplex index, -1 if not simplex-specific
};

// Checks the (d+1)-chromatic property: every simplex sees all colors
// 0,...,d (which also makes the coloring proper on edges and every simplex
// sortable into the canonical generation order).
std::optional<SeedViolation> validate_coloring(const SeedTriangulation& seed);

// Geometric conformity of a standalone seed complex (exact; quadratic in the
// seed size, which is fine for initial triangulations).
std::optional<SeedViolation> validate_seed_geometry(const SeedTriangulation& seed);

// gen(v) = -color(v).
std::vector<Gen> assign_initial_generations(const SeedTriangulation& seed);

// Onboard an uncolored seed through d uniform refinements; new vertices of
// step j get generation -d + j. Accepts iff every step stays conforming;
// returns the refined, now colored, seed. Throws NeedsClosure on rejection.
SeedTriangulation onboard_matching_neighbor(const SeedTriangulation& seed);

// Build a forest whose roots are the seed simplices (validates coloring and
// geometry first).
std::pair<std::unique_ptr<Forest>, Triangulation> new_forest(
    const SeedTriangulation& seed);

}  // namespace bisectd
