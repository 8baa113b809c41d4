// Native JSON mesh format (bit-exact round trips), VTK legacy ASCII export,
// and CSV leaf reports. The JSON format stores coordinates as decimal-string
// numerators over a power-of-two denominator; floats are rejected on load.
#pragma once

#include "bisectd/analysis.hpp"
#include "bisectd/forest.hpp"

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace bisectd {

struct LoadedMesh {
  std::unique_ptr<Forest> forest;
  Triangulation tria;
};

// Writes the leaves of `tria`; with_forest additionally writes the full node
// genealogy so that load_mesh reproduces the arena with identical ids.
void save_mesh(const Triangulation& tria, const std::string& path,
               bool with_forest = true);

// Without a forest section the stored leaves become the roots of a fresh
// forest (their vertex generations are taken verbatim).
LoadedMesh load_mesh(const std::string& path);

// Legacy ASCII unstructured grid. d=2 triangles, d=3 tetrahedra; for d >= 4
// only the vertex skeleton is written and a warning goes to stderr.
// Coordinates are rounded to double (lossy; never re-imported).
// extra_cell_data: named per-leaf integer arrays, aligned with the leaves in
// ascending node-id order.
void export_vtk(
    const Triangulation& tria, const std::string& path,
    const std::vector<std::pair<std::string, std::vector<std::int64_t>>>&
        extra_cell_data = {});

// Per-leaf rows: node, gen, level, type, diameter and, when a report is
// given, the size exponent s (h = h0 * 2^-s).
void export_csv(const Triangulation& tria, const std::string& path,
                const GradingReport* report = nullptr);

}  // namespace bisectd
