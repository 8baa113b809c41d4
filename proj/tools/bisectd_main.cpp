// Batch driver for the bisection library: seed generation, refinement
// scripts, grading analysis, invariant verification, and export.
//
// Exit codes: 0 ok, 1 usage error, 2 invariant/format violation,
// 3 budget or limit exceeded.
//
// Random marks use std::mt19937_64 (the portable 64-bit Mersenne twister
// mt19937_64 from the C++ standard) seeded with --rng; the k-th mark is
// rng() % leaf_count at that step. Fixed --rng gives byte-identical outputs.

#include "CLI11.hpp"

#include "bisectd/analysis.hpp"
#include "bisectd/auxtria.hpp"
#include "bisectd/io.hpp"
#include "bisectd/seed.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>

using namespace bisectd;

namespace {

struct Session {
  std::unique_ptr<Forest> forest;
  Triangulation tria;
};

Session open_input(const std::string& in, const std::string& seed_kind,
                   int dim) {
  Session s;
  if (!in.empty()) {
    LoadedMesh m = load_mesh(in);
    s.forest = std::move(m.forest);
    s.tria = m.tria;
    return s;
  }
  if (seed_kind != "kuhn")
    throw CLI::ValidationError("--seed", "unknown seed kind '" + seed_kind + "'");
  auto [f, t] = new_forest(kuhn_cube(dim));
  s.forest = std::move(f);
  s.tria = t;
  return s;
}

void write_output(const Triangulation& t, const std::string& out,
                  const std::string& format) {
  if (out.empty()) return;
  if (format == "json") {
    save_mesh(t, out);
  } else if (format == "vtk") {
    export_vtk(t, out);
  } else if (format == "csv") {
    export_csv(t, out);
  } else {
    throw CLI::ValidationError("--format", "unknown format '" + format + "'");
  }
}

void print_stats(const Triangulation& t, double wall_ms) {
  const Forest& f = t.forest();
  Gen max_gen = 0;
  for (NodeId n : t.leaves()) max_gen = std::max(max_gen, f.node(n).gen);
  std::cout << "leaves=" << t.leaf_count() << " max_gen=" << max_gen
            << " max_level=" << level_of(max_gen, f.dim())
            << " wall_ms=" << wall_ms << '\n';
}

int report_scan(const char* name, const ScanResult& r) {
  std::cout << name << ": " << r.checks << " checks, " << r.violations.size()
            << " violations\n";
  for (const std::string& v : r.violations) std::cout << "  " << v << '\n';
  return r.ok() ? 0 : 2;
}

int run_verify(Session& s, const std::string& suite) {
  Forest& f = *s.forest;
  if (suite == "lemmas") {
    int rc = report_scan("simplex-properties", scan_simplex_properties(s.tria));
    rc = std::max(rc, report_scan("aligned-ancestors", scan_type_d_ancestors(s.tria)));
    SeedConstants sc = c_of_seed(f);
    rc = std::max(rc, report_scan("gensharp-gaps", scan_gensharp_gaps(s.tria, sc.C)));
    return rc;
  }
  if (suite == "grading") {
    GradingReport rep = regularized_mesh_size(s.tria);
    std::cout << "grading: max adjacent size ratio 2^" << rep.max_adjacent_s_diff
              << '\n';
    if (rep.max_adjacent_s_diff > 1) {
      std::cout << "  violation: adjacent leaves differ by more than one halving\n";
      return 2;
    }
    SeedConstants sc = c_of_seed(f);
    auto viol = verify_level_estimate(s.tria, sc.Gamma);
    std::cout << "level-estimate (Gamma=" << sc.Gamma << "): "
              << (viol ? "violated" : "ok") << '\n';
    if (viol) {
      std::cout << "  counterexample: nodes " << viol->coarse << " and "
                << viol->fine << '\n';
      return 2;
    }
    return 0;
  }
  if (suite == "jumps") {
    JumpStats js = level_jump_stats(s.tria);
    SeedConstants sc = c_of_seed(f);
    int bad = 0;
    for (size_t v = 0; v < js.jump.size(); ++v) {
      if (js.jump[v] < 0) continue;
      int n = js.macro_dim[v];
      Gen bound = 2 + sc.J[static_cast<size_t>(n)];
      if (js.jump[v] > bound) {
        ++bad;
        std::cout << "  vertex " << v << " (macro dim " << n << "): jump "
                  << js.jump[v] << " > " << bound << '\n';
      }
    }
    std::cout << "level-jumps: " << (bad ? "violated" : "ok") << '\n';
    return bad ? 2 : 0;
  }
  if (suite == "aux") {
    // Build an auxiliary triangulation around the oldest seed vertex and run
    // the layer, interface-edge, and chain checks on it.
    VertId v = 0;
    for (NodeId r : f.roots())
      for (VertId u : f.verts_of(r))
        if (f.vgen(u) < f.vgen(v)) v = u;
    const int d = f.dim();
    Gen m = level_of(f.vgen(v), d) + 1;
    AuxTriangulation aux = build_aux(f, v, m, 2 * d);
    LayerDecomposition dec = decompose_layers(aux);
    std::cout << "aux: " << aux.tria.leaf_count() << " leaves, "
              << dec.max_layer << " layers\n";
    int rc = report_scan("interface-edges", scan_bse_layers(aux));
    rc = std::max(rc, report_scan("edge-chains",
                                  scan_edge_chains(aux, 200, 8, 1)));
    GradingReport rep = regularized_mesh_size(aux.tria);
    std::cout << "aux grading: 2^" << rep.max_adjacent_s_diff << '\n';
    if (rep.max_adjacent_s_diff > 1) rc = std::max(rc, 2);
    return rc;
  }
  throw CLI::ValidationError("--suite", "unknown suite '" + suite + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conforming newest-vertex bisection for simplicial meshes"};
  app.require_subcommand(1);

  // seed ---------------------------------------------------------------------
  auto* seed = app.add_subcommand("seed", "Generate an initial triangulation");
  std::string seed_kind = "kuhn";
  int dim = 2;
  std::string out, format = "json";
  seed->add_option("kind", seed_kind, "Seed family (kuhn)");
  seed->add_option("dim,--dim", dim, "Dimension")->check(CLI::Range(2, kMaxDim));
  seed->add_option("--out", out, "Output path");
  seed->add_option("--format", format, "json|vtk|csv");

  // refine -------------------------------------------------------------------
  auto* refine = app.add_subcommand("refine", "Run a refinement script");
  std::string in;
  int uniform_steps = -1;
  long long random_steps = -1;
  std::uint64_t rng_seed = 0;
  std::string marks_path;
  std::int64_t budget = kDefaultBudget;
  refine->add_option("--in", in, "Input mesh (native JSON)");
  refine->add_option("--seed", seed_kind, "Builtin seed family instead of --in");
  refine->add_option("--dim", dim, "Dimension for --seed")
      ->check(CLI::Range(2, kMaxDim));
  refine->add_option("--uniform", uniform_steps, "Uniform refinement rounds");
  refine->add_option("--steps,--random", random_steps,
                     "Random closure refinements");
  refine->add_option("--rng", rng_seed, "RNG seed for --steps (mt19937_64)");
  refine->add_option("--marks", marks_path,
                     "File of node ids to refine (whitespace separated)");
  refine->add_option("--budget", budget, "Closure bisection budget");
  refine->add_option("--out", out, "Output path");
  refine->add_option("--format", format, "json|vtk|csv");

  // analyze ------------------------------------------------------------------
  auto* analyze = app.add_subcommand("analyze", "Grading analysis report");
  analyze->add_option("--in", in, "Input mesh (native JSON)")->required();
  analyze->add_option("--out", out, "CSV report path");

  // verify -------------------------------------------------------------------
  auto* verify = app.add_subcommand("verify", "Run an invariant suite");
  std::string suite = "lemmas";
  verify->add_option("--in", in, "Input mesh (native JSON)")->required();
  verify->add_option("--suite", suite, "lemmas|grading|jumps|aux");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (seed->parsed()) {
      Session s = open_input("", seed_kind, dim);
      if (out.empty()) throw CLI::ValidationError("--out", "output path required");
      write_output(s.tria, out, format);
      print_stats(s.tria, 0.0);
      return 0;
    }
    if (refine->parsed()) {
      int scripts = (uniform_steps >= 0) + (random_steps >= 0) +
                    !marks_path.empty();
      if (scripts != 1)
        throw CLI::ValidationError(
            "refine", "need exactly one of --uniform, --steps, --marks");
      Session s = open_input(in, seed_kind, dim);
      auto t0 = std::chrono::steady_clock::now();
      if (uniform_steps >= 0) {
        s.tria = uniform_refine(s.tria, uniform_steps, budget);
      } else if (random_steps >= 0) {
        Refiner r(s.tria, budget);
        std::mt19937_64 rng(rng_seed);
        for (long long i = 0; i < random_steps; ++i)
          r.refine_leaf(r.random_leaf(rng()));
        s.tria = r.snapshot();
      } else {
        std::ifstream mf(marks_path);
        if (!mf) throw FormatError("cannot open marks file: " + marks_path);
        std::vector<NodeId> marks;
        for (NodeId n; mf >> n;) marks.push_back(n);
        s.tria = refine_marked(s.tria, marks, budget);
      }
      double ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
      write_output(s.tria, out, format);
      print_stats(s.tria, ms);
      return 0;
    }
    if (analyze->parsed()) {
      Session s = open_input(in, seed_kind, dim);
      GradingReport rep = regularized_mesh_size(s.tria);
      if (!out.empty()) export_csv(s.tria, out, &rep);
      std::cout << "leaves=" << rep.leaves.size() << " h0=" << rep.h0
                << " grading=2^" << rep.max_adjacent_s_diff
                << " c1=" << rep.c1 << " c2=" << rep.c2 << '\n';
      if (rep.max_adjacent_s_diff > 1) {
        std::cerr << "invariant violation: grading exceeds one halving between "
                     "adjacent leaves\n";
        return 2;
      }
      return 0;
    }
    Session s = open_input(in, seed_kind, dim);
    return run_verify(s, suite);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return 3;
  } catch (const FormatError& e) {
    std::cerr << "format violation: " << e.what() << '\n';
    return 2;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
