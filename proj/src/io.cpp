#include "bisectd/io.hpp"

#include "bisectd/geometry.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace bisectd {

namespace {

using nlohmann::json;  // std::map keyed objects: key order is deterministic

constexpr int kFormatVersion = 1;
constexpr const char* kFormatName = "bisectd-mesh";

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

BigInt parse_bigint(const json& j, const char* what) {
  if (!j.is_string())
    throw FormatError(std::string(what) +
                      ": expected a decimal string, floats are rejected");
  const std::string& s = j.get_ref<const std::string&>();
  size_t i = (!s.empty() && s[0] == '-') ? 1 : 0;
  if (i == s.size())
    throw FormatError(std::string(what) + ": empty integer literal");
  for (; i < s.size(); ++i)
    if (s[i] < '0' || s[i] > '9')
      throw FormatError(std::string(what) + ": invalid integer literal '" + s +
                        "'");
  return BigInt(s);
}

Gen parse_gen(const json& j, const char* what) {
  if (!j.is_number_integer())
    throw FormatError(std::string(what) + ": expected an integer");
  return j.get<Gen>();
}

json vertex_to_json(const Vertex& v) {
  json nums = json::array();
  for (const BigInt& n : v.point.numerators()) nums.push_back(n.str());
  json jv;
  jv["exponent"] = v.point.exponent();
  jv["generation"] = v.gen;
  jv["numerators"] = std::move(nums);
  return jv;
}

std::pair<DyadicPoint, Gen> vertex_from_json(const json& jv, int dim) {
  if (!jv.is_object() || !jv.contains("numerators") ||
      !jv.contains("exponent") || !jv.contains("generation"))
    throw FormatError("vertex: need numerators, exponent, generation");
  const json& jn = jv["numerators"];
  if (!jn.is_array() || static_cast<int>(jn.size()) != dim)
    throw FormatError("vertex: numerators must hold one entry per dimension");
  std::vector<BigInt> nums;
  nums.reserve(jn.size());
  for (const json& c : jn) nums.push_back(parse_bigint(c, "vertex coordinate"));
  const json& je = jv["exponent"];
  if (!je.is_number_integer() || je.get<std::int64_t>() < 0)
    throw FormatError("vertex: exponent must be a non-negative integer");
  DyadicPoint p(std::move(nums), je.get<unsigned>());
  return {std::move(p), parse_gen(jv["generation"], "vertex generation")};
}

std::vector<VertId> verts_from_json(const json& js, std::int32_t num_verts) {
  if (!js.is_array()) throw FormatError("simplex: expected a vertex-id array");
  std::vector<VertId> out;
  out.reserve(js.size());
  for (const json& id : js) {
    if (!id.is_number_integer())
      throw FormatError("simplex: vertex ids must be integers");
    std::int64_t v = id.get<std::int64_t>();
    if (v < 0 || v >= num_verts)
      throw FormatError("simplex: vertex id out of range");
    out.push_back(static_cast<VertId>(v));
  }
  return out;
}

}  // namespace

void save_mesh(const Triangulation& tria, const std::string& path,
               bool with_forest) {
  const Forest& f = tria.forest();
  const int d = f.dim();
  std::vector<NodeId> leaves = tria.leaves();

  json doc;
  doc["dimension"] = d;
  doc["format"] = kFormatName;
  doc["version"] = kFormatVersion;

  if (with_forest) {
    json verts = json::array();
    for (std::int32_t v = 0; v < f.num_vertices(); ++v)
      verts.push_back(vertex_to_json(f.vertex(v)));
    doc["vertices"] = std::move(verts);

    json nodes = json::array();
    for (NodeId n = 0; n < f.num_nodes(); ++n) {
      const SimplexNode& sn = f.node(n);
      json jn;
      jn["child"] = sn.child;
      jn["generation"] = sn.gen;
      jn["parent"] = sn.parent;
      json vs = json::array();
      for (VertId v : f.verts_of(n)) vs.push_back(v);
      jn["vertices"] = std::move(vs);
      nodes.push_back(std::move(jn));
    }
    json forest;
    forest["nodes"] = std::move(nodes);
    forest["roots"] = f.roots();
    doc["forest"] = std::move(forest);
    doc["simplices"] = leaves;  // with a forest section leaves are node ids
  } else {
    // Only the leaf-referenced vertices, remapped to a dense id range.
    std::vector<std::int32_t> remap(static_cast<size_t>(f.num_vertices()), -1);
    std::vector<VertId> used;
    for (NodeId n : leaves)
      for (VertId v : f.verts_of(n))
        if (remap[static_cast<size_t>(v)] < 0) {
          remap[static_cast<size_t>(v)] = 0;
          used.push_back(v);
        }
    std::sort(used.begin(), used.end());
    for (size_t i = 0; i < used.size(); ++i)
      remap[static_cast<size_t>(used[i])] = static_cast<std::int32_t>(i);

    json verts = json::array();
    for (VertId v : used) verts.push_back(vertex_to_json(f.vertex(v)));
    doc["vertices"] = std::move(verts);

    json simps = json::array();
    for (NodeId n : leaves) {
      json vs = json::array();
      for (VertId v : f.verts_of(n)) vs.push_back(remap[static_cast<size_t>(v)]);
      simps.push_back(std::move(vs));
    }
    doc["simplices"] = std::move(simps);
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << doc.dump(1) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

LoadedMesh load_mesh(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != kFormatName)
    throw FormatError("not a " + std::string(kFormatName) + " document");
  if (!doc.contains("version") || !doc["version"].is_number_integer() ||
      doc["version"].get<int>() != kFormatVersion)
    throw FormatError("unsupported format version");
  if (!doc.contains("dimension") || !doc["dimension"].is_number_integer())
    throw FormatError("missing dimension");
  const int d = doc["dimension"].get<int>();
  if (d < 2 || d > kMaxDim) throw FormatError("dimension out of range");
  if (!doc.contains("vertices") || !doc["vertices"].is_array() ||
      !doc.contains("simplices") || !doc["simplices"].is_array())
    throw FormatError("missing vertices or simplices");

  LoadedMesh out;
  out.forest = std::make_unique<Forest>(d);
  Forest& f = *out.forest;
  for (const json& jv : doc["vertices"]) {
    auto [p, gen] = vertex_from_json(jv, d);
    VertId got = f.intern_vertex(p, gen);
    if (got + 1 != f.num_vertices())
      throw FormatError("duplicate vertex coordinates");
  }

  if (!doc.contains("forest")) {
    for (const json& js : doc["simplices"]) {
      std::vector<VertId> vs = verts_from_json(js, f.num_vertices());
      if (static_cast<int>(vs.size()) != d + 1)
        throw FormatError("simplex: need d+1 vertex ids");
      std::stable_sort(vs.begin(), vs.end(), [&](VertId a, VertId b) {
        return f.vgen(a) > f.vgen(b);
      });
      for (size_t i = 1; i < vs.size(); ++i)
        if (f.vgen(vs[i - 1]) == f.vgen(vs[i]))
          throw FormatError("simplex: vertex generations must be distinct");
      f.add_root(vs);
    }
    if (f.roots().empty()) throw FormatError("empty triangulation");
    out.tria = Triangulation::of_roots(f);
    return out;
  }

  const json& jf = doc["forest"];
  if (!jf.is_object() || !jf.contains("nodes") || !jf.contains("roots") ||
      !jf["nodes"].is_array() || !jf["roots"].is_array())
    throw FormatError("forest: need nodes and roots arrays");
  const json& jnodes = jf["nodes"];
  const auto nn = static_cast<std::int64_t>(jnodes.size());

  struct Rec {
    std::vector<VertId> verts;
    Gen gen;
    NodeId parent, child;
  };
  std::vector<Rec> recs;
  recs.reserve(static_cast<size_t>(nn));
  for (const json& jn : jnodes) {
    if (!jn.is_object() || !jn.contains("vertices") || !jn.contains("parent") ||
        !jn.contains("child") || !jn.contains("generation"))
      throw FormatError("forest node: need vertices, generation, parent, child");
    Rec r;
    r.verts = verts_from_json(jn["vertices"], f.num_vertices());
    if (static_cast<int>(r.verts.size()) != d + 1)
      throw FormatError("forest node: need d+1 vertex ids");
    r.gen = parse_gen(jn["generation"], "node generation");
    if (!jn["parent"].is_number_integer() || !jn["child"].is_number_integer())
      throw FormatError("forest node: parent and child must be integers");
    r.parent = jn["parent"].get<NodeId>();
    r.child = jn["child"].get<NodeId>();
    if (r.parent < -1 || r.parent >= nn || r.child < -1 || r.child >= nn)
      throw FormatError("forest node: parent or child id out of range");
    recs.push_back(std::move(r));
  }

  // Replay the arena in node-id (= creation) order: parent == -1 entries are
  // roots, a node that is the first child of its parent triggers the
  // bisection that created it and its sibling.
  for (NodeId n = 0; n < nn; ++n) {
    const Rec& r = recs[static_cast<size_t>(n)];
    NodeId got = -1;
    if (r.parent == -1) {
      got = f.add_root(r.verts);
    } else if (recs[static_cast<size_t>(r.parent)].child == n) {
      try {
        got = f.ensure_children(r.parent);
      } catch (const std::exception& e) {
        throw FormatError(std::string("forest replay failed: ") + e.what());
      }
    } else if (recs[static_cast<size_t>(r.parent)].child == n - 1) {
      got = n;  // second child, created together with its sibling
    } else {
      throw FormatError("forest node: not a child of its recorded parent");
    }
    if (got != n) throw FormatError("forest: node ids are not in creation order");
    const SimplexNode& sn = f.node(n);
    if (sn.gen != r.gen || f.verts_of(n) != r.verts)
      throw FormatError("forest node disagrees with its replayed bisection");
  }
  for (NodeId r : jf["roots"].get<std::vector<NodeId>>())
    if (r < 0 || r >= nn || recs[static_cast<size_t>(r)].parent != -1)
      throw FormatError("forest: invalid root list");

  std::vector<std::uint64_t> bits((static_cast<size_t>(nn) + 63) / 64, 0);
  std::int64_t count = 0;
  for (const json& jl : doc["simplices"]) {
    if (!jl.is_number_integer()) throw FormatError("leaf ids must be integers");
    std::int64_t n = jl.get<std::int64_t>();
    if (n < 0 || n >= nn) throw FormatError("leaf id out of range");
    std::uint64_t& w = bits[static_cast<size_t>(n) >> 6];
    std::uint64_t m = std::uint64_t(1) << (n & 63);
    if (w & m) throw FormatError("duplicate leaf id");
    w |= m;
    ++count;
  }
  if (count == 0) throw FormatError("empty triangulation");
  out.tria = Triangulation(&f, std::move(bits), count);
  return out;
}

void export_vtk(
    const Triangulation& tria, const std::string& path,
    const std::vector<std::pair<std::string, std::vector<std::int64_t>>>&
        extra_cell_data) {
  const Forest& f = tria.forest();
  const int d = f.dim();
  std::vector<NodeId> leaves = tria.leaves();
  for (const auto& [name, data] : extra_cell_data)
    if (data.size() != leaves.size())
      throw std::invalid_argument("export_vtk: cell array '" + name +
                                  "' does not match the leaf count");

  std::vector<std::int32_t> remap(static_cast<size_t>(f.num_vertices()), -1);
  std::vector<VertId> used;
  for (NodeId n : leaves)
    for (VertId v : f.verts_of(n))
      if (remap[static_cast<size_t>(v)] < 0) {
        remap[static_cast<size_t>(v)] = 0;
        used.push_back(v);
      }
  std::sort(used.begin(), used.end());
  for (size_t i = 0; i < used.size(); ++i)
    remap[static_cast<size_t>(used[i])] = static_cast<std::int32_t>(i);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "# vtk DataFile Version 2.0\n"
      << "bisectd mesh (generation/level/type per cell)\n"
      << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << used.size() << " double\n";
  for (VertId v : used) {
    const DyadicPoint& p = f.vertex(v).point;
    for (int i = 0; i < 3; ++i)
      out << (i ? " " : "") << fmt_double(i < d ? p.coord_double(i) : 0.0);
    out << '\n';
  }

  if (d > 3) {
    std::cerr << "export_vtk: dimension " << d
              << " > 3, writing the vertex skeleton only\n";
    out << "CELLS " << used.size() << ' ' << 2 * used.size() << '\n';
    for (size_t i = 0; i < used.size(); ++i) out << "1 " << i << '\n';
    out << "CELL_TYPES " << used.size() << '\n';
    for (size_t i = 0; i < used.size(); ++i) out << "1\n";
    if (!out) throw std::runtime_error("write failed: " + path);
    return;
  }

  out << "CELLS " << leaves.size() << ' ' << leaves.size() * (d + 2) << '\n';
  for (NodeId n : leaves) {
    out << d + 1;
    for (VertId v : f.verts_of(n)) out << ' ' << remap[static_cast<size_t>(v)];
    out << '\n';
  }
  out << "CELL_TYPES " << leaves.size() << '\n';
  for (size_t i = 0; i < leaves.size(); ++i) out << (d == 2 ? "5\n" : "10\n");

  out << "CELL_DATA " << leaves.size() << '\n';
  auto scalars = [&](const std::string& name, auto&& value_of) {
    out << "SCALARS " << name << " int 1\nLOOKUP_TABLE default\n";
    for (size_t i = 0; i < leaves.size(); ++i) out << value_of(i) << '\n';
  };
  scalars("generation", [&](size_t i) { return f.node(leaves[i]).gen; });
  scalars("level", [&](size_t i) { return level_of(f.node(leaves[i]).gen, d); });
  scalars("type", [&](size_t i) {
    return static_cast<Gen>(type_of(f.node(leaves[i]).gen, d));
  });
  for (const auto& [name, data] : extra_cell_data)
    scalars(name, [&data = data](size_t i) { return data[i]; });
  if (!out) throw std::runtime_error("write failed: " + path);
}

void export_csv(const Triangulation& tria, const std::string& path,
                const GradingReport* report) {
  const Forest& f = tria.forest();
  const int d = f.dim();
  std::vector<NodeId> leaves = tria.leaves();
  if (report && report->leaves != leaves)
    throw std::invalid_argument(
        "export_csv: report does not belong to this triangulation");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "node,generation,level,type,diameter";
  if (report) out << ",s";
  out << '\n';
  for (size_t i = 0; i < leaves.size(); ++i) {
    NodeId n = leaves[i];
    Gen g = f.node(n).gen;
    out << n << ',' << g << ',' << level_of(g, d) << ',' << type_of(g, d) << ','
        << fmt_double(diameter(f.points_of(n)));
    if (report) out << ',' << report->s[i];
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace bisectd
