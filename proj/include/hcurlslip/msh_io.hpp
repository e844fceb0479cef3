#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "chart.hpp"
#include "mesh.hpp"

namespace hcurlslip {

/// How physical groups of boundary lines become boundary tags. Explicit
/// numeric tags win over names; a group named "slip" or "dirichlet" maps to
/// that tag; everything else, including boundary edges without a line
/// element, gets `default_tag`.
struct MshOptions {
  std::map<int, BoundaryTag> physical_tags;
  BoundaryTag default_tag = BoundaryTag::slip;
};

namespace detail {

inline std::string next_line(std::istream& in, int& line_no) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) return line;
  }
  throw ParseError("unexpected end of file after line " + std::to_string(line_no));
}

template <class T>
std::vector<T> parse_numbers(const std::string& line, int line_no, std::size_t at_least) {
  std::istringstream ss(line);
  std::vector<T> values;
  T v;
  while (ss >> v) values.push_back(v);
  if (!ss.eof() || values.size() < at_least)
    throw ParseError("malformed line " + std::to_string(line_no) + ": '" + line + "'");
  return values;
}

inline void expect(const std::string& line, const std::string& keyword, int line_no) {
  if (line != keyword)
    throw ParseError("expected " + keyword + " at line " + std::to_string(line_no) + ", found '" + line + "'");
}

}  // namespace detail

/// Reads a 2D triangle mesh in MSH 2.2 ASCII format. Element types: 1 (line,
/// boundary facet), 2 (triangle); 15 (point) is ignored, anything else is
/// rejected. The z coordinate is dropped.
inline Mesh read_msh(std::istream& in, const MshOptions& opts = {}) {
  int line_no = 0;
  std::map<int, std::string> physical_names;
  std::map<long, int> node_index;
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> cells;
  struct Line {
    int a, b, physical;
  };
  std::vector<Line> lines;
  bool have_format = false, have_nodes = false, have_elements = false;

  std::string line;
  while (true) {
    line.clear();
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") != std::string::npos) break;
      line.clear();
    }
    if (line.empty()) break;
    if (line == "$MeshFormat") {
      const auto v = detail::parse_numbers<double>(detail::next_line(in, line_no), line_no, 3);
      if (v[0] < 2.0 || v[0] >= 3.0) throw ParseError("unsupported MSH version " + std::to_string(v[0]));
      if (v[1] != 0) throw ParseError("binary MSH files are not supported");
      detail::expect(detail::next_line(in, line_no), "$EndMeshFormat", line_no);
      have_format = true;
    } else if (line == "$PhysicalNames") {
      const auto n = detail::parse_numbers<long>(detail::next_line(in, line_no), line_no, 1)[0];
      for (long i = 0; i < n; ++i) {
        const std::string entry = detail::next_line(in, line_no);
        std::istringstream ss(entry);
        int dim, tag;
        std::string name;
        if (!(ss >> dim >> tag)) throw ParseError("malformed physical name at line " + std::to_string(line_no));
        std::getline(ss, name);
        const auto q0 = name.find('"'), q1 = name.rfind('"');
        if (q0 == std::string::npos || q1 == q0)
          throw ParseError("malformed physical name at line " + std::to_string(line_no));
        physical_names[tag] = name.substr(q0 + 1, q1 - q0 - 1);
      }
      detail::expect(detail::next_line(in, line_no), "$EndPhysicalNames", line_no);
    } else if (line == "$Nodes") {
      const auto n = detail::parse_numbers<long>(detail::next_line(in, line_no), line_no, 1)[0];
      if (n < 0) throw ParseError("negative node count at line " + std::to_string(line_no));
      for (long i = 0; i < n; ++i) {
        const auto v = detail::parse_numbers<double>(detail::next_line(in, line_no), line_no, 3);
        const long id = long(v[0]);
        if (!node_index.emplace(id, int(vertices.size())).second)
          throw ParseError("duplicate node id " + std::to_string(id) + " at line " + std::to_string(line_no));
        vertices.emplace_back(v[1], v[2]);
      }
      detail::expect(detail::next_line(in, line_no), "$EndNodes", line_no);
      have_nodes = true;
    } else if (line == "$Elements") {
      const auto n = detail::parse_numbers<long>(detail::next_line(in, line_no), line_no, 1)[0];
      for (long i = 0; i < n; ++i) {
        const auto v = detail::parse_numbers<long>(detail::next_line(in, line_no), line_no, 3);
        const long type = v[1], ntags = v[2];
        if (ntags < 0 || std::size_t(3 + ntags) > v.size())
          throw ParseError("malformed element at line " + std::to_string(line_no));
        const int physical = ntags > 0 ? int(v[3]) : 0;
        std::vector<int> nodes;
        for (std::size_t j = 3 + ntags; j < v.size(); ++j) {
          auto it = node_index.find(v[j]);
          if (it == node_index.end())
            throw ParseError("element at line " + std::to_string(line_no) + " references unknown node " +
                             std::to_string(v[j]));
          nodes.push_back(it->second);
        }
        const auto need = [&](std::size_t count) {
          if (nodes.size() != count)
            throw ParseError("element at line " + std::to_string(line_no) + " has " + std::to_string(nodes.size()) +
                             " nodes, expected " + std::to_string(count));
        };
        if (type == 1) {
          need(2);
          lines.push_back({nodes[0], nodes[1], physical});
        } else if (type == 2) {
          need(3);
          cells.push_back({nodes[0], nodes[1], nodes[2]});
        } else if (type == 15) {
          continue;
        } else {
          throw ParseError("unsupported element type " + std::to_string(type) + " at line " +
                           std::to_string(line_no) + " (only lines and triangles are supported)");
        }
      }
      detail::expect(detail::next_line(in, line_no), "$EndElements", line_no);
      have_elements = true;
    } else if (!line.empty() && line[0] == '$') {
      // Unknown section: skip to its end marker.
      const std::string end = "$End" + line.substr(1);
      while (detail::next_line(in, line_no) != end) {
      }
    } else {
      throw ParseError("unexpected content at line " + std::to_string(line_no) + ": '" + line + "'");
    }
  }
  if (!have_format) throw ParseError("missing $MeshFormat section");
  if (!have_nodes) throw ParseError("missing $Nodes section");
  if (!have_elements) throw ParseError("missing $Elements section");
  if (cells.empty()) throw ParseError("mesh contains no triangles");

  const auto tag_of = [&](int physical) {
    if (auto it = opts.physical_tags.find(physical); it != opts.physical_tags.end()) return it->second;
    if (auto it = physical_names.find(physical); it != physical_names.end()) {
      if (it->second == "dirichlet") return BoundaryTag::dirichlet;
      if (it->second == "slip") return BoundaryTag::slip;
    }
    return opts.default_tag;
  };
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& c : cells)
    for (const auto& le : kRefEdges) edge_count[std::minmax(c[le[0]], c[le[1]])]++;
  std::vector<BoundarySegment> boundary;
  std::map<std::pair<int, int>, bool> tagged;
  for (const auto& l : lines) {
    const auto key = std::minmax(l.a, l.b);
    if (!edge_count.count(key))
      throw GeometryError("dangling boundary edge (" + std::to_string(l.a) + ", " + std::to_string(l.b) +
                          ") not incident to any triangle");
    if (edge_count[key] != 1) continue;  // internal lines carry no boundary condition
    if (tagged[key]) throw GeometryError("boundary edge tagged twice");
    tagged[key] = true;
    boundary.push_back({l.a, l.b, tag_of(l.physical), -1});
  }
  for (const auto& [key, count] : edge_count)
    if (count == 1 && !tagged[key]) boundary.push_back({key.first, key.second, opts.default_tag, -1});
  return Mesh(std::move(vertices), std::move(cells), boundary);
}

inline Mesh read_msh(const std::string& path, const MshOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mesh file '" + path + "'");
  return read_msh(in, opts);
}

/// Writes the straight mesh in MSH 2.2 ASCII. Boundary lines carry physical
/// groups 1 ("slip") and 2 ("dirichlet"); triangles carry group 3.
inline void write_msh(const Mesh& mesh, std::ostream& out) {
  out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
  out << "$PhysicalNames\n3\n1 1 \"slip\"\n1 2 \"dirichlet\"\n2 3 \"domain\"\n$EndPhysicalNames\n";
  out << "$Nodes\n" << mesh.num_vertices() << "\n";
  out.precision(17);
  for (int v = 0; v < mesh.num_vertices(); ++v)
    out << v + 1 << " " << mesh.vertex(v).x() << " " << mesh.vertex(v).y() << " 0\n";
  out << "$EndNodes\n$Elements\n" << mesh.boundary_facets().size() + mesh.num_cells() << "\n";
  long id = 1;
  for (const auto& f : mesh.boundary_facets()) {
    const int le = f.local_edge;
    const auto& c = mesh.cell(f.cell);
    const int physical = f.tag == BoundaryTag::slip ? 1 : 2;
    out << id++ << " 1 2 " << physical << " " << physical << " " << c[kRefEdges[le][0]] + 1 << " "
        << c[kRefEdges[le][1]] + 1 << "\n";
  }
  for (int c = 0; c < mesh.num_cells(); ++c)
    out << id++ << " 2 2 3 3 " << mesh.cell(c)[0] + 1 << " " << mesh.cell(c)[1] + 1 << " " << mesh.cell(c)[2] + 1
        << "\n";
  out << "$EndElements\n";
}

inline void write_msh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh file '" + path + "'");
  write_msh(mesh, out);
}

/// Assigns chart arcs to the boundary facets of a mesh read from a file.
inline Mesh attach_chart(const Mesh& mesh, const BoundaryChart& chart, double tolerance = 1e-9) {
  std::vector<int> arcs;
  for (const auto& f : mesh.boundary_facets()) {
    const auto& e = mesh.edge(f.edge);
    const auto arc = chart.match_facet(mesh.vertex(e[0]), mesh.vertex(e[1]), tolerance);
    if (!arc) throw GeometryError("boundary edge " + std::to_string(f.edge) + " lies on no chart arc");
    arcs.push_back(*arc);
  }
  return mesh.with_arcs(arcs);
}

/// Debug dump of the mesh topology.
inline nlohmann::json mesh_to_json(const Mesh& mesh) {
  nlohmann::json j;
  j["vertices"] = nlohmann::json::array();
  for (const Vec2& v : mesh.vertices()) j["vertices"].push_back({v.x(), v.y()});
  j["cells"] = mesh.cells();
  j["edges"] = nlohmann::json::array();
  for (int e = 0; e < mesh.num_edges(); ++e) j["edges"].push_back(mesh.edge(e));
  j["boundary_facets"] = nlohmann::json::array();
  for (const auto& f : mesh.boundary_facets())
    j["boundary_facets"].push_back(
        {{"edge", f.edge}, {"cell", f.cell}, {"local_edge", f.local_edge}, {"tag", to_string(f.tag)}, {"arc", f.arc}});
  j["geometry_order"] = mesh.geometry_order();
  int curved = 0;
  for (int c = 0; c < mesh.num_cells(); ++c) curved += mesh.is_curved(c);
  j["curved_cells"] = curved;
  return j;
}

}  // namespace hcurlslip
