#pragma once
/**
 * @file msh_io.hpp
 * @brief Gmsh MSH 2.2 ASCII reader and writer
 *
 * Only 2-node lines (type 1) and 3-node triangles (type 2) are used. Line
 * elements carry the boundary tag in their physical tag; triangles may carry
 * any tag. Point elements (type 15) are skipped. Nodes not referenced by a
 * triangle are dropped.
 */

#include "swopt/mesh/mesh.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>

namespace swopt {

/// physical tag -> boundary tag; the default is {1: Shore, 2: OpenSea, 3: Obstacle}
using PhysicalTagMap = std::map<int, BoundaryTag>;

inline PhysicalTagMap default_physical_tags() {
  return {{1, BoundaryTag::Shore}, {2, BoundaryTag::OpenSea}, {3, BoundaryTag::Obstacle}};
}

namespace detail {

inline std::string next_line(std::istream& in, int& lineno) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("unexpected end of file after line " + std::to_string(lineno));
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

inline void expect(std::istream& in, int& lineno, const std::string& token) {
  std::string line = next_line(in, lineno);
  if (line != token)
    throw ParseError("line " + std::to_string(lineno) + ": expected '" + token + "', got '" + line + "'");
}

} // namespace detail

inline Mesh read_msh(std::istream& in, const PhysicalTagMap& tags = default_physical_tags()) {
  int lineno = 0;
  std::unordered_map<long, Point> nodes;
  std::vector<long> node_order;
  std::vector<std::pair<std::array<long, 3>, long>> tris;
  std::vector<std::pair<std::array<long, 2>, int>> lines;
  bool have_format = false, have_nodes = false, have_elements = false;

  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == "$MeshFormat") {
      std::istringstream ss(detail::next_line(in, lineno));
      std::string version;
      int file_type = -1, data_size = 0;
      if (!(ss >> version >> file_type >> data_size))
        throw ParseError("line " + std::to_string(lineno) + ": malformed $MeshFormat");
      if (version.rfind("2.", 0) != 0)
        throw ParseError("unsupported MSH version " + version + " (need 2.2)");
      if (file_type != 0) throw ParseError("binary MSH files are not supported");
      detail::expect(in, lineno, "$EndMeshFormat");
      have_format = true;
    } else if (line == "$Nodes") {
      long n = 0;
      if (!(std::istringstream(detail::next_line(in, lineno)) >> n) || n < 0)
        throw ParseError("line " + std::to_string(lineno) + ": bad node count");
      for (long i = 0; i < n; ++i) {
        std::istringstream ss(detail::next_line(in, lineno));
        long id;
        double x, y, z;
        if (!(ss >> id >> x >> y >> z))
          throw ParseError("line " + std::to_string(lineno) + ": malformed node");
        if (!nodes.emplace(id, Point(x, y)).second)
          throw ParseError("line " + std::to_string(lineno) + ": duplicate node id " + std::to_string(id));
        node_order.push_back(id);
      }
      detail::expect(in, lineno, "$EndNodes");
      have_nodes = true;
    } else if (line == "$Elements") {
      long n = 0;
      if (!(std::istringstream(detail::next_line(in, lineno)) >> n) || n < 0)
        throw ParseError("line " + std::to_string(lineno) + ": bad element count");
      for (long i = 0; i < n; ++i) {
        std::istringstream ss(detail::next_line(in, lineno));
        long id;
        int type, ntags;
        if (!(ss >> id >> type >> ntags) || ntags < 0)
          throw ParseError("line " + std::to_string(lineno) + ": malformed element header");
        std::vector<long> tv(ntags);
        for (auto& t : tv)
          if (!(ss >> t)) throw ParseError("line " + std::to_string(lineno) + ": missing element tags");
        const long physical = ntags > 0 ? tv[0] : 0;
        if (type == 1) {
          std::array<long, 2> v;
          if (!(ss >> v[0] >> v[1])) throw ParseError("line " + std::to_string(lineno) + ": malformed line");
          lines.push_back({v, static_cast<int>(physical)});
        } else if (type == 2) {
          std::array<long, 3> v;
          if (!(ss >> v[0] >> v[1] >> v[2]))
            throw ParseError("line " + std::to_string(lineno) + ": malformed triangle");
          tris.push_back({v, physical});
        } else if (type == 15) {
          continue;
        } else {
          throw ParseError("line " + std::to_string(lineno) + ": unsupported element type " +
                           std::to_string(type));
        }
      }
      detail::expect(in, lineno, "$EndElements");
      have_elements = true;
    } else if (line.front() == '$') {
      // skip unknown sections such as $PhysicalNames
      const std::string end = "$End" + line.substr(1);
      while (detail::next_line(in, lineno) != end) {}
    } else {
      throw ParseError("line " + std::to_string(lineno) + ": unexpected content '" + line + "'");
    }
  }
  if (!have_format || !have_nodes || !have_elements)
    throw ParseError("MSH file lacks $MeshFormat, $Nodes or $Elements");
  if (tris.empty()) throw ParseError("MSH file contains no triangles");

  // keep referenced nodes in file order
  std::unordered_map<long, int> index;
  for (const auto& [v, phys] : tris)
    for (long id : v) {
      if (!nodes.count(id)) throw ParseError("element references undefined node " + std::to_string(id));
      index.emplace(id, -1);
    }
  std::vector<Point> vertices;
  for (long id : node_order) {
    auto it = index.find(id);
    if (it == index.end()) continue;
    it->second = static_cast<int>(vertices.size());
    vertices.push_back(nodes.at(id));
  }
  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(tris.size());
  for (const auto& [v, phys] : tris) triangles.push_back({index.at(v[0]), index.at(v[1]), index.at(v[2])});
  std::vector<BoundaryEdge> boundary;
  for (const auto& [v, phys] : lines) {
    auto it = tags.find(phys);
    if (it == tags.end()) throw ParseError("unknown physical tag " + std::to_string(phys) + " on line element");
    auto a = index.find(v[0]), b = index.find(v[1]);
    if (a == index.end() || b == index.end())
      throw ParseError("line element is not attached to any triangle");
    boundary.push_back({{a->second, b->second}, it->second});
  }
  return Mesh(std::move(vertices), std::move(triangles), boundary);
}

inline Mesh load_msh(const std::filesystem::path& path,
                     const PhysicalTagMap& tags = default_physical_tags()) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mesh file " + path.string());
  return read_msh(in, tags);
}

/// writes lines with physical = elementary = boundary tag, triangles with tag 10
inline void write_msh(std::ostream& out, const Mesh& mesh) {
  out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
  out << "$Nodes\n" << mesh.num_vertices() << "\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i)
    out << i + 1 << ' ' << mesh.vertex(static_cast<int>(i)).x() << ' '
        << mesh.vertex(static_cast<int>(i)).y() << " 0\n";
  out << "$EndNodes\n";
  const auto& bfaces = mesh.boundary_faces();
  out << "$Elements\n" << bfaces.size() + mesh.num_cells() << "\n";
  long id = 1;
  for (int f : bfaces) {
    const Face& face = mesh.face(f);
    out << id++ << " 1 2 " << face.tag << ' ' << face.tag << ' ' << face.v[0] + 1 << ' '
        << face.v[1] + 1 << "\n";
  }
  for (const auto& t : mesh.triangles())
    out << id++ << " 2 2 10 10 " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << "\n";
  out << "$EndElements\n";
}

inline void save_msh(const std::filesystem::path& path, const Mesh& mesh) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write mesh file " + path.string());
  write_msh(out, mesh);
  if (!out) throw Error("error while writing " + path.string());
}

} // namespace swopt
