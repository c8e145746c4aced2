#pragma once
/**
 * @file vtk_writer.hpp
 * @brief legacy VTK ASCII UNSTRUCTURED_GRID output
 */

#include "swopt/mesh/mesh.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <string>
#include <vector>

namespace swopt {

/// a named scalar (ncomp = 1) or 2D/3D vector (ncomp = 2 or 3) field
struct VtkField {
  enum class Location { Point, Cell };
  std::string name;
  Location location = Location::Point;
  int ncomp = 1;
  std::vector<double> data; ///< interleaved, size = count * ncomp
};

inline VtkField point_scalar(std::string name, std::vector<double> data) {
  return {std::move(name), VtkField::Location::Point, 1, std::move(data)};
}

inline VtkField cell_scalar(std::string name, std::vector<double> data) {
  return {std::move(name), VtkField::Location::Cell, 1, std::move(data)};
}

inline VtkField point_vector(std::string name, const std::vector<Vec2>& v) {
  VtkField f{std::move(name), VtkField::Location::Point, 2, {}};
  f.data.reserve(2 * v.size());
  for (const auto& x : v) {
    f.data.push_back(x.x());
    f.data.push_back(x.y());
  }
  return f;
}

namespace detail {

inline void write_vtk_section(std::ostream& out, const std::vector<const VtkField*>& fields,
                              std::size_t count) {
  for (const VtkField* f : fields) {
    if (f->ncomp < 1 || f->ncomp > 3 || f->data.size() != count * f->ncomp)
      throw Error("VTK field '" + f->name + "' has inconsistent size");
    std::string name = f->name;
    for (char& ch : name)
      if (ch == ' ') ch = '_';
    if (f->ncomp == 1) {
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : f->data) out << v << "\n";
    } else {
      out << "VECTORS " << name << " double\n";
      for (std::size_t i = 0; i < count; ++i) {
        for (int c = 0; c < 3; ++c) out << (c ? " " : "") << (c < f->ncomp ? f->data[i * f->ncomp + c] : 0.0);
        out << "\n";
      }
    }
  }
}

} // namespace detail

inline void write_vtk(std::ostream& out, const Mesh& mesh, const std::vector<VtkField>& fields,
                      const std::string& title = "swopt") {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& p : mesh.vertices()) out << p.x() << ' ' << p.y() << " 0\n";
  out << "CELLS " << mesh.num_cells() << ' ' << 4 * mesh.num_cells() << "\n";
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << "\n";
  out << "CELL_TYPES " << mesh.num_cells() << "\n";
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) out << "5\n";

  std::vector<const VtkField*> pf, cf;
  for (const auto& f : fields) (f.location == VtkField::Location::Point ? pf : cf).push_back(&f);
  if (!pf.empty()) {
    out << "POINT_DATA " << mesh.num_vertices() << "\n";
    detail::write_vtk_section(out, pf, mesh.num_vertices());
  }
  if (!cf.empty()) {
    out << "CELL_DATA " << mesh.num_cells() << "\n";
    detail::write_vtk_section(out, cf, mesh.num_cells());
  }
}

inline void write_vtk(const std::filesystem::path& path, const Mesh& mesh,
                      const std::vector<VtkField>& fields, const std::string& title = "swopt") {
  std::ofstream out(path);
  if (!out) throw Error("cannot write VTK file " + path.string());
  write_vtk(out, mesh, fields, title);
  if (!out) throw Error("error while writing " + path.string());
}

} // namespace swopt
