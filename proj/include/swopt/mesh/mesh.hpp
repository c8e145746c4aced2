#pragma once
/**
 * @file mesh.hpp
 * @brief unstructured triangle mesh with tagged boundary loops
 *
 * The topology (connectivity, faces, boundary loops) is shared between a mesh
 * and all meshes derived from it by moving vertices. Geometry is recomputed
 * for every vertex configuration. A Mesh is immutable once constructed.
 */

#include "swopt/common.hpp"
#include "swopt/mesh/predicates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace swopt {

enum class BoundaryTag : int { Shore = 1, OpenSea = 2, Obstacle = 3 };

inline const char* to_string(BoundaryTag tag) {
  switch (tag) {
  case BoundaryTag::Shore: return "Shore";
  case BoundaryTag::OpenSea: return "OpenSea";
  case BoundaryTag::Obstacle: return "Obstacle";
  }
  return "?";
}

struct BoundaryEdge {
  std::array<int, 2> v;
  BoundaryTag tag;
};

/// an edge of the triangulation; v[0] -> v[1] is counter-clockwise in the left cell
struct Face {
  std::array<int, 2> v{};
  int left = -1;
  int right = -1; ///< -1 on the boundary
  int left_local = -1;  ///< local edge index k (vertex k -> k+1) in the left cell
  int right_local = -1;
  int tag = 0; ///< 0 for interior faces, otherwise a BoundaryTag value

  bool is_boundary() const { return right < 0; }
  BoundaryTag boundary_tag() const { return static_cast<BoundaryTag>(tag); }
};

/// closed chain of boundary faces with the domain on its left
struct BoundaryLoop {
  std::vector<int> faces;
  bool obstacle = false;
  double signed_area = 0.0; ///< shoelace area at construction time
};

/// per-vertex boundary membership bits
enum VertexFlag : std::uint8_t {
  kOnShore = 1u << 0,
  kOnOpenSea = 1u << 1,
  kOnObstacle = 1u << 2,
};

struct Topology {
  std::vector<std::array<int, 3>> triangles;
  std::vector<Face> faces;
  std::vector<std::array<int, 3>> cell_faces; ///< face index of local edge k
  std::vector<int> boundary_faces;
  std::vector<BoundaryLoop> loops;
  std::vector<std::uint8_t> vertex_flags;
  /// CSR vertex -> incident cells
  std::vector<int> vertex_cell_offsets;
  std::vector<int> vertex_cells;
};

/// geometric quantities derived from vertex positions
struct GeometryCache {
  std::vector<double> area;       ///< signed area (positive for valid cells)
  std::vector<double> diameter;   ///< longest edge
  std::vector<double> min_height; ///< smallest altitude, used for CFL bounds
  std::vector<Point> centroid;
  std::vector<Mat2> jacobian;     ///< columns x1-x0, x2-x0
  std::vector<Mat2> inv_jacobian;
  std::vector<double> face_length;
  std::vector<Vec2> face_normal;  ///< unit normal pointing out of the left cell
  std::vector<double> face_h;     ///< min(cell area)/face length, SIPG length scale
};

class Mesh {
public:
  Mesh() = default;

  /**
   * @brief build and validate a mesh
   *
   * Clockwise triangles are reoriented. Throws MeshError on zero-area cells,
   * non-manifold edges, untagged or dangling boundary edges, open loops and
   * loops mixing obstacle with outer tags.
   */
  Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles,
       const std::vector<BoundaryEdge>& boundary)
      : vertices_(std::move(vertices)) {
    auto topo = std::make_shared<Topology>();
    topo->triangles = std::move(triangles);
    orient_and_check_cells(*topo);
    build_faces(*topo, boundary);
    build_loops(*topo);
    build_vertex_adjacency(*topo);
    topology_ = std::move(topo);
    compute_geometry();
    check_boundary_normals();
  }

  /// same connectivity, new vertex positions; no validity checks
  Mesh with_vertices(std::vector<Point> vertices) const {
    if (vertices.size() != vertices_.size())
      throw MeshError("with_vertices: vertex count mismatch");
    Mesh m;
    m.vertices_ = std::move(vertices);
    m.topology_ = topology_;
    m.compute_geometry();
    return m;
  }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_cells() const { return topology_->triangles.size(); }
  std::size_t num_faces() const { return topology_->faces.size(); }

  const std::vector<Point>& vertices() const { return vertices_; }
  const Point& vertex(int i) const { return vertices_[i]; }
  const std::vector<std::array<int, 3>>& triangles() const { return topology_->triangles; }
  const std::array<int, 3>& triangle(int c) const { return topology_->triangles[c]; }
  const std::vector<Face>& faces() const { return topology_->faces; }
  const Face& face(int f) const { return topology_->faces[f]; }
  const std::array<int, 3>& cell_faces(int c) const { return topology_->cell_faces[c]; }
  const std::vector<int>& boundary_faces() const { return topology_->boundary_faces; }
  const std::vector<BoundaryLoop>& loops() const { return topology_->loops; }
  std::uint8_t vertex_flags(int v) const { return topology_->vertex_flags[v]; }
  bool on_obstacle(int v) const { return vertex_flags(v) & kOnObstacle; }
  bool on_outer_boundary(int v) const { return vertex_flags(v) & (kOnShore | kOnOpenSea); }
  const GeometryCache& geometry() const { return geom_; }
  const Topology& topology() const { return *topology_; }
  bool shares_topology(const Mesh& other) const { return topology_ == other.topology_; }

  std::span<const int> cells_of_vertex(int v) const {
    const auto& t = *topology_;
    return {t.vertex_cells.data() + t.vertex_cell_offsets[v],
            static_cast<std::size_t>(t.vertex_cell_offsets[v + 1] - t.vertex_cell_offsets[v])};
  }

  /// boundary edges in face orientation (domain on the left)
  std::vector<BoundaryEdge> boundary_edges() const {
    std::vector<BoundaryEdge> out;
    out.reserve(boundary_faces().size());
    for (int f : boundary_faces()) out.push_back({face(f).v, face(f).boundary_tag()});
    return out;
  }

  /// faces carrying the given tag
  std::vector<int> faces_with_tag(BoundaryTag tag) const {
    std::vector<int> out;
    for (int f : boundary_faces())
      if (face(f).boundary_tag() == tag) out.push_back(f);
    return out;
  }

  double total_area() const {
    return std::accumulate(geom_.area.begin(), geom_.area.end(), 0.0);
  }

  /// signed shoelace area of a loop with the current vertex positions
  double loop_area(const BoundaryLoop& loop) const {
    double a = 0.0;
    for (int f : loop.faces) {
      const Point& p = vertices_[face(f).v[0]];
      const Point& q = vertices_[face(f).v[1]];
      a += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * a;
  }

  /// physical coordinates of reference point (xi, eta) in cell c
  Point map_to_physical(int c, double xi, double eta) const {
    return vertices_[triangle(c)[0]] + geom_.jacobian[c] * Vec2(xi, eta);
  }

private:
  static double signed_area(const Point& a, const Point& b, const Point& c) {
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
  }

  void orient_and_check_cells(Topology& t) const {
    const int nv = static_cast<int>(vertices_.size());
    for (std::size_t c = 0; c < t.triangles.size(); ++c) {
      auto& tri = t.triangles[c];
      for (int v : tri)
        if (v < 0 || v >= nv)
          throw MeshError("triangle " + std::to_string(c) + " references missing vertex " +
                          std::to_string(v));
      const int o = predicates::orient2d(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
      if (o == 0) throw MeshError("triangle " + std::to_string(c) + " has zero area");
      if (o < 0) std::swap(tri[1], tri[2]);
    }
  }

  static std::pair<int, int> key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

  void build_faces(Topology& t, const std::vector<BoundaryEdge>& boundary) const {
    std::map<std::pair<int, int>, int> index;
    t.cell_faces.assign(t.triangles.size(), {-1, -1, -1});
    for (int c = 0; c < static_cast<int>(t.triangles.size()); ++c) {
      const auto& tri = t.triangles[c];
      for (int k = 0; k < 3; ++k) {
        const int a = tri[k], b = tri[(k + 1) % 3];
        auto [it, inserted] = index.try_emplace(key(a, b), static_cast<int>(t.faces.size()));
        if (inserted) {
          Face f;
          f.v = {a, b};
          f.left = c;
          f.left_local = k;
          t.faces.push_back(f);
        } else {
          Face& f = t.faces[it->second];
          if (f.right >= 0)
            throw MeshError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                            ") shared by more than two triangles");
          if (f.v[0] != b || f.v[1] != a)
            throw MeshError("inconsistent orientation across edge (" + std::to_string(a) + "," +
                            std::to_string(b) + ")");
          f.right = c;
          f.right_local = k;
        }
        t.cell_faces[c][k] = it->second;
      }
    }

    for (const auto& be : boundary) {
      auto it = index.find(key(be.v[0], be.v[1]));
      if (it == index.end())
        throw MeshError("boundary edge (" + std::to_string(be.v[0]) + "," +
                        std::to_string(be.v[1]) + ") is not an edge of the triangulation");
      Face& f = t.faces[it->second];
      if (!f.is_boundary())
        throw MeshError("tagged edge (" + std::to_string(be.v[0]) + "," +
                        std::to_string(be.v[1]) + ") is interior");
      const int tag = static_cast<int>(be.tag);
      if (tag < 1 || tag > 3) throw MeshError("unknown boundary tag " + std::to_string(tag));
      if (f.tag != 0 && f.tag != tag)
        throw MeshError("boundary edge tagged twice with different tags");
      f.tag = tag;
    }
    for (int i = 0; i < static_cast<int>(t.faces.size()); ++i) {
      const Face& f = t.faces[i];
      if (!f.is_boundary()) continue;
      if (f.tag == 0)
        throw MeshError("boundary edge (" + std::to_string(f.v[0]) + "," +
                        std::to_string(f.v[1]) + ") has no boundary tag");
      t.boundary_faces.push_back(i);
    }
  }

  void build_loops(Topology& t) const {
    const int nv = static_cast<int>(vertices_.size());
    std::vector<int> outgoing(nv, -1);
    std::vector<int> incoming_count(nv, 0);
    t.vertex_flags.assign(nv, 0);
    for (int f : t.boundary_faces) {
      const Face& face = t.faces[f];
      if (outgoing[face.v[0]] >= 0)
        throw MeshError("boundary pinches at vertex " + std::to_string(face.v[0]));
      outgoing[face.v[0]] = f;
      ++incoming_count[face.v[1]];
      const std::uint8_t bit = face.tag == 1 ? kOnShore : (face.tag == 2 ? kOnOpenSea : kOnObstacle);
      t.vertex_flags[face.v[0]] |= bit;
      t.vertex_flags[face.v[1]] |= bit;
    }
    for (int f : t.boundary_faces) {
      const Face& face = t.faces[f];
      if (outgoing[face.v[1]] < 0 || incoming_count[face.v[1]] != 1)
        throw MeshError("open boundary loop at vertex " + std::to_string(face.v[1]));
    }
    std::vector<char> visited(t.faces.size(), 0);
    for (int start : t.boundary_faces) {
      if (visited[start]) continue;
      BoundaryLoop loop;
      int f = start;
      bool has_obstacle = false, has_outer = false;
      do {
        if (visited[f]) throw MeshError("boundary loop revisits an edge");
        visited[f] = 1;
        loop.faces.push_back(f);
        (t.faces[f].tag == 3 ? has_obstacle : has_outer) = true;
        f = outgoing[t.faces[f].v[1]];
      } while (f != start);
      if (has_obstacle && has_outer)
        throw MeshError("obstacle boundary shares a loop with shore/open-sea edges");
      loop.obstacle = has_obstacle;
      double a = 0.0;
      for (int lf : loop.faces) {
        const Point& p = vertices_[t.faces[lf].v[0]];
        const Point& q = vertices_[t.faces[lf].v[1]];
        a += p.x() * q.y() - q.x() * p.y();
      }
      loop.signed_area = 0.5 * a;
      t.loops.push_back(std::move(loop));
    }
    for (int v = 0; v < nv; ++v) {
      const auto fl = t.vertex_flags[v];
      if ((fl & kOnObstacle) && (fl & (kOnShore | kOnOpenSea)))
        throw MeshError("obstacle loop touches the outer boundary at vertex " + std::to_string(v));
    }
  }

  static void build_vertex_adjacency(Topology& t) {
    int nv = static_cast<int>(t.vertex_flags.size());
    t.vertex_cell_offsets.assign(nv + 1, 0);
    for (const auto& tri : t.triangles)
      for (int v : tri) ++t.vertex_cell_offsets[v + 1];
    for (int v = 0; v < nv; ++v) t.vertex_cell_offsets[v + 1] += t.vertex_cell_offsets[v];
    t.vertex_cells.assign(t.vertex_cell_offsets[nv], -1);
    std::vector<int> fill(t.vertex_cell_offsets.begin(), t.vertex_cell_offsets.end() - 1);
    for (int c = 0; c < static_cast<int>(t.triangles.size()); ++c)
      for (int v : t.triangles[c]) t.vertex_cells[fill[v]++] = c;
  }

  void compute_geometry() {
    const auto& t = *topology_;
    const std::size_t nc = t.triangles.size();
    geom_.area.resize(nc);
    geom_.diameter.resize(nc);
    geom_.min_height.resize(nc);
    geom_.centroid.resize(nc);
    geom_.jacobian.resize(nc);
    geom_.inv_jacobian.resize(nc);
    for (std::size_t c = 0; c < nc; ++c) {
      const auto& tri = t.triangles[c];
      const Point& a = vertices_[tri[0]];
      const Point& b = vertices_[tri[1]];
      const Point& d = vertices_[tri[2]];
      Mat2 jac;
      jac.col(0) = b - a;
      jac.col(1) = d - a;
      geom_.jacobian[c] = jac;
      const double det = jac.determinant();
      geom_.area[c] = 0.5 * det;
      geom_.inv_jacobian[c] = det != 0.0 ? Mat2(jac.inverse()) : Mat2::Zero();
      const double l0 = (b - a).norm(), l1 = (d - b).norm(), l2 = (a - d).norm();
      const double lmax = std::max({l0, l1, l2});
      geom_.diameter[c] = lmax;
      geom_.min_height[c] = lmax > 0.0 ? 2.0 * std::abs(geom_.area[c]) / lmax : 0.0;
      geom_.centroid[c] = (a + b + d) / 3.0;
    }
    const std::size_t nf = t.faces.size();
    geom_.face_length.resize(nf);
    geom_.face_normal.resize(nf);
    geom_.face_h.resize(nf);
    for (std::size_t f = 0; f < nf; ++f) {
      const Face& face = t.faces[f];
      const Vec2 tangent = vertices_[face.v[1]] - vertices_[face.v[0]];
      const double len = tangent.norm();
      geom_.face_length[f] = len;
      // tangent rotated by -90 degrees points out of the left (CCW) cell
      geom_.face_normal[f] = len > 0.0 ? Vec2(Vec2(tangent.y(), -tangent.x()) / len) : Vec2(Vec2::Zero());
      double amin = std::abs(geom_.area[face.left]);
      if (face.right >= 0) amin = std::min(amin, std::abs(geom_.area[face.right]));
      geom_.face_h[f] = len > 0.0 ? amin / len : 0.0;
    }
  }

  void check_boundary_normals() const {
    for (int f : boundary_faces()) {
      const Face& face = this->face(f);
      const Point mid = 0.5 * (vertices_[face.v[0]] + vertices_[face.v[1]]);
      if ((geom_.centroid[face.left] - mid).dot(geom_.face_normal[f]) >= 0.0)
        throw MeshError("boundary normal of face " + std::to_string(f) + " points into the domain");
    }
  }

  std::vector<Point> vertices_;
  std::shared_ptr<const Topology> topology_;
  GeometryCache geom_;
};

/// result of validate_deformed
struct ValidityReport {
  bool valid = true;
  int inverted_cells = 0;
  double min_area = 0.0;
  std::vector<std::pair<int, int>> intersecting_faces; ///< obstacle face pairs

  explicit operator bool() const { return valid; }
};

/**
 * @brief positivity of all cells and simplicity of the obstacle boundary
 *
 * Obstacle segments may only touch when they are consecutive in a loop, and
 * then only at their shared endpoint. O(n^2) over obstacle faces.
 */
inline ValidityReport validate_deformed(const Mesh& mesh) {
  ValidityReport r;
  const auto& tris = mesh.triangles();
  r.min_area = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < tris.size(); ++c) {
    const auto& t = tris[c];
    const int o = predicates::orient2d(mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]));
    r.min_area = std::min(r.min_area, mesh.geometry().area[c]);
    if (o <= 0) ++r.inverted_cells;
  }
  std::vector<int> obst = mesh.faces_with_tag(BoundaryTag::Obstacle);
  std::sort(obst.begin(), obst.end());
  for (std::size_t i = 0; i < obst.size(); ++i) {
    const Face& fi = mesh.face(obst[i]);
    for (std::size_t j = i + 1; j < obst.size(); ++j) {
      const Face& fj = mesh.face(obst[j]);
      int shared = -1;
      int nshared = 0;
      for (int a : fi.v)
        for (int b : fj.v)
          if (a == b) {
            shared = a;
            ++nshared;
          }
      const Point& p1 = mesh.vertex(fi.v[0]);
      const Point& p2 = mesh.vertex(fi.v[1]);
      const Point& q1 = mesh.vertex(fj.v[0]);
      const Point& q2 = mesh.vertex(fj.v[1]);
      bool bad = false;
      if (nshared == 0) {
        bad = predicates::segments_intersect(p1, p2, q1, q2);
      } else if (nshared == 1) {
        // adjacent segments overlap beyond the common endpoint iff collinear and folded back
        const Point& pi = fi.v[0] == shared ? p2 : p1;
        const Point& qj = fj.v[0] == shared ? q2 : q1;
        const Point& s = mesh.vertex(shared);
        if (predicates::orient2d(s, pi, qj) == 0 && (pi - s).dot(qj - s) > 0.0) bad = true;
      } else {
        bad = true;
      }
      if (bad) r.intersecting_faces.emplace_back(obst[i], obst[j]);
    }
  }
  r.valid = r.inverted_cells == 0 && r.intersecting_faces.empty();
  return r;
}

/// gradients of the three P1 hat functions of cell c (row k = grad of the k-th local vertex)
inline Eigen::Matrix<double, 3, 2> p1_gradients(const Mesh& mesh, int c) {
  const auto& t = mesh.triangle(c);
  const Point& a = mesh.vertex(t[0]);
  const Point& b = mesh.vertex(t[1]);
  const Point& d = mesh.vertex(t[2]);
  const double twice = (b - a).x() * (d - a).y() - (b - a).y() * (d - a).x();
  Eigen::Matrix<double, 3, 2> g;
  g.row(0) = Vec2(b.y() - d.y(), d.x() - b.x()) / twice;
  g.row(1) = Vec2(d.y() - a.y(), a.x() - d.x()) / twice;
  g.row(2) = Vec2(a.y() - b.y(), b.x() - a.x()) / twice;
  return g;
}

/// per-vertex displacement field (length units)
using VertexField2 = std::vector<Vec2>;

/// vertices moved by step * W; connectivity and topology are shared
inline Mesh apply_deformation(const Mesh& mesh, const VertexField2& W, double step) {
  if (W.size() != mesh.num_vertices())
    throw MeshError("apply_deformation: field size does not match vertex count");
  std::vector<Point> moved(mesh.vertices());
  for (std::size_t i = 0; i < moved.size(); ++i) moved[i] += step * W[i];
  return mesh.with_vertices(std::move(moved));
}

} // namespace swopt
