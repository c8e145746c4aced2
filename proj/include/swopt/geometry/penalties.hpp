#pragma once
/**
 * @file penalties.hpp
 * @brief volume, perimeter and thickness penalties and their shape derivatives
 *
 *   J2 = -nu1 |Omega|,   J3 = nu2 |Gamma3|,
 *   J4 = nu3 int_Gamma3 int_0^dmin [d(x - xi n)^+]^2 dxi ds,
 *
 * with n the unit normal of Gamma3 pointing into the water, so offsets walk
 * into the obstacle and only re-enter water (d > 0) across thin parts.
 * Derivatives are returned as per-vertex covectors G with DJ[V] = sum G_v . V_v,
 * exact for the discrete functionals and piecewise-linear V. For DJ2 this is
 * -nu1 int div V and for DJ3 the tangential divergence nu2 int (div V - n.dV/dn n).
 */

#include "swopt/dg/quadrature.hpp"
#include "swopt/geometry/distance.hpp"

#include <cmath>
#include <vector>

namespace swopt {

struct PenaltyParams {
  double nu1 = 1e-4;
  double nu2 = 1e-4;
  double nu3 = 1e-2;
  double d_min = 0.05;
  int ray_points = 8;  ///< Gauss points along each offset ray
  int edge_points = 4; ///< Gauss points along each obstacle edge

  void validate() const {
    if (!(nu1 >= 0.0 && nu2 >= 0.0 && nu3 >= 0.0)) throw ConfigError("penalty.nu: weights must be >= 0");
    if (!(d_min > 0.0)) throw ConfigError("penalty.d_min: must be > 0");
    if (ray_points < 1 || edge_points < 1) throw ConfigError("penalty: quadrature counts must be >= 1");
  }
};

struct PenaltyValues {
  double J2 = 0.0, J3 = 0.0, J4 = 0.0;
  double total() const { return J2 + J3 + J4; }
};

struct PenaltyGradients {
  VertexField2 dJ2, dJ3, dJ4;
};

struct PenaltyDerivatives {
  double DJ2 = 0.0, DJ3 = 0.0, DJ4 = 0.0;
  double total() const { return DJ2 + DJ3 + DJ4; }
};

namespace detail {

/// J4 and optionally its vertex covector
inline double thickness_penalty(const Mesh& mesh, const PenaltyParams& p, VertexField2* grad) {
  if (grad) grad->assign(mesh.num_vertices(), Vec2::Zero());
  if (p.nu3 == 0.0) return 0.0;
  const BoundaryPolylines bnd = BoundaryPolylines::from_mesh(mesh);
  const QuadratureRule es = gauss_legendre(p.edge_points);
  const QuadratureRule rs = gauss_legendre(p.ray_points);
  double J = 0.0;
  for (int f : mesh.faces_with_tag(BoundaryTag::Obstacle)) {
    const Face& face = mesh.face(f);
    const Point a = mesh.vertex(face.v[0]), b = mesh.vertex(face.v[1]);
    const double L = (b - a).norm();
    const Vec2 t = (b - a) / L;
    const Vec2 n(-t.y(), t.x()); // into the water
    for (std::size_t q = 0; q < es.size(); ++q) {
      const double s = es.points[q].x();
      for (std::size_t k = 0; k < rs.size(); ++k) {
        const double xi = p.d_min * rs.points[k].x();
        const double c = p.nu3 * es.weights[q] * rs.weights[k] * p.d_min;
        const Point y = a + s * (b - a) - xi * n;
        const BoundaryProjection pr = project_to_boundary(y, bnd);
        if (pr.distance == 0.0 || !bnd.inside(y)) continue;
        const double d = pr.distance;
        J += c * L * d * d;
        if (!grad) continue;
        const Vec2 gd = (y - pr.point) / d;
        const double w2 = 2.0 * c * L * d;
        const double tg = t.dot(gd);
        auto& G = *grad;
        G[face.v[0]] += -c * d * d * t + w2 * ((1.0 - s) * gd - (xi / L) * tg * n);
        G[face.v[1]] += c * d * d * t + w2 * (s * gd + (xi / L) * tg * n);
        // moving the closest segment moves the distance (envelope theorem)
        const auto& seg = bnd.segment(std::size_t(pr.segment));
        G[seg.va] -= w2 * (1.0 - pr.lambda) * gd;
        G[seg.vb] -= w2 * pr.lambda * gd;
      }
    }
  }
  return J;
}

} // namespace detail

inline PenaltyValues penalties(const Mesh& mesh, const PenaltyParams& p) {
  p.validate();
  PenaltyValues v;
  v.J2 = -p.nu1 * mesh.total_area();
  double len = 0.0;
  for (int f : mesh.faces_with_tag(BoundaryTag::Obstacle)) len += mesh.geometry().face_length[f];
  v.J3 = p.nu2 * len;
  v.J4 = detail::thickness_penalty(mesh, p, nullptr);
  return v;
}

inline PenaltyGradients penalty_gradients(const Mesh& mesh, const PenaltyParams& p) {
  p.validate();
  PenaltyGradients g;
  g.dJ2.assign(mesh.num_vertices(), Vec2::Zero());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.triangle(int(c));
    for (int i = 0; i < 3; ++i) {
      const Point& b = mesh.vertex(t[(i + 1) % 3]);
      const Point& d = mesh.vertex(t[(i + 2) % 3]);
      // d area / d x_i for a counter-clockwise triangle
      g.dJ2[t[i]] += -p.nu1 * 0.5 * Vec2(b.y() - d.y(), d.x() - b.x());
    }
  }
  g.dJ3.assign(mesh.num_vertices(), Vec2::Zero());
  for (int f : mesh.faces_with_tag(BoundaryTag::Obstacle)) {
    const Face& face = mesh.face(f);
    const Vec2 t = (mesh.vertex(face.v[1]) - mesh.vertex(face.v[0])).normalized();
    g.dJ3[face.v[0]] -= p.nu2 * t;
    g.dJ3[face.v[1]] += p.nu2 * t;
  }
  detail::thickness_penalty(mesh, p, &g.dJ4);
  return g;
}

inline double apply_covector(const VertexField2& G, const VertexField2& V) {
  if (G.size() != V.size()) throw DomainError("covector and vector field sizes differ");
  double s = 0.0;
  for (std::size_t i = 0; i < G.size(); ++i) s += G[i].dot(V[i]);
  return s;
}

inline PenaltyDerivatives penalty_derivatives(const Mesh& mesh, const VertexField2& V, const PenaltyParams& p) {
  const PenaltyGradients g = penalty_gradients(mesh, p);
  return {apply_covector(g.dJ2, V), apply_covector(g.dJ3, V), apply_covector(g.dJ4, V)};
}

/**
 * @brief discrete curvature at obstacle vertices: turning angle over the mean
 *        adjacent edge length, signed as div of the outward normal of Omega
 *
 * Zero at vertices off Gamma3.
 */
inline std::vector<double> obstacle_curvature(const Mesh& mesh) {
  std::vector<double> kappa(mesh.num_vertices(), 0.0);
  for (const auto& loop : mesh.loops()) {
    if (!loop.obstacle) continue;
    const std::size_t m = loop.faces.size();
    for (std::size_t i = 0; i < m; ++i) {
      const Face& f1 = mesh.face(loop.faces[i]);
      const Face& f2 = mesh.face(loop.faces[(i + 1) % m]);
      const Vec2 e1 = mesh.vertex(f1.v[1]) - mesh.vertex(f1.v[0]);
      const Vec2 e2 = mesh.vertex(f2.v[1]) - mesh.vertex(f2.v[0]);
      const double turn = std::atan2(e1.x() * e2.y() - e1.y() * e2.x(), e1.dot(e2));
      kappa[f1.v[1]] = turn / (0.5 * (e1.norm() + e2.norm()));
    }
  }
  return kappa;
}

/// nu2 sum_v kappa_v (V_v . n_v) l_v over obstacle vertices, the curvature form of DJ3
inline double dj3_curvature_form(const Mesh& mesh, const VertexField2& V, double nu2) {
  const auto kappa = obstacle_curvature(mesh);
  double s = 0.0;
  for (const auto& loop : mesh.loops()) {
    if (!loop.obstacle) continue;
    const std::size_t m = loop.faces.size();
    for (std::size_t i = 0; i < m; ++i) {
      const int f1 = loop.faces[i], f2 = loop.faces[(i + 1) % m];
      const auto& geo = mesh.geometry();
      const Vec2 n = (geo.face_normal[f1] + geo.face_normal[f2]).normalized();
      const double l = 0.5 * (geo.face_length[f1] + geo.face_length[f2]);
      const int v = mesh.face(f1).v[1];
      s += kappa[v] * V[v].dot(n) * l;
    }
  }
  return nu2 * s;
}

} // namespace swopt
