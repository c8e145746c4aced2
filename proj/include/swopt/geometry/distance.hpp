#pragma once
/**
 * @file distance.hpp
 * @brief exact signed distance to closed polylines and closest-point projection
 *
 * The sign is positive inside the domain (odd crossing parity over all
 * loops) and negative outside, so holes cut by obstacles count as outside.
 * Queries are brute force over all segments.
 */

#include "swopt/mesh/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace swopt {

/// boundary segment with the domain on its left
struct BoundarySegment {
  Point a, b;
  int loop = 0;
  int va = -1, vb = -1; ///< mesh vertex ids when built from a mesh
  int face = -1;        ///< mesh face id when built from a mesh
};

class BoundaryPolylines {
public:
  BoundaryPolylines() = default;

  /// closed loops given as vertex lists (last point connects to the first); orientation is normalized
  explicit BoundaryPolylines(const std::vector<std::vector<Point>>& loops) {
    for (std::size_t l = 0; l < loops.size(); ++l) {
      const auto& pts = loops[l];
      if (pts.size() < 3) throw DomainError("BoundaryPolylines: a closed loop needs at least 3 points");
      for (std::size_t i = 0; i < pts.size(); ++i)
        segs_.push_back({pts[i], pts[(i + 1) % pts.size()], int(l)});
    }
    orient();
  }

  /// all boundary faces of a mesh, loop by loop in traversal order
  static BoundaryPolylines from_mesh(const Mesh& mesh) {
    BoundaryPolylines b;
    for (std::size_t l = 0; l < mesh.loops().size(); ++l)
      for (int f : mesh.loops()[l].faces) {
        const Face& face = mesh.face(f);
        b.segs_.push_back({mesh.vertex(face.v[0]), mesh.vertex(face.v[1]), int(l), face.v[0], face.v[1], f});
      }
    return b;
  }

  std::size_t size() const { return segs_.size(); }
  const BoundarySegment& segment(std::size_t i) const { return segs_[i]; }
  const std::vector<BoundarySegment>& segments() const { return segs_; }

  /// crossing parity over every segment
  bool inside(const Point& x) const {
    bool in = false;
    for (const auto& s : segs_) {
      const Point& p = s.a;
      const Point& q = s.b;
      if ((p.y() > x.y()) != (q.y() > x.y())) {
        const double xc = p.x() + (x.y() - p.y()) * (q.x() - p.x()) / (q.y() - p.y());
        if (x.x() < xc) in = !in;
      }
    }
    return in;
  }

  /// outward unit normal of segment i (right of a -> b)
  Vec2 outward_normal(std::size_t i) const {
    const Vec2 t = (segs_[i].b - segs_[i].a).normalized();
    return Vec2(t.y(), -t.x());
  }

private:
  void orient() {
    // flip loops whose left side is outside the domain
    std::vector<int> flip;
    for (std::size_t i = 0; i < segs_.size(); ++i) {
      const auto& s = segs_[i];
      if (int(flip.size()) > s.loop) continue;
      const Vec2 t = s.b - s.a;
      const double len = t.norm();
      if (len == 0.0) throw DomainError("BoundaryPolylines: zero-length segment");
      const Point probe = 0.5 * (s.a + s.b) + 1e-7 * len * Vec2(-t.y(), t.x()) / len;
      flip.push_back(inside(probe) ? 0 : 1);
    }
    for (auto& s : segs_)
      if (flip[s.loop]) std::swap(s.a, s.b);
  }

  std::vector<BoundarySegment> segs_;
};

namespace detail {

/// closest point parameter on segment [a, b]
inline double closest_parameter(const Point& x, const Point& a, const Point& b) {
  const Vec2 d = b - a;
  const double l2 = d.squaredNorm();
  if (l2 == 0.0) return 0.0;
  return std::clamp((x - a).dot(d) / l2, 0.0, 1.0);
}

} // namespace detail

struct BoundaryProjection {
  Point point;        ///< closest boundary point
  Vec2 normal;        ///< outward unit normal there
  int segment = -1;   ///< index of the chosen segment
  double lambda = 0;  ///< parameter of the point on that segment
  double distance = 0; ///< unsigned distance
  bool ridge = false; ///< another, distinct closest point exists within the tolerance
};

/**
 * @brief closest point on the boundary; ties go to the lowest segment index
 *
 * At a polyline vertex the normal is the normalized sum of the two adjacent
 * segment normals.
 */
inline BoundaryProjection project_to_boundary(const Point& x, const BoundaryPolylines& b, double ridge_tol = 1e-9) {
  if (b.size() == 0) throw DomainError("project_to_boundary: empty boundary");
  BoundaryProjection best;
  best.distance = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, Point>> cand(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    const auto& s = b.segment(i);
    const double lam = detail::closest_parameter(x, s.a, s.b);
    const Point p = s.a + lam * (s.b - s.a);
    const double d = (x - p).norm();
    cand[i] = {d, p};
    if (d < best.distance) {
      best.distance = d;
      best.point = p;
      best.segment = int(i);
      best.lambda = lam;
    }
  }
  const double tol = ridge_tol * (1.0 + best.distance);
  for (std::size_t i = 0; i < b.size(); ++i)
    if (cand[i].first <= best.distance + tol && (cand[i].second - best.point).norm() > tol) best.ridge = true;

  const std::size_t i = std::size_t(best.segment);
  best.normal = b.outward_normal(i);
  // at a vertex, average with the neighbouring segment of the same loop
  const auto& s = b.segment(i);
  const Point vtx = best.lambda <= 0.0 ? s.a : (best.lambda >= 1.0 ? s.b : Point(NAN, NAN));
  if (std::isfinite(vtx.x())) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (j == i || b.segment(j).loop != s.loop) continue;
      if ((b.segment(j).a - vtx).norm() == 0.0 || (b.segment(j).b - vtx).norm() == 0.0) {
        best.normal = (best.normal + b.outward_normal(j)).normalized();
        break;
      }
    }
  }
  return best;
}

/// signed distance: positive inside the domain, zero on the boundary, negative outside
inline double exact_distance(const Point& x, const BoundaryPolylines& b) {
  const double d = project_to_boundary(x, b).distance;
  if (d == 0.0) return 0.0;
  return b.inside(x) ? d : -d;
}

} // namespace swopt
