#pragma once
/**
 * @file predicates.hpp
 * @brief exact orientation and segment-intersection predicates
 *
 * orient2d uses a floating point filter (Shewchuk's stage-A bound) and falls
 * back to exact rational arithmetic when the sign cannot be certified.
 * Every double is a dyadic rational, so the fallback is exact.
 */

#include "swopt/common.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <limits>

namespace swopt::predicates {

/// sign of the signed area of (a, b, c): +1 counter-clockwise, -1 clockwise, 0 collinear
inline int orient2d(const Point& a, const Point& b, const Point& c) {
  const double detleft = (a.x() - c.x()) * (b.y() - c.y());
  const double detright = (a.y() - c.y()) * (b.x() - c.x());
  const double det = detleft - detright;
  constexpr double eps = std::numeric_limits<double>::epsilon() * 0.5;
  constexpr double errbound = (3.0 + 16.0 * eps) * eps;
  const double detsum = std::abs(detleft) + std::abs(detright);
  if (std::abs(det) > errbound * detsum) return det > 0.0 ? 1 : -1;
  if (detsum == 0.0) return 0;

  using boost::multiprecision::cpp_rational;
  const cpp_rational ax(a.x()), ay(a.y()), bx(b.x()), by(b.y()), cx(c.x()), cy(c.y());
  const cpp_rational exact = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx);
  return exact > 0 ? 1 : (exact < 0 ? -1 : 0);
}

/// true when q lies in the closed axis-aligned box spanned by a and b
inline bool in_box(const Point& a, const Point& b, const Point& q) {
  return q.x() >= std::min(a.x(), b.x()) && q.x() <= std::max(a.x(), b.x()) &&
         q.y() >= std::min(a.y(), b.y()) && q.y() <= std::max(a.y(), b.y());
}

/// closed segments [p1,p2] and [q1,q2] share at least one point
inline bool segments_intersect(const Point& p1, const Point& p2, const Point& q1,
                               const Point& q2) {
  const int o1 = orient2d(p1, p2, q1);
  const int o2 = orient2d(p1, p2, q2);
  const int o3 = orient2d(q1, q2, p1);
  const int o4 = orient2d(q1, q2, p2);
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  if (o1 == 0 && in_box(p1, p2, q1)) return true;
  if (o2 == 0 && in_box(p1, p2, q2)) return true;
  if (o3 == 0 && in_box(q1, q2, p1)) return true;
  if (o4 == 0 && in_box(q1, q2, p2)) return true;
  return false;
}

} // namespace swopt::predicates
