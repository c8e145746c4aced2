#pragma once
/**
 * @file quadrature.hpp
 * @brief quadrature rules on the reference triangle {(xi,eta): xi,eta >= 0, xi+eta <= 1}
 *        and on the unit interval
 */

#include "swopt/common.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace swopt {

/// points in reference coordinates; weights sum to the reference measure (1/2 or 1)
struct QuadratureRule {
  std::vector<Vec2> points;    ///< (xi, eta) for triangles, (s, 0) for intervals
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }
};

namespace detail {

/// adds the orbit of barycentric (a, a, 1-2a) or (a, b, 1-a-b) with total orbit weight w*|orbit|
inline void add_orbit3(QuadratureRule& q, double a, double w) {
  const double b = 1.0 - 2.0 * a;
  q.points.emplace_back(a, a);
  q.points.emplace_back(a, b);
  q.points.emplace_back(b, a);
  for (int i = 0; i < 3; ++i) q.weights.push_back(0.5 * w);
}

inline void add_orbit6(QuadratureRule& q, double a, double b, double w) {
  const double c = 1.0 - a - b;
  const double perm[6][2] = {{a, b}, {b, a}, {a, c}, {c, a}, {b, c}, {c, b}};
  for (const auto& p : perm) {
    q.points.emplace_back(p[0], p[1]);
    q.weights.push_back(0.5 * w);
  }
}

} // namespace detail

/// Gauss-Legendre rule with n points on [0, 1]
inline QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: need at least one point");
  QuadratureRule q;
  q.degree = 2 * n - 1;
  for (int i = 0; i < n; ++i) {
    // Newton iteration on P_n from the Chebyshev guess
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      const double pn = n == 1 ? x : p1;
      const double pnm1 = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    q.points.emplace_back(0.5 * (1.0 - x), 0.0);
    q.weights.push_back(1.0 / ((1.0 - x * x) * dp * dp));
  }
  return q;
}

/**
 * @brief Duffy-collapsed Gauss rule, exact for any degree
 *
 * Used for degrees above the tabulated symmetric rules and as an
 * independent oracle in tests.
 */
inline QuadratureRule collapsed_triangle_rule(int degree) {
  const int n = degree / 2 + 1;
  const QuadratureRule g = gauss_legendre(n);
  const QuadratureRule gj = gauss_legendre(n + 1); // extra point absorbs the Jacobian factor
  QuadratureRule q;
  q.degree = degree;
  for (std::size_t i = 0; i < gj.size(); ++i) {
    const double u = gj.points[i].x();
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double v = g.points[j].x();
      q.points.emplace_back(u, (1.0 - u) * v);
      q.weights.push_back(gj.weights[i] * g.weights[j] * (1.0 - u));
    }
  }
  return q;
}

/// symmetric triangle rule exact for polynomials of total degree <= degree (max 6)
inline QuadratureRule triangle_rule(int degree) {
  QuadratureRule q;
  if (degree <= 1) {
    q.degree = 1;
    q.points.emplace_back(1.0 / 3.0, 1.0 / 3.0);
    q.weights.push_back(0.5);
  } else if (degree == 2) {
    q.degree = 2;
    detail::add_orbit3(q, 1.0 / 6.0, 1.0 / 3.0);
  } else if (degree <= 4) {
    q.degree = 4;
    detail::add_orbit3(q, 0.445948490915965, 0.223381589678011);
    detail::add_orbit3(q, 0.091576213509771, 0.109951743655322);
  } else if (degree == 5) {
    q.degree = 5;
    q.points.emplace_back(1.0 / 3.0, 1.0 / 3.0);
    q.weights.push_back(0.5 * 0.225);
    detail::add_orbit3(q, 0.470142064105115, 0.132394152788506);
    detail::add_orbit3(q, 0.101286507323456, 0.125939180544827);
  } else if (degree == 6) {
    q.degree = 6;
    detail::add_orbit3(q, 0.249286745170910, 0.116786275726379);
    detail::add_orbit3(q, 0.063089014491502, 0.050844906370207);
    detail::add_orbit6(q, 0.053145049844817, 0.310352451033784, 0.082851075618374);
  } else {
    return collapsed_triangle_rule(degree);
  }
  return q;
}

} // namespace swopt
