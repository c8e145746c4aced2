#pragma once
/**
 * @file basis.hpp
 * @brief nodal Lagrange basis of order P on the reference triangle and the
 *        tabulated reference element used by all DG assemblies
 *
 * Nodes are equispaced: the three vertices first, then the interior nodes of
 * edge k (vertex k -> k+1), then the cell interior. The vertex values of a
 * field are therefore its first three coefficients.
 */

#include "swopt/dg/quadrature.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <array>

namespace swopt {

template <int P>
struct LagrangeBasis {
  static_assert(P >= 1, "polynomial order must be at least 1");
  static constexpr int N = (P + 1) * (P + 2) / 2;
  using Values = Eigen::Matrix<double, N, 1>;
  using Gradients = Eigen::Matrix<double, N, 2>;

  std::array<Vec2, N> nodes;
  std::array<std::array<int, 2>, N> exponents; ///< monomial xi^a eta^b
  Eigen::Matrix<double, N, N> coeff;           ///< column i: monomial coefficients of phi_i

  LagrangeBasis() {
    int m = 0;
    for (int d = 0; d <= P; ++d)
      for (int b = 0; b <= d; ++b) exponents[m++] = {d - b, b};

    int k = 0;
    const Vec2 v[3] = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
    for (const auto& x : v) nodes[k++] = x;
    for (int e = 0; e < 3; ++e)
      for (int i = 1; i < P; ++i) nodes[k++] = v[e] + (v[(e + 1) % 3] - v[e]) * (double(i) / P);
    for (int j = 1; j < P; ++j)
      for (int i = 1; i + j < P; ++i) nodes[k++] = Vec2(double(i) / P, double(j) / P);

    Eigen::Matrix<double, N, N> vander;
    for (int i = 0; i < N; ++i) vander.row(i) = monomials(nodes[i]).transpose();
    coeff = vander.fullPivLu().inverse();
  }

  static const LagrangeBasis& instance() {
    static const LagrangeBasis basis;
    return basis;
  }

  Values monomials(const Vec2& x) const {
    Values m;
    for (int j = 0; j < N; ++j) m[j] = ipow(x.x(), exponents[j][0]) * ipow(x.y(), exponents[j][1]);
    return m;
  }

  Values eval(const Vec2& x) const { return coeff.transpose() * monomials(x); }

  /// reference gradients, row i = grad phi_i
  Gradients grad(const Vec2& x) const {
    Eigen::Matrix<double, N, 2> dm;
    for (int j = 0; j < N; ++j) {
      const int a = exponents[j][0], b = exponents[j][1];
      dm(j, 0) = a > 0 ? a * ipow(x.x(), a - 1) * ipow(x.y(), b) : 0.0;
      dm(j, 1) = b > 0 ? b * ipow(x.x(), a) * ipow(x.y(), b - 1) : 0.0;
    }
    return coeff.transpose() * dm;
  }

private:
  static double ipow(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
  }
};

/// reference point of edge k at parameter s in [0,1] (vertex k -> vertex k+1)
inline Vec2 reference_edge_point(int k, double s) {
  switch (k) {
  case 0: return {s, 0.0};
  case 1: return {1.0 - s, s};
  default: return {0.0, 1.0 - s};
  }
}

/// basis values and gradients tabulated at the quadrature points
template <int P>
struct ReferenceElement {
  using Basis = LagrangeBasis<P>;
  static constexpr int N = Basis::N;
  using Values = typename Basis::Values;
  using Gradients = typename Basis::Gradients;
  using MassMatrix = Eigen::Matrix<double, N, N>;

  QuadratureRule volume;            ///< degree 2P+2
  QuadratureRule edge;              ///< Gauss-Legendre, degree >= 2P+3
  std::vector<Values> phi;          ///< at volume points
  std::vector<Gradients> dphi;      ///< reference gradients at volume points
  std::array<std::vector<Values>, 3> edge_phi;         ///< edge k, parameter s_q
  std::array<std::vector<Values>, 3> edge_phi_rev;     ///< edge k, parameter 1 - s_q
  std::array<std::vector<Gradients>, 3> edge_dphi;
  std::array<std::vector<Gradients>, 3> edge_dphi_rev;
  MassMatrix mass;                  ///< reference mass, physical = 2 |K| mass
  MassMatrix inv_mass;

  ReferenceElement() : volume(triangle_rule(2 * P + 2)), edge(gauss_legendre(P + 2)) {
    const Basis& b = Basis::instance();
    mass.setZero();
    for (std::size_t q = 0; q < volume.size(); ++q) {
      phi.push_back(b.eval(volume.points[q]));
      dphi.push_back(b.grad(volume.points[q]));
      mass += volume.weights[q] * phi.back() * phi.back().transpose();
    }
    inv_mass = mass.ldlt().solve(MassMatrix::Identity());
    for (int k = 0; k < 3; ++k)
      for (std::size_t q = 0; q < edge.size(); ++q) {
        const double s = edge.points[q].x();
        edge_phi[k].push_back(b.eval(reference_edge_point(k, s)));
        edge_phi_rev[k].push_back(b.eval(reference_edge_point(k, 1.0 - s)));
        edge_dphi[k].push_back(b.grad(reference_edge_point(k, s)));
        edge_dphi_rev[k].push_back(b.grad(reference_edge_point(k, 1.0 - s)));
      }
  }

  static const ReferenceElement& instance() {
    static const ReferenceElement ref;
    return ref;
  }
};

} // namespace swopt
