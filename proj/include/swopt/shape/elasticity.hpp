#pragma once
/**
 * @file elasticity.hpp
 * @brief descent field from linear elasticity with harmonically interpolated stiffness
 *
 * Find W in P1^2, W = 0 on the outer boundary, with
 *   int sigma(W) : eps(V) dx = DJ[V],  sigma = lambda tr(eps) I + 2 mu eps,
 * for all such V. mu solves -Laplace mu = 0 with mu = mu_max on Gamma3 and
 * mu = mu_min on the outer boundary.
 */

#include "swopt/shape/shape_derivative.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <vector>

namespace swopt {

struct ElasticityParams {
  double lambda = 0.0;
  double mu_min = 10.0;
  double mu_max = 100.0;

  void validate() const {
    if (!(mu_min > 0.0 && mu_max >= mu_min)) throw ConfigError("elasticity: need mu_max >= mu_min > 0");
    if (!(lambda >= 0.0)) throw ConfigError("elasticity.lambda: must be >= 0");
  }
};

namespace detail {

inline std::vector<char> outer_boundary_vertices(const Mesh& mesh) {
  std::vector<char> out(mesh.num_vertices(), 0);
  for (int f : mesh.boundary_faces())
    if (mesh.face(f).boundary_tag() != BoundaryTag::Obstacle)
      for (int v : mesh.face(f).v) out[v] = 1;
  return out;
}

/// replaces Dirichlet rows and columns by the identity; rhs entries there become 0
inline Eigen::SparseMatrix<double> apply_dirichlet(const std::vector<Eigen::Triplet<double>>& trip, int n,
                                                   const std::vector<char>& fixed_dof) {
  std::vector<Eigen::Triplet<double>> kept;
  kept.reserve(trip.size() + n);
  for (const auto& t : trip)
    if (!fixed_dof[t.row()] && !fixed_dof[t.col()]) kept.push_back(t);
  for (int i = 0; i < n; ++i)
    if (fixed_dof[i]) kept.emplace_back(i, i, 1.0);
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(kept.begin(), kept.end());
  return A;
}

} // namespace detail

/// P1 harmonic interpolation of mu between Gamma3 (mu_max) and the outer boundary (mu_min)
inline std::vector<double> lame_field(const Mesh& mesh, double mu_min, double mu_max) {
  ElasticityParams{0.0, mu_min, mu_max}.validate();
  const int nv = int(mesh.num_vertices());
  std::vector<char> fixed(nv, 0);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(nv);
  for (int f : mesh.boundary_faces())
    for (int v : mesh.face(f).v) {
      fixed[v] = 1;
      g[v] = mesh.on_obstacle(v) ? mu_max : mu_min;
    }
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(nv);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.triangle(int(c));
    const auto dl = p1_gradients(mesh, int(c));
    const double area = mesh.geometry().area[c];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double a = area * dl.row(i).dot(dl.row(j));
        if (fixed[t[i]]) continue;
        if (fixed[t[j]]) b[t[i]] -= a * g[t[j]];
        else trip.emplace_back(t[i], t[j], a);
      }
  }
  for (int v = 0; v < nv; ++v)
    if (fixed[v]) {
      trip.emplace_back(v, v, 1.0);
      b[v] = g[v];
    }
  Eigen::SparseMatrix<double> A(nv, nv);
  A.setFromTriplets(trip.begin(), trip.end());
  // rows of fixed vertices are identity, the free block is symmetric
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw SolverError("lame_field: factorization failed");
  const Eigen::VectorXd mu = ldlt.solve(b);
  if (ldlt.info() != Eigen::Success || !mu.allFinite()) throw SolverError("lame_field: solve failed");
  return {mu.data(), mu.data() + nv};
}

/// stiffness matrix of the P1 elasticity form, dofs (2v, 2v+1) = (x, y) of vertex v
inline std::vector<Eigen::Triplet<double>> elasticity_triplets(const Mesh& mesh, const std::vector<double>& mu,
                                                               double lambda) {
  if (mu.size() != mesh.num_vertices()) throw DomainError("elasticity: mu field size mismatch");
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.num_cells() * 36);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.triangle(int(c));
    const auto dl = p1_gradients(mesh, int(c));
    const double area = mesh.geometry().area[c];
    const double muc = (mu[t[0]] + mu[t[1]] + mu[t[2]]) / 3.0; // exact mean of the P1 field
    // strain of each basis field phi_i e_k, as (exx, eyy, 2exy)
    Eigen::Matrix<double, 3, 6> Bm = Eigen::Matrix<double, 3, 6>::Zero();
    for (int i = 0; i < 3; ++i) {
      Bm(0, 2 * i) = dl(i, 0);
      Bm(1, 2 * i + 1) = dl(i, 1);
      Bm(2, 2 * i) = dl(i, 1);
      Bm(2, 2 * i + 1) = dl(i, 0);
    }
    Mat3 D;
    D << lambda + 2 * muc, lambda, 0, lambda, lambda + 2 * muc, 0, 0, 0, muc;
    const Eigen::Matrix<double, 6, 6> K = area * Bm.transpose() * D * Bm;
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b) trip.emplace_back(2 * t[a / 2] + a % 2, 2 * t[b / 2] + b % 2, K(a, b));
  }
  return trip;
}

/// int sigma(W) : eps(W) dx
inline double elasticity_energy(const Mesh& mesh, const std::vector<double>& mu, const VertexField2& W,
                                double lambda = 0.0) {
  const auto trip = elasticity_triplets(mesh, mu, lambda);
  double e = 0.0;
  for (const auto& t : trip) e += W[t.row() / 2][t.row() % 2] * t.value() * W[t.col() / 2][t.col() % 2];
  return e;
}

/**
 * @brief Riesz representative W of the assembly; the descent direction is -W
 *
 * Outer-boundary vertices are fixed. Throws SolverError when the relative
 * residual exceeds 1e-10.
 */
inline VertexField2 solve_elasticity(const Mesh& mesh, const GradientAssembly& a, const std::vector<double>& mu,
                                     double lambda = 0.0) {
  const int nv = int(mesh.num_vertices());
  if (a.values.size() != mesh.num_vertices()) throw DomainError("solve_elasticity: assembly size mismatch");
  const auto outer = detail::outer_boundary_vertices(mesh);
  std::vector<char> fixed(2 * nv, 0);
  Eigen::VectorXd b(2 * nv);
  for (int v = 0; v < nv; ++v) {
    if (!a.values[v].allFinite()) throw DomainError("solve_elasticity: non-finite assembly entry");
    fixed[2 * v] = fixed[2 * v + 1] = outer[v];
    b[2 * v] = outer[v] ? 0.0 : a.values[v].x();
    b[2 * v + 1] = outer[v] ? 0.0 : a.values[v].y();
  }
  VertexField2 W(nv, Vec2::Zero());
  if (b.lpNorm<Eigen::Infinity>() == 0.0) return W;
  const Eigen::SparseMatrix<double> A = detail::apply_dirichlet(elasticity_triplets(mesh, mu, lambda), 2 * nv, fixed);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw SolverError("solve_elasticity: factorization failed");
  const Eigen::VectorXd x = ldlt.solve(b);
  if (ldlt.info() != Eigen::Success || !x.allFinite()) throw SolverError("solve_elasticity: solve failed");
  const double res = (A * x - b).norm() / b.norm();
  if (res > 1e-10) throw SolverError("solve_elasticity: relative residual " + std::to_string(res));
  for (int v = 0; v < nv; ++v) W[v] = Vec2(x[2 * v], x[2 * v + 1]);
  return W;
}

/// sqrt(DJ[W]), the elasticity-energy norm of the gradient
inline double gradient_norm(const GradientAssembly& a, const VertexField2& W) {
  const double q = a.apply(W);
  if (q < -1e-12) throw SolverError("gradient_norm: DJ[W] = " + std::to_string(q) + " is negative");
  return std::sqrt(std::max(q, 0.0));
}

} // namespace swopt
