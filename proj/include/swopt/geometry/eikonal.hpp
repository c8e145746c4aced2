#pragma once
/**
 * @file eikonal.hpp
 * @brief distance to the boundary from a stabilized Eikonal equation on P1 elements
 *
 * Find w = 0 on the boundary with
 *   int |grad w| v - int v + eps int grad w . grad v = 0   for all v,
 * eps = max cell diameter. Newton iterations start from the Poisson problem
 * eps (grad w, grad v) = (1, v).
 */

#include "swopt/mesh/mesh.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <vector>

namespace swopt {

struct EikonalOptions {
  double tol = 1e-8;   ///< max-norm of the residual
  int max_iters = 100;
  double eps = -1.0;   ///< stabilization; <= 0 selects the largest cell diameter
};

struct SignedDistance {
  std::vector<double> w; ///< vertex values, positive inside
  double eps = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

inline SignedDistance eikonal_solve(const Mesh& mesh, const EikonalOptions& opt = {}) {
  const int nv = int(mesh.num_vertices());
  const auto& geo = mesh.geometry();
  double eps = opt.eps;
  if (!(eps > 0.0)) {
    eps = 0.0;
    for (double d : geo.diameter) eps = std::max(eps, d);
  }
  std::vector<char> fixed(nv, 0);
  for (int f : mesh.boundary_faces())
    for (int v : mesh.face(f).v) fixed[v] = 1;

  std::vector<Eigen::Matrix<double, 3, 2>> dl(mesh.num_cells());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) dl[c] = p1_gradients(mesh, int(c));

  // residual and (optionally) Jacobian; Dirichlet rows are identity
  auto assemble = [&](const Eigen::VectorXd& w, Eigen::VectorXd& F, Eigen::SparseMatrix<double>* J, bool poisson) {
    F.setZero(nv);
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
      const auto& t = mesh.triangle(int(c));
      const double area = geo.area[c];
      const Vec2 g = dl[c].transpose() * Vec3(w[t[0]], w[t[1]], w[t[2]]);
      const double gn = std::sqrt(g.squaredNorm() + 1e-24);
      for (int i = 0; i < 3; ++i) {
        if (fixed[t[i]]) continue;
        const double lin = poisson ? 0.0 : gn / 3.0;
        F[t[i]] += area * (lin - 1.0 / 3.0 + eps * g.dot(dl[c].row(i)));
        if (!J) continue;
        for (int j = 0; j < 3; ++j) {
          double a = eps * dl[c].row(i).dot(dl[c].row(j));
          if (!poisson) a += g.dot(dl[c].row(j)) / gn / 3.0;
          trip.emplace_back(t[i], t[j], area * a);
        }
      }
    }
    for (int v = 0; v < nv; ++v)
      if (fixed[v]) {
        F[v] = w[v];
        if (J) trip.emplace_back(v, v, 1.0);
      }
    if (J) {
      J->resize(nv, nv);
      J->setFromTriplets(trip.begin(), trip.end());
    }
  };

  Eigen::VectorXd w = Eigen::VectorXd::Zero(nv), F;
  Eigen::SparseMatrix<double> J;
  {
    assemble(w, F, &J, true);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(J);
    if (lu.info() != Eigen::Success) throw SolverError("eikonal: singular Poisson system");
    w -= lu.solve(F);
  }
  SignedDistance out;
  out.eps = eps;
  assemble(w, F, nullptr, false);
  double res = F.lpNorm<Eigen::Infinity>();
  int it = 0;
  while (res > opt.tol && it < opt.max_iters) {
    assemble(w, F, &J, false);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(J);
    if (lu.info() != Eigen::Success) throw SolverError("eikonal: singular Newton system");
    const Eigen::VectorXd step = lu.solve(F);
    // backtracking on the residual norm
    double s = 1.0;
    Eigen::VectorXd trial;
    double tres = res;
    for (int k = 0; k < 30; ++k, s *= 0.5) {
      trial = w - s * step;
      assemble(trial, F, nullptr, false);
      tres = F.lpNorm<Eigen::Infinity>();
      if (tres < res) break;
    }
    w = trial;
    res = tres;
    ++it;
  }
  if (res > opt.tol)
    throw SolverError("eikonal: no convergence after " + std::to_string(it) + " iterations (residual " +
                      std::to_string(res) + ")");
  out.w.assign(w.data(), w.data() + nv);
  out.iterations = it;
  out.residual = res;
  return out;
}

} // namespace swopt
