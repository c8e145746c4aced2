#pragma once
/**
 * @file implicit_viscous.hpp
 * @brief linearly implicit treatment of the SIPG diffusion
 *
 * The viscous operator is linear in the free surface state and acts on each
 * component separately, so a backward-Euler diffusion solve reduces to three
 * scalar SPD systems (M + dt A_k) w = b with A_k the SIPG matrix built from
 * the per-cell diffusivity of component k. Factorizations are cached and
 * reused while dt and the diffusivity stay unchanged.
 */

#include "swopt/dg/field.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <array>
#include <memory>
#include <vector>

namespace swopt {

using SparseMatrix = Eigen::SparseMatrix<double>;

/**
 * @brief scalar SIPG matrix: (A w)_i equals the contribution of add_sipg to
 *        one component when that component's cell diffusivity is d
 */
template <int P>
SparseMatrix assemble_sipg_matrix(const Mesh& mesh, const std::vector<double>& d, double C_IP) {
  constexpr int N = LagrangeBasis<P>::N;
  using Block = Eigen::Matrix<double, N, N>;
  using Pair = Eigen::Matrix<double, 2 * N, 1>;
  const auto& ref = ReferenceElement<P>::instance();
  const auto& geo = mesh.geometry();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.num_cells() * N * N * 4);
  auto add = [&](int ci, int cj, const Block& b) {
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        if (b(i, j) != 0.0) trip.emplace_back(ci * N + i, cj * N + j, b(i, j));
  };

  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    if (d[c] == 0.0) continue;
    Block k = Block::Zero();
    const double jac = 2.0 * geo.area[c];
    for (std::size_t q = 0; q < ref.volume.size(); ++q) {
      const Eigen::Matrix<double, N, 2> dphi = ref.dphi[q] * geo.inv_jacobian[c];
      k.noalias() += (ref.volume.weights[q] * jac * d[c]) * dphi * dphi.transpose();
    }
    add(int(c), int(c), k);
  }

  const double p2 = double(P) * double(P);
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.face(int(f));
    if (face.is_boundary()) continue;
    const int L = face.left, R = face.right;
    if (d[L] == 0.0 && d[R] == 0.0) continue;
    const Vec2& n = geo.face_normal[f];
    const double len = geo.face_length[f];
    const double sigma = C_IP * p2 / geo.face_h[f] * 0.5 * (d[L] + d[R]);
    Eigen::Matrix<double, 2 * N, 2 * N> k = Eigen::Matrix<double, 2 * N, 2 * N>::Zero();
    for (std::size_t q = 0; q < ref.edge.size(); ++q) {
      const double w = ref.edge.weights[q] * len;
      Pair a, b;
      a.template head<N>() = ref.edge_phi[face.left_local][q];
      a.template tail<N>() = -ref.edge_phi_rev[face.right_local][q];
      b.template head<N>() = 0.5 * d[L] * (ref.edge_dphi[face.left_local][q] * geo.inv_jacobian[L]) * n;
      b.template tail<N>() = 0.5 * d[R] * (ref.edge_dphi_rev[face.right_local][q] * geo.inv_jacobian[R]) * n;
      k.noalias() += w * (sigma * a * a.transpose() - a * b.transpose() - b * a.transpose());
    }
    add(L, L, k.template topLeftCorner<N, N>());
    add(L, R, k.template topRightCorner<N, N>());
    add(R, L, k.template bottomLeftCorner<N, N>());
    add(R, R, k.template bottomRightCorner<N, N>());
  }

  const Eigen::Index n = Eigen::Index(mesh.num_cells()) * N;
  SparseMatrix A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

/// block-diagonal DG mass matrix of one scalar component
template <int P>
SparseMatrix assemble_mass_matrix(const Mesh& mesh) {
  constexpr int N = LagrangeBasis<P>::N;
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto m = cell_mass<P>(mesh, int(c));
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) trip.emplace_back(int(c) * N + i, int(c) * N + j, m(i, j));
  }
  const Eigen::Index n = Eigen::Index(mesh.num_cells()) * N;
  SparseMatrix M(n, n);
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

/**
 * @brief backward-Euler diffusion solver for the free surface state
 *
 * solve(b, eps_v, dt) overwrites the DG field b (a mass-weighted right-hand
 * side) with the solution of (M + dt A) w = b, component by component.
 */
template <int P>
class ViscousSolver {
 public:
  ViscousSolver(const Mesh& mesh, const Vec2& eps_f, double C_IP) : mesh_(&mesh), eps_f_(eps_f), C_IP_(C_IP) {
    mass_ = assemble_mass_matrix<P>(mesh);
  }

  void solve(DGField<P, 3>& b, const std::vector<double>& eps_v, double dt) {
    constexpr int N = LagrangeBasis<P>::N;
    const std::size_t nc = mesh_->num_cells();
    for (int k = 0; k < 3; ++k) {
      std::vector<double> d = k == 0 ? eps_v : std::vector<double>(nc, k == 1 ? eps_f_.x() : eps_f_.y());
      bool any = false;
      for (double v : d) any = any || v != 0.0;
      Eigen::VectorXd rhs(Eigen::Index(nc) * N);
      for (std::size_t c = 0; c < nc; ++c) rhs.segment<N>(Eigen::Index(c) * N) = b.cell(c).row(k).transpose();
      Eigen::VectorXd x;
      if (!any) {
        x.resize(rhs.size());
        for (std::size_t c = 0; c < nc; ++c)
          x.segment<N>(Eigen::Index(c) * N) = cell_mass<P>(*mesh_, int(c)).ldlt().solve(rhs.segment<N>(Eigen::Index(c) * N));
      } else {
        x = factor(k, d, dt).solve(rhs);
      }
      for (std::size_t c = 0; c < nc; ++c) b.cell(c).row(k) = x.segment<N>(Eigen::Index(c) * N).transpose();
    }
  }

  const Mesh& mesh() const { return *mesh_; }

 private:
  using Factor = Eigen::SimplicialLDLT<SparseMatrix>;

  struct Cached {
    std::vector<double> d;
    double dt = -1.0;
    std::shared_ptr<Factor> f;
  };

  const Factor& factor(int k, const std::vector<double>& d, double dt) {
    // momentum components share a factorization when their viscosities agree
    for (auto& c : cache_)
      if (c.f && c.dt == dt && c.d == d) return *c.f;
    Cached& slot = cache_[k];
    const SparseMatrix A = assemble_sipg_matrix<P>(*mesh_, d, C_IP_);
    SparseMatrix S = mass_ + dt * A;
    auto f = std::make_shared<Factor>(S);
    if (f->info() != Eigen::Success) throw SolverError("viscous system is not positive definite; increase C_IP");
    slot.d = d;
    slot.dt = dt;
    slot.f = std::move(f);
    return *slot.f;
  }

  const Mesh* mesh_;
  Vec2 eps_f_;
  double C_IP_;
  SparseMatrix mass_;
  std::array<Cached, 3> cache_;
};

} // namespace swopt
