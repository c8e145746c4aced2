#pragma once
/**
 * @file viscous.hpp
 * @brief symmetric interior penalty (SIPG) discretization of -div(G grad W)
 *        with G = diag(eps_v, eps_f1, eps_f2)
 *
 * Shared by the state and the adjoint residual. Boundary faces carry
 * homogeneous Neumann data and contribute nothing.
 */

#include "swopt/dg/field.hpp"

#include <vector>

namespace swopt {

template <int P>
void add_sipg(const Mesh& mesh, const DGField<P, 3>& W, const std::vector<double>& eps_v, const Vec2& eps_f,
              double C_IP, DGField<P, 3>& R) {
  constexpr int N = LagrangeBasis<P>::N;
  using Grad = Eigen::Matrix<double, 3, 2>;
  using Row = Eigen::Matrix<double, 1, N>;
  const auto& ref = ReferenceElement<P>::instance();
  const auto& geo = mesh.geometry();
  auto G = [&](int c) { return Vec3(eps_v[c], eps_f.x(), eps_f.y()); };

  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const Vec3 g = G(int(c));
    if (g.isZero()) continue;
    const auto coeffs = W.cell(c);
    auto r = R.cell(c);
    const double jac = 2.0 * geo.area[c];
    for (std::size_t q = 0; q < ref.volume.size(); ++q) {
      const Eigen::Matrix<double, N, 2> dphi = ref.dphi[q] * geo.inv_jacobian[c];
      const Grad grad = coeffs * dphi;
      r.noalias() += (ref.volume.weights[q] * jac) * (g.asDiagonal() * grad) * dphi.transpose();
    }
  }

  const double p2 = double(P) * double(P);
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.face(int(f));
    if (face.is_boundary()) continue;
    const int L = face.left, Rc = face.right;
    const Vec3 gL = G(L), gR = G(Rc);
    if (gL.isZero() && gR.isZero()) continue;
    const Vec2& n = geo.face_normal[f];
    const double len = geo.face_length[f];
    const Vec3 sigma = (C_IP * p2 / geo.face_h[f]) * 0.5 * (gL + gR);
    const auto cL = W.cell(L);
    const auto cR = W.cell(Rc);
    auto rL = R.cell(L);
    auto rR = R.cell(Rc);
    for (std::size_t q = 0; q < ref.edge.size(); ++q) {
      const double w = ref.edge.weights[q] * len;
      const auto& phiL = ref.edge_phi[face.left_local][q];
      const auto& phiR = ref.edge_phi_rev[face.right_local][q];
      const Eigen::Matrix<double, N, 2> dL = ref.edge_dphi[face.left_local][q] * geo.inv_jacobian[L];
      const Eigen::Matrix<double, N, 2> dR = ref.edge_dphi_rev[face.right_local][q] * geo.inv_jacobian[Rc];
      const Vec3 jump = cL * phiL - cR * phiR;
      const Vec3 avg_flux = 0.5 * (gL.asDiagonal() * (cL * dL) * n + gR.asDiagonal() * (cR * dR) * n);
      const Vec3 pen = sigma.cwiseProduct(jump);
      const Row dnL = (dL * n).transpose();
      const Row dnR = (dR * n).transpose();
      rL.noalias() += w * ((pen - avg_flux) * phiL.transpose() - 0.5 * gL.cwiseProduct(jump) * dnL);
      rR.noalias() += w * ((avg_flux - pen) * phiR.transpose() - 0.5 * gR.cwiseProduct(jump) * dnR);
    }
  }
}

} // namespace swopt
