#pragma once
/**
 * @file residual.hpp
 * @brief DG spatial residual of the viscous shallow-water system
 *
 * dU/dt = -M^{-1} R(U). R collects the volume flux, source and SIPG terms,
 * the numerical face fluxes with hydrostatic reconstruction of the interface
 * heights, and the boundary fluxes against ghost states. Diffusion acts on
 * the free surface state (H + z, Q).
 */

#include "swopt/dg/field.hpp"
#include "swopt/swe/physics.hpp"
#include "swopt/swe/viscous.hpp"

#include <vector>

namespace swopt {

/// bed elevation as a continuous piecewise-linear vertex field
struct Bathymetry {
  std::vector<double> z;

  static Bathymetry constant(std::size_t nvertices, double value) { return {std::vector<double>(nvertices, value)}; }

  template <typename F>
  static Bathymetry from_function(const Mesh& mesh, F&& f) {
    Bathymetry b;
    for (const auto& x : mesh.vertices()) b.z.push_back(f(x));
    return b;
  }

  Vec3 cell_values(const Mesh& mesh, int c) const {
    const auto& t = mesh.triangle(c);
    return Vec3(z[t[0]], z[t[1]], z[t[2]]);
  }

  double at(const Mesh& mesh, int c, const Vec2& ref) const {
    const Vec3 zc = cell_values(mesh, c);
    return (1.0 - ref.x() - ref.y()) * zc[0] + ref.x() * zc[1] + ref.y() * zc[2];
  }

  Vec2 gradient(const Mesh& mesh, int c) const {
    const Vec3 zc = cell_values(mesh, c);
    const Vec2 dref(zc[1] - zc[0], zc[2] - zc[0]);
    return mesh.geometry().inv_jacobian[c].transpose() * dref;
  }
};

/// everything the state operator needs besides the state itself
struct SWEProblem {
  const Mesh* mesh = nullptr;
  SWEParams params;
  Bathymetry bathymetry;
  double open_sea_level = 1.0; ///< free-surface elevation prescribed on the open sea

  double open_sea_height(int c, const Vec2& ref) const {
    return open_sea_level - bathymetry.at(*mesh, c, ref);
  }
};

/// (z, 0, 0) represented in the order-P space (exact, z is P1)
template <int P>
DGField<P, 3> surface_offset(const Mesh& mesh, const Bathymetry& b) {
  std::vector<Vec3> v(mesh.num_vertices());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = Vec3(b.z[i], 0.0, 0.0);
  return cg_to_dg<P, 3>(v, mesh);
}

namespace detail {

inline void guard_height(double H, double H_min, int cell) {
  if (!(H > H_min))
    throw DomainError("water height " + std::to_string(H) + " below the positivity threshold in cell " +
                      std::to_string(cell));
}

} // namespace detail

/**
 * @brief R(U) for the given per-cell shock viscosity
 *
 * With viscous = false the SIPG terms are left out (the time integrator then
 * handles them implicitly). Throws DomainError when H drops below
 * params.H_min at any quadrature point.
 */
template <int P>
void swe_residual(const SWEProblem& prob, const DGField<P, 3>& U, const std::vector<double>& eps_v,
                  DGField<P, 3>& R, bool viscous = true) {
  constexpr int N = LagrangeBasis<P>::N;
  const Mesh& mesh = *prob.mesh;
  const SWEParams& par = prob.params;
  const auto& ref = ReferenceElement<P>::instance();
  const auto& geo = mesh.geometry();
  const double g = par.g;
  R = DGField<P, 3>(mesh.num_cells());

  // volume: -F : grad(phi) - S phi
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto coeffs = U.cell(c);
    auto r = R.cell(c);
    const double jac = 2.0 * geo.area[c];
    const Vec2 gz = prob.bathymetry.gradient(mesh, int(c));
    for (std::size_t q = 0; q < ref.volume.size(); ++q) {
      const State Uq = coeffs * ref.phi[q];
      detail::guard_height(Uq[0], par.H_min, int(c));
      const Eigen::Matrix<double, N, 2> dphi = ref.dphi[q] * geo.inv_jacobian[c];
      const double w = ref.volume.weights[q] * jac;
      r.noalias() -= w * (physical_flux(Uq, g) * dphi.transpose() + source_term(Uq, gz, par) * ref.phi[q].transpose());
    }
  }

  // viscous terms on the free surface state
  if (viscous) {
    DGField<P, 3> Uhat = U;
    Uhat += surface_offset<P>(mesh, prob.bathymetry);
    add_sipg<P>(mesh, Uhat, eps_v, par.eps_f, par.C_IP, R);
  }

  // advective face fluxes
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.face(int(f));
    const Vec2& n = geo.face_normal[f];
    const double len = geo.face_length[f];
    const int L = face.left;
    const auto cL = U.cell(L);
    auto rL = R.cell(L);
    if (face.is_boundary()) {
      const BoundaryTag tag = face.boundary_tag();
      for (std::size_t q = 0; q < ref.edge.size(); ++q) {
        const auto& phiL = ref.edge_phi[face.left_local][q];
        const State UL = cL * phiL;
        detail::guard_height(UL[0], par.H_min, L);
        const double H1 =
            tag == BoundaryTag::OpenSea
                ? prob.open_sea_height(L, reference_edge_point(face.left_local, ref.edge.points[q].x()))
                : 0.0;
        const State Ug = boundary_state(UL, n, tag, H1);
        rL.noalias() += (ref.edge.weights[q] * len) * numerical_flux(UL, Ug, n, par) * phiL.transpose();
      }
      continue;
    }
    const int Rc = face.right;
    const auto cR = U.cell(Rc);
    auto rR = R.cell(Rc);
    for (std::size_t q = 0; q < ref.edge.size(); ++q) {
      const double s = ref.edge.points[q].x();
      const auto& phiL = ref.edge_phi[face.left_local][q];
      const auto& phiR = ref.edge_phi_rev[face.right_local][q];
      const State UL = cL * phiL;
      const State UR = cR * phiR;
      detail::guard_height(UL[0], par.H_min, L);
      detail::guard_height(UR[0], par.H_min, Rc);
      const double w = ref.edge.weights[q] * len;
      if (!par.well_balanced) {
        const State F = numerical_flux(UL, UR, n, par);
        rL.noalias() += w * F * phiL.transpose();
        rR.noalias() -= w * F * phiR.transpose();
        continue;
      }
      // hydrostatic reconstruction of the interface heights
      const double zL = prob.bathymetry.at(mesh, L, reference_edge_point(face.left_local, s));
      const double zR = prob.bathymetry.at(mesh, Rc, reference_edge_point(face.right_local, 1.0 - s));
      const double zs = std::max(zL, zR);
      const double HsL = std::max(0.0, UL[0] + zL - zs);
      const double HsR = std::max(0.0, UR[0] + zR - zs);
      const Vec2 uL = UL.tail<2>() / UL[0];
      const Vec2 uR = UR.tail<2>() / UR[0];
      const State F = riemann_flux_primitive(HsL, uL, HsR, uR, n, g, par.flux);
      const double corrL = 0.5 * g * (UL[0] * UL[0] - HsL * HsL);
      const double corrR = 0.5 * g * (UR[0] * UR[0] - HsR * HsR);
      const State FL(F[0], F[1] + corrL * n.x(), F[2] + corrL * n.y());
      const State FR(F[0], F[1] + corrR * n.x(), F[2] + corrR * n.y());
      rL.noalias() += w * FL * phiL.transpose();
      rR.noalias() -= w * FR * phiR.transpose();
    }
  }
}

} // namespace swopt
