#pragma once
/**
 * @file adjoint.hpp
 * @brief continuous adjoint of the viscous shallow-water system
 *
 * In reversed time tau = T - t the adjoint P = (p, r) solves
 *
 *   P_tau + div F*(P) = -Ct P + div(G grad P) + s_Gamma1,
 *   F*_d = -J_d(U)^T P,   Ct = C - A_x - B_y,   A = -J1^T, B = -J2^T,
 *
 * where C carries the bed slope and s is the shore mismatch density
 * -C^2 (U_hat - U_target). The discretization reuses the DG machinery of the
 * state: LLF face fluxes with the forward wave speeds, SIPG with the
 * forward step's viscosity (implicit), and the forward step sequence
 * replayed backwards.
 */

#include "swopt/swe/forward.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <functional>
#include <vector>

namespace swopt {

/// diagonal weights and shore targets of the tracking objective
struct ObjectiveWeights {
  Vec3 C{1.0, 1.0, 1.0};
  std::function<State(double t, const Point& x)> target = [](double, const Point&) { return State(1.0, 0.0, 0.0); };

  void validate() const {
    if (!(C.minCoeff() >= 0.0) || !C.allFinite()) throw ConfigError("objective.C: entries must be finite and >= 0");
  }
};

struct AdjointMatrices {
  Mat3 A, B;   ///< coefficients of P_x and P_y
  Mat3 C;      ///< bed-slope block
  Mat3 C_tilde; ///< C - A_x - B_y
};

/**
 * @brief A, B, C and C - A_x - B_y at a point
 *
 * gradU holds the x and y derivatives of the conservative state.
 */
inline AdjointMatrices adjoint_matrices(const State& U, const FluxMatrix& gradU, double g, const Vec2& grad_z) {
  detail::require_positive_height(U, "adjoint_matrices");
  const auto [J1, J2] = flux_jacobians(U, g);
  const double H = U[0], u = U[1] / H, v = U[2] / H;
  // primitive derivatives
  const double Hx = gradU(0, 0), Hy = gradU(0, 1);
  const double ux = (gradU(1, 0) - u * Hx) / H, uy = (gradU(1, 1) - u * Hy) / H;
  const double vx = (gradU(2, 0) - v * Hx) / H, vy = (gradU(2, 1) - v * Hy) / H;
  Mat3 dJ1, dJ2; // d/dx J1 and d/dy J2
  dJ1 << 0, 0, 0,
         -2 * u * ux + g * Hx, 2 * ux, 0,
         -(ux * v + u * vx), vx, ux;
  dJ2 << 0, 0, 0,
         -(uy * v + u * vy), vy, uy,
         -2 * v * vy + g * Hy, 0, 2 * vy;
  AdjointMatrices m;
  m.A = -J1.transpose();
  m.B = -J2.transpose();
  m.C.setZero();
  m.C(0, 1) = g * grad_z.x();
  m.C(0, 2) = g * grad_z.y();
  // A_x = -dJ1^T, B_y = -dJ2^T
  m.C_tilde = m.C + dJ1.transpose() + dJ2.transpose();
  return m;
}

struct SpectrumReport {
  Vec3 forward;  ///< sorted eigenvalues of n1 J1 + n2 J2
  Vec3 adjoint;  ///< sorted eigenvalues of the adjoint flux Jacobian
  double mismatch = 0.0;
};

/**
 * @brief compare the spectra of the forward and the adjoint flux Jacobians
 *
 * The adjoint flux Jacobian in the forward-time convention is
 * -(n1 A + n2 B) = (n1 J1 + n2 J2)^T; both spectra come from a general
 * eigensolver run in extended precision.
 */
inline SpectrumReport adjoint_spectrum_check(const State& U, const Vec2& n, double g) {
  detail::require_positive_height(U, "adjoint_spectrum_check");
  const auto [J1, J2] = flux_jacobians(U, g);
  const Mat3 B = n.x() * J1 + n.y() * J2;
  const AdjointMatrices am = adjoint_matrices(U, FluxMatrix::Zero(), g, Vec2::Zero());
  const Mat3 Bstar = -(n.x() * am.A + n.y() * am.B);
  auto sorted_eig = [](const Mat3& M) {
    using MatL = Eigen::Matrix<long double, 3, 3>;
    Eigen::EigenSolver<MatL> es(M.cast<long double>(), false);
    Vec3 ev = es.eigenvalues().real().cast<double>();
    std::sort(ev.data(), ev.data() + 3);
    return ev;
  };
  SpectrumReport r;
  r.forward = sorted_eig(B);
  r.adjoint = sorted_eig(Bstar);
  r.mismatch = (r.forward - r.adjoint).cwiseAbs().maxCoeff();
  return r;
}

/// shore source density -C^2 (U_hat - target), U_hat = (H + z, Q)
inline State mismatch_source(const State& U, double z, const ObjectiveWeights& w, double t, const Point& x) {
  const State Uhat(U[0] + z, U[1], U[2]);
  return -(w.C.cwiseProduct(w.C)).cwiseProduct(Uhat - w.target(t, x));
}

/**
 * @brief adjoint ghost state behind a boundary face
 *
 * Walls mirror the normal component of r (r.n = 0). On the open sea the
 * ghost mirrors p about -2 (u.n)(r.n), the normal component of the
 * condition p n + (u.n) r + u (r.n) = 0, and copies r.
 */
inline State adjoint_boundary_state(const State& P, const State& U, const Vec2& n, BoundaryTag tag) {
  const Vec2 r = P.tail<2>();
  if (tag == BoundaryTag::OpenSea) {
    const double un = U.tail<2>().dot(n) / U[0];
    return State(-P[0] - 4.0 * un * r.dot(n), r.x(), r.y());
  }
  const Vec2 rg = r - 2.0 * r.dot(n) * n;
  return State(P[0], rg.x(), rg.y());
}

/// LLF flux of F*(P) n = -(n.J)^T P with the forward states of both sides
inline State adjoint_numerical_flux(const State& P_plus, const State& U_plus, const State& P_minus,
                                    const State& U_minus, const Vec2& n, double g) {
  const auto [J1p, J2p] = flux_jacobians(U_plus, g);
  const auto [J1m, J2m] = flux_jacobians(U_minus, g);
  const Mat3 Bp = n.x() * J1p + n.y() * J2p;
  const Mat3 Bm = n.x() * J1m + n.y() * J2m;
  const double alpha = std::max(wave_speeds(U_plus, n, g).cwiseAbs().maxCoeff(),
                                wave_speeds(U_minus, n, g).cwiseAbs().maxCoeff());
  return 0.5 * (-(Bp.transpose() * P_plus) - Bm.transpose() * P_minus + alpha * (P_plus - P_minus));
}

/**
 * @brief adjoint residual R* with dP/dtau = -M^{-1} R*
 *
 * U is the forward state the coefficients are frozen at and t the physical
 * time of the shore source. Viscous terms are included when viscous = true.
 */
template <int P>
void adjoint_residual(const SWEProblem& prob, const ObjectiveWeights& weights, const DGField<P, 3>& U,
                      const std::vector<double>& eps_v, const DGField<P, 3>& Pf, double t, DGField<P, 3>& R,
                      bool viscous = true) {
  constexpr int N = LagrangeBasis<P>::N;
  const Mesh& mesh = *prob.mesh;
  const double g = prob.params.g;
  const auto& ref = ReferenceElement<P>::instance();
  const auto& geo = mesh.geometry();
  R = DGField<P, 3>(mesh.num_cells());

  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto uc = U.cell(c);
    const auto pc = Pf.cell(c);
    auto r = R.cell(c);
    const double jac = 2.0 * geo.area[c];
    const Vec2 gz = prob.bathymetry.gradient(mesh, int(c));
    for (std::size_t q = 0; q < ref.volume.size(); ++q) {
      const Eigen::Matrix<double, N, 2> dphi = ref.dphi[q] * geo.inv_jacobian[c];
      const State Uq = uc * ref.phi[q];
      const State Pq = pc * ref.phi[q];
      const FluxMatrix gradU = uc * dphi;
      const AdjointMatrices am = adjoint_matrices(Uq, gradU, g, gz);
      FluxMatrix Fs;
      Fs.col(0) = am.A * Pq;
      Fs.col(1) = am.B * Pq;
      const double w = ref.volume.weights[q] * jac;
      r.noalias() -= w * (Fs * dphi.transpose() - (am.C_tilde * Pq) * ref.phi[q].transpose());
    }
  }

  if (viscous) add_sipg<P>(mesh, Pf, eps_v, prob.params.eps_f, prob.params.C_IP, R);

  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.face(int(f));
    const Vec2& n = geo.face_normal[f];
    const double len = geo.face_length[f];
    const int L = face.left;
    auto rL = R.cell(L);
    if (face.is_boundary()) {
      const BoundaryTag tag = face.boundary_tag();
      for (std::size_t q = 0; q < ref.edge.size(); ++q) {
        const auto& phiL = ref.edge_phi[face.left_local][q];
        const Vec2 xr = reference_edge_point(face.left_local, ref.edge.points[q].x());
        const State UL = U.cell(L) * phiL;
        const State PL = Pf.cell(L) * phiL;
        const double H1 = tag == BoundaryTag::OpenSea ? prob.open_sea_height(L, xr) : 0.0;
        const State Ug = boundary_state(UL, n, tag, H1);
        const State Pg = adjoint_boundary_state(PL, UL, n, tag);
        const double w = ref.edge.weights[q] * len;
        State flux = adjoint_numerical_flux(PL, UL, Pg, Ug, n, g);
        if (tag == BoundaryTag::Shore) {
          const Point x = mesh.map_to_physical(L, xr.x(), xr.y());
          flux -= mismatch_source(UL, prob.bathymetry.at(mesh, L, xr), weights, t, x);
        }
        rL.noalias() += w * flux * phiL.transpose();
      }
      continue;
    }
    const int Rc = face.right;
    auto rR = R.cell(Rc);
    for (std::size_t q = 0; q < ref.edge.size(); ++q) {
      const auto& phiL = ref.edge_phi[face.left_local][q];
      const auto& phiR = ref.edge_phi_rev[face.right_local][q];
      const State F = adjoint_numerical_flux(Pf.cell(L) * phiL, U.cell(L) * phiL, Pf.cell(Rc) * phiR,
                                             U.cell(Rc) * phiR, n, g);
      const double w = ref.edge.weights[q] * len;
      rL.noalias() += w * F * phiL.transpose();
      rR.noalias() -= w * F * phiR.transpose();
    }
  }
}

/// adjoint levels on the forward time grid; states[n] is P at times[n]
template <int P>
struct AdjointTrajectory {
  std::vector<double> times;
  std::vector<DGField<P, 3>> states;
};

/**
 * @brief one backward IMEX stage: Pt = (M + dt A)^{-1} M P, then
 *        P' = Pt - dt M^{-1} R*_adv(Pt; U, t)
 *
 * The diffusion solve comes first so that the stage is the mass-weighted
 * transpose of the forward IMEX Euler stage (explicit, then implicit).
 */
template <int P>
DGField<P, 3> adjoint_imex_stage(const SWEProblem& prob, const ObjectiveWeights& weights, const DGField<P, 3>& U,
                                 const std::vector<double>& eps_v, const DGField<P, 3>& Pf, double t, double dt,
                                 ViscousSolver<P>& visc) {
  DGField<P, 3> Pt = detail::mass_times(Pf, *prob.mesh);
  visc.solve(Pt, eps_v, dt);
  DGField<P, 3> R;
  adjoint_residual<P>(prob, weights, U, eps_v, Pt, t, R, false);
  Pt.axpy(-dt, apply_inverse_mass(R, *prob.mesh));
  return Pt;
}

/// called for every adjoint level, from t = T down to 0
template <int P>
using AdjointObserver = std::function<void(std::size_t level, double t, const DGField<P, 3>& P_level)>;

/**
 * @brief march the adjoint from P(T) = 0 back to t = 0
 *
 * Step n (t_{n+1} -> t_n) uses dt_n and the shock viscosity of forward step
 * n. Forward Euler freezes the coefficients at U_n; SSPRK2 takes a stage at
 * U_{n+1} and one at U_n and averages.
 */
template <int P>
AdjointTrajectory<P> solve_adjoint(const SWEProblem& prob, const Trajectory<P>& fwd, const ObjectiveWeights& weights,
                                   TimeScheme scheme = TimeScheme::SSPRK2, const AdjointObserver<P>& observer = {}) {
  weights.validate();
  const Mesh& mesh = *prob.mesh;
  const std::size_t nsteps = fwd.num_steps();
  if (fwd.states.size() != nsteps + 1 || fwd.eps_v.size() != nsteps)
    throw DomainError("solve_adjoint: incomplete forward trajectory");
  for (const auto& U : fwd.states)
    if (U.num_cells() != mesh.num_cells()) throw DomainError("solve_adjoint: trajectory does not match mesh");

  AdjointTrajectory<P> adj;
  adj.times = fwd.times;
  adj.states.assign(nsteps + 1, DGField<P, 3>(mesh.num_cells()));
  if (observer) observer(nsteps, fwd.times[nsteps], adj.states[nsteps]);
  ViscousSolver<P> visc(mesh, prob.params.eps_f, prob.params.C_IP);
  for (std::size_t k = nsteps; k-- > 0;) {
    const double dt = fwd.dt(k);
    const auto& eps = fwd.eps_v[k];
    const DGField<P, 3>& Pn1 = adj.states[k + 1];
    DGField<P, 3> Pn;
    try {
      if (scheme == TimeScheme::ForwardEuler) {
        Pn = adjoint_imex_stage<P>(prob, weights, fwd.states[k], eps, Pn1, fwd.times[k], dt, visc);
      } else {
        const DGField<P, 3> s1 =
            adjoint_imex_stage<P>(prob, weights, fwd.states[k + 1], eps, Pn1, fwd.times[k + 1], dt, visc);
        Pn = adjoint_imex_stage<P>(prob, weights, fwd.states[k], eps, s1, fwd.times[k], dt, visc);
        Pn *= 0.5;
        Pn.axpy(0.5, Pn1);
      }
    } catch (const DomainError& e) {
      throw SolverError(std::string("adjoint solve at t=") + std::to_string(fwd.times[k]) + ": " + e.what());
    }
    if (!Pn.all_finite()) throw SolverError("adjoint solve: non-finite state at t=" + std::to_string(fwd.times[k]));
    adj.states[k] = std::move(Pn);
    if (observer) observer(k, fwd.times[k], adj.states[k]);
  }
  return adj;
}

} // namespace swopt
