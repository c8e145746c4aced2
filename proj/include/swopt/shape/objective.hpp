#pragma once
/**
 * @file objective.hpp
 * @brief tracking objective J1 = int_0^T int_Gamma1 1/2 |C (Uhat - Utilde)|^2 ds dt
 *
 * Space: the solver's edge rule on every shore face. Time: trapezoid over the
 * trajectory levels.
 */

#include "swopt/adjoint/adjoint.hpp"
#include "swopt/swe/forward.hpp"

namespace swopt {

/// int_Gamma1 1/2 |C (Uhat - Utilde(t))|^2 ds for one state
template <int P>
double shore_mismatch(const SWEProblem& prob, const DGField<P, 3>& U, const ObjectiveWeights& w, double t) {
  const Mesh& mesh = *prob.mesh;
  const auto& ref = ReferenceElement<P>::instance();
  double s = 0.0;
  for (int f : mesh.faces_with_tag(BoundaryTag::Shore)) {
    const Face& face = mesh.face(f);
    const int L = face.left;
    const double len = mesh.geometry().face_length[f];
    for (std::size_t q = 0; q < ref.edge.size(); ++q) {
      const Vec2 xr = reference_edge_point(face.left_local, ref.edge.points[q].x());
      const State UL = U.cell(L) * ref.edge_phi[face.left_local][q];
      const State Uhat(UL[0] + prob.bathymetry.at(mesh, L, xr), UL[1], UL[2]);
      const Point x = mesh.map_to_physical(L, xr.x(), xr.y());
      const State e = w.C.cwiseProduct(Uhat - w.target(t, x));
      s += 0.5 * ref.edge.weights[q] * len * e.squaredNorm();
    }
  }
  return s;
}

template <int P>
double objective_J1(const SWEProblem& prob, const Trajectory<P>& traj, const ObjectiveWeights& w) {
  w.validate();
  if (traj.states.size() != traj.times.size()) throw DomainError("objective_J1: incomplete trajectory");
  double J = 0.0;
  double prev = shore_mismatch<P>(prob, traj.states.front(), w, traj.times.front());
  for (std::size_t n = 0; n + 1 < traj.times.size(); ++n) {
    const double next = shore_mismatch<P>(prob, traj.states[n + 1], w, traj.times[n + 1]);
    J += 0.5 * traj.dt(n) * (prev + next);
    prev = next;
  }
  return J;
}

} // namespace swopt
