#pragma once
/**
 * @file shape_derivative.hpp
 * @brief volume form of the shape derivative of J1 and the combined gradient
 *
 * Every term of DJ1[V] is linear in grad V, so per cell
 *   DJ1[V] = sum_n dt_n int_K S(U, P) : grad V dx
 * with a 2x2 tensor S. For the hat field V = phi_v e_k this is (S grad phi_v)_k,
 * which gives one covector per vertex. U and P are projected to continuous P1
 * fields first; bathymetry and initial state move with the mesh. Friction is
 * not differentiated.
 *
 * Two tensors are available. Strong: the advective terms as P . div F(U), the
 * printed volume formula. Weak: -grad P : F(U) plus the wall pressure
 * int_Gamma3 1/2 g H^2 r.n ds, whose shape derivative is added per obstacle
 * edge. The walls impose Q.n = 0 as an essential condition, which a transported
 * Q violates on the moved boundary; the strong form therefore misses
 * int_Gamma3 (n . grad V Q)(p + u.r) ds. The weak form has no such constraint
 * and is the default.
 */

#include "swopt/geometry/penalties.hpp"
#include "swopt/shape/objective.hpp"

#include <vector>

namespace swopt {

enum class ShapeForm { Weak, Strong };

/// integrand tensor S with DJ1 density = S : grad V, for one quadrature point
struct ShapeIntegrand {
  double H, p, Ht;
  Vec2 Q, r, Qt;
  Vec2 gH, gz, gp;
  Mat2 gQ, gr; ///< Jacobians, row i = grad of component i
  double g, eps_v;
  Vec2 eps_f;

  /// strong (printed) form
  Mat2 strong_tensor() const {
    const Vec2 u = Q / H;
    const Mat2 gu = (gQ - u * gH.transpose()) / H;
    const double divQ = gQ.trace();
    Mat2 S = -p * gQ.transpose() - u.dot(r) * gQ.transpose() - (gu.transpose() * r) * Q.transpose() -
             g * H * gH * r.transpose() - g * H * gz * r.transpose();
    const double B = Ht * p + divQ * p + Qt.dot(r) + (gu * Q).dot(r) + divQ * u.dot(r) + g * H * gH.dot(r) +
                     g * H * gz.dot(r);
    return S + B * Mat2::Identity() + diffusion_tensor();
  }

  /// advective flux integrated by parts onto P
  Mat2 weak_tensor() const {
    const Vec2 u = Q / H;
    const Mat2 F = Q * u.transpose() + 0.5 * g * H * H * Mat2::Identity(); // row i: flux of Q_i
    const Mat2 S = gp * Q.transpose() + gr.transpose() * F - g * H * gz * r.transpose();
    const double B = Ht * p + Qt.dot(r) - gp.dot(Q) - gr.cwiseProduct(F).sum() + g * H * gz.dot(r);
    return S + B * Mat2::Identity() + diffusion_tensor();
  }

  Mat2 tensor(ShapeForm form) const { return form == ShapeForm::Weak ? weak_tensor() : strong_tensor(); }

private:
  /// eps grad a . grad b terms, shared by both forms
  Mat2 diffusion_tensor() const {
    const Vec2 gHhat = gH + gz;
    Mat2 S = -eps_v * (gHhat * gp.transpose() + gp * gHhat.transpose());
    double B = eps_v * gHhat.dot(gp);
    for (int k = 0; k < 2; ++k) {
      const Vec2 a = gQ.row(k).transpose(), b = gr.row(k).transpose();
      S -= eps_f[k] * (a * b.transpose() + b * a.transpose());
      B += eps_f[k] * a.dot(b);
    }
    return S + B * Mat2::Identity();
  }
};

/**
 * @brief per-vertex covector of DJ1: DJ1[V] = sum_v G_v . V_v for P1 fields V
 *
 * Step n pairs U_n, the forward difference (U_{n+1} - U_n)/dt_n and P_{n+1},
 * the multiplier of that step, weighted by dt_n.
 */
template <int P>
VertexField2 dj1_covector(const SWEProblem& prob, const Trajectory<P>& fwd, const AdjointTrajectory<P>& adj,
                          ShapeForm form = ShapeForm::Weak) {
  using Field = DGField<P, 3>;
  const Mesh& mesh = *prob.mesh;
  if (adj.times != fwd.times || adj.states.size() != fwd.states.size())
    throw DomainError("dj1: forward and adjoint trajectories are on different time grids");
  const std::size_t nsteps = fwd.num_steps();
  if (fwd.eps_v.size() != nsteps) throw DomainError("dj1: incomplete forward trajectory");
  for (const auto& U : fwd.states)
    if (U.num_cells() != mesh.num_cells()) throw DomainError("dj1: trajectory does not match mesh");
  const std::size_t nc = mesh.num_cells();
  const auto& ref = ReferenceElement<P>::instance();
  const auto& z = prob.bathymetry.z;
  const double g = prob.params.g;
  const std::vector<int> walls = mesh.faces_with_tag(BoundaryTag::Obstacle);

  std::vector<Mat2> S(nc, Mat2::Zero());
  VertexField2 G(mesh.num_vertices(), Vec2::Zero());
  for (std::size_t n = 0; n < nsteps; ++n) {
    const double dt = fwd.dt(n);
    // continuous P1 averages: the volume form omits interface terms, which vanish only for continuous fields
    Field U = cg_to_dg<P, 3>(dg_to_cg(fwd.states[n], mesh), mesh);
    Field Ut = cg_to_dg<P, 3>(dg_to_cg(fwd.states[n + 1], mesh), mesh);
    const Field Pn = cg_to_dg<P, 3>(dg_to_cg(adj.states[n + 1], mesh), mesh);
    Ut.axpy(-1.0, U);
    Ut *= 1.0 / dt;
    for (std::size_t c = 0; c < nc; ++c) {
      const auto& t = mesh.triangle(int(c));
      const auto dl = p1_gradients(mesh, int(c));
      const Mat2& Jinv = mesh.geometry().inv_jacobian[c];
      const Vec3 zc(z[t[0]], z[t[1]], z[t[2]]);
      ShapeIntegrand I;
      I.g = g;
      I.eps_v = fwd.eps_v[n][c];
      I.eps_f = prob.params.eps_f;
      I.gz = dl.transpose() * zc;
      const auto Uc = U.cell(c), Utc = Ut.cell(c), Pc = Pn.cell(c);
      Mat2 Sc = Mat2::Zero();
      for (std::size_t q = 0; q < ref.volume.size(); ++q) {
        const typename ReferenceElement<P>::Gradients d = ref.dphi[q] * Jinv;
        const Vec3 Uq = Uc * ref.phi[q], Utq = Utc * ref.phi[q], Pq = Pc * ref.phi[q];
        const Eigen::Matrix<double, 3, 2> gU = Uc * d, gP = Pc * d;
        I.H = Uq[0];
        I.Q = Uq.tail<2>();
        I.Ht = Utq[0];
        I.Qt = Utq.tail<2>();
        I.p = Pq[0];
        I.r = Pq.tail<2>();
        I.gH = gU.row(0).transpose();
        I.gQ = gU.bottomRows<2>();
        I.gp = gP.row(0).transpose();
        I.gr = gP.bottomRows<2>();
        if (!(I.H > 0.0)) throw DomainError("dj1: nonpositive height in cell " + std::to_string(c));
        Sc += ref.volume.weights[q] * I.tensor(form);
      }
      S[c] += dt * 2.0 * mesh.geometry().area[c] * Sc;
    }
    if (form != ShapeForm::Weak) continue;
    // int_edge 1/2 g H^2 r . n ds = (b - a) x r integrated in the edge parameter
    for (int f : walls) {
      const Face& face = mesh.face(f);
      const int a = face.v[0], b = face.v[1];
      const auto Uc = U.cell(face.left), Pc = Pn.cell(face.left);
      for (std::size_t q = 0; q < ref.edge.size(); ++q) {
        const Vec3 Uq = Uc * ref.edge_phi[face.left_local][q];
        const Vec3 Pq = Pc * ref.edge_phi[face.left_local][q];
        const double c = dt * ref.edge.weights[q] * 0.5 * g * Uq[0] * Uq[0];
        const Vec2 rot(-Pq[2], Pq[1]);
        G[b] += c * rot;
        G[a] -= c * rot;
      }
    }
  }
  for (std::size_t c = 0; c < nc; ++c) {
    const auto& t = mesh.triangle(int(c));
    const auto dl = p1_gradients(mesh, int(c));
    for (int k = 0; k < 3; ++k) G[t[k]] += S[c] * dl.row(k).transpose();
  }
  return G;
}

template <int P>
double dj1_volume(const SWEProblem& prob, const Trajectory<P>& fwd, const AdjointTrajectory<P>& adj,
                  const VertexField2& V, ShapeForm form = ShapeForm::Weak) {
  return apply_covector(dj1_covector<P>(prob, fwd, adj, form), V);
}

/// DJ[phi_v e_k] for every vertex v, with the vertices whose hat support touches Gamma3
struct GradientAssembly {
  VertexField2 values;
  std::vector<char> mask;

  double apply(const VertexField2& V) const { return apply_covector(values, V); }
};

/// vertices of cells that have at least one vertex on Gamma3
inline std::vector<char> obstacle_support_mask(const Mesh& mesh) {
  std::vector<char> mask(mesh.num_vertices(), 0);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.triangle(int(c));
    if (mesh.on_obstacle(t[0]) || mesh.on_obstacle(t[1]) || mesh.on_obstacle(t[2]))
      for (int v : t) mask[v] = 1;
  }
  return mask;
}

/**
 * @brief DJ = (DJ1 + DJ2) on the masked vertices + (DJ3 + DJ4)
 *
 * Pass dj1 = {} to leave the tracking term out.
 */
inline GradientAssembly total_derivative(const Mesh& mesh, const VertexField2& dj1, const PenaltyParams& pen) {
  GradientAssembly a;
  a.mask = obstacle_support_mask(mesh);
  if (!dj1.empty() && dj1.size() != mesh.num_vertices()) throw DomainError("total_derivative: dj1 size mismatch");
  const PenaltyGradients pg = penalty_gradients(mesh, pen);
  a.values.assign(mesh.num_vertices(), Vec2::Zero());
  for (std::size_t v = 0; v < a.values.size(); ++v) {
    if (a.mask[v]) a.values[v] = pg.dJ2[v] + (dj1.empty() ? Vec2::Zero() : dj1[v]);
    a.values[v] += pg.dJ3[v] + pg.dJ4[v];
    if (!a.values[v].allFinite()) throw SolverError("total_derivative: non-finite entry at vertex " + std::to_string(v));
  }
  return a;
}

} // namespace swopt
