#include "swopt/mesh/generators.hpp"
#include "swopt/shape/elasticity.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace swopt;

namespace {

BoundaryTag shore_below(const Point& m) { return m.y() < 1e-12 ? BoundaryTag::Shore : BoundaryTag::OpenSea; }

Trajectory<1> constant_trajectory(const DGField<1, 3>& U, std::vector<double> times) {
  Trajectory<1> tr;
  tr.times = std::move(times);
  tr.states.assign(tr.times.size(), U);
  tr.eps_v.assign(tr.times.size() - 1, std::vector<double>(U.num_cells(), 0.0));
  return tr;
}

/// P1 vertex data of one step, carried along when the mesh moves
struct StepData {
  std::vector<State> U0, U1, P;
  std::vector<double> z;
  double dt = 0.1, eps_v = 0.03;
  Vec2 eps_f{0.01, 0.02};
};

StepData random_step(const Mesh& m) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  StepData d;
  for (const auto& x : m.vertices()) {
    const State U(1.5 + 0.3 * std::sin(2 * x.x()) + 0.2 * x.y(), 0.3 * std::cos(x.y()) + 0.1 * x.x(),
                  0.2 * x.x() * x.y() - 0.1);
    d.U0.push_back(U);
    d.U1.push_back(U + 0.1 * d.dt * State(u(rng), u(rng), u(rng)));
    d.P.push_back(State(u(rng), u(rng), u(rng)));
    d.z.push_back(0.3 * x.x() * x.x() - 0.2 * x.y());
  }
  return d;
}

/**
 * dt * [ int_Omega L(U0, (U1 - U0)/dt, P) dx (+ int_Gamma3 1/2 g H^2 r.n ds) ]
 * with the strong or weak advective terms, evaluated directly on mesh m
 */
double lagrangian(const Mesh& m, const StepData& d, ShapeForm form, double g) {
  const QuadratureRule rule = triangle_rule(4);
  double L = 0.0;
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const auto& t = m.triangle(int(c));
    const auto dl = p1_gradients(m, int(c));
    Eigen::Matrix3d Uc, Tc, Pc;
    Vec3 zc;
    for (int k = 0; k < 3; ++k) {
      Uc.col(k) = d.U0[t[k]];
      Tc.col(k) = (d.U1[t[k]] - d.U0[t[k]]) / d.dt;
      Pc.col(k) = d.P[t[k]];
      zc[k] = d.z[t[k]];
    }
    const Eigen::Matrix<double, 3, 2> gU = Uc * dl, gP = Pc * dl;
    const Vec2 gz = dl.transpose() * zc, gH = gU.row(0).transpose(), gp = gP.row(0).transpose();
    const Mat2 gQ = gU.bottomRows<2>(), gr = gP.bottomRows<2>();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec3 lam(1 - rule.points[q].x() - rule.points[q].y(), rule.points[q].x(), rule.points[q].y());
      const Vec3 a = Uc * lam, b = Tc * lam, e = Pc * lam;
      const double H = a[0], p = e[0];
      const Vec2 Q = a.tail<2>(), r = e.tail<2>(), u = Q / H;
      double f = p * b[0] + r.dot(b.tail<2>()) + g * H * gz.dot(r) + d.eps_v * (gH + gz).dot(gp);
      for (int k = 0; k < 2; ++k) f += d.eps_f[k] * gQ.row(k).dot(gr.row(k));
      if (form == ShapeForm::Strong) {
        const Mat2 gu = (gQ - u * gH.transpose()) / H;
        f += p * gQ.trace() + r.dot(gu * Q + gQ.trace() * u + g * H * gH);
      } else {
        const Mat2 F = Q * u.transpose() + 0.5 * g * H * H * Mat2::Identity();
        f += -gp.dot(Q) - (gr.array() * F.array()).sum();
      }
      L += rule.weights[q] * 2 * m.geometry().area[c] * f;
    }
  }
  if (form == ShapeForm::Weak) {
    const QuadratureRule e = gauss_legendre(3);
    for (int f : m.faces_with_tag(BoundaryTag::Obstacle)) {
      const Face& face = m.face(f);
      const Vec2& n = m.geometry().face_normal[f];
      const double len = m.geometry().face_length[f];
      for (std::size_t q = 0; q < e.size(); ++q) {
        const double s = e.points[q].x();
        const double H = (1 - s) * d.U0[face.v[0]][0] + s * d.U0[face.v[1]][0];
        const State P = (1 - s) * d.P[face.v[0]] + s * d.P[face.v[1]];
        L += e.weights[q] * len * 0.5 * g * H * H * Vec2(P[1], P[2]).dot(n);
      }
    }
  }
  return d.dt * L;
}

/// the same step as trajectories on mesh m
std::pair<Trajectory<1>, AdjointTrajectory<1>> as_trajectories(const Mesh& m, const StepData& d) {
  Trajectory<1> tr;
  tr.times = {0.0, d.dt};
  tr.states = {cg_to_dg<1, 3>(d.U0, m), cg_to_dg<1, 3>(d.U1, m)};
  tr.eps_v = {std::vector<double>(m.num_cells(), d.eps_v)};
  AdjointTrajectory<1> adj;
  adj.times = tr.times;
  adj.states = {DGField<1, 3>(m.num_cells()), cg_to_dg<1, 3>(d.P, m)};
  return {tr, adj};
}

VertexField2 random_field(const Mesh& m, unsigned seed, bool obstacle_only = false) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  VertexField2 V(m.num_vertices(), Vec2::Zero());
  for (std::size_t v = 0; v < V.size(); ++v)
    if (!obstacle_only || m.on_obstacle(int(v))) V[v] = Vec2(nd(rng), nd(rng));
  return V;
}

Mesh small_annulus() { return meshgen::annulus(Point(0, 0), 0.3, 1.0, 4, 16); }

GradientAssembly scaled(GradientAssembly a, double s) {
  for (auto& v : a.values) v *= s;
  return a;
}

} // namespace

TEST(ObjectiveJ1, ZeroWhenOnTarget) {
  const Mesh m = meshgen::rectangle(0, 2, 0, 1, 4, 2, shore_below);
  SWEProblem prob;
  prob.mesh = &m;
  prob.bathymetry = Bathymetry::from_function(m, [](const Point& x) { return 0.2 * x.x(); });
  const auto U = project<1, 3>([](const Point& x) { return State(1.0 - 0.2 * x.x(), 0, 0); }, m);
  EXPECT_NEAR(objective_J1<1>(prob, constant_trajectory(U, {0.0, 0.3, 1.0}), ObjectiveWeights{}), 0.0, 1e-28);
}

TEST(ObjectiveJ1, ConstantOffset) {
  const Mesh m = meshgen::rectangle(0, 2, 0, 1, 4, 2, shore_below);
  SWEProblem prob;
  prob.mesh = &m;
  prob.bathymetry = Bathymetry::constant(m.num_vertices(), 0.0);
  const auto U = project<1, 3>([](const Point&) { return State(1.1, 0.3, -0.2); }, m);
  ObjectiveWeights w;
  w.C = Vec3(1, 0, 0);
  // 1/2 * 0.1^2 * |Gamma1| * T
  EXPECT_NEAR(objective_J1<1>(prob, constant_trajectory(U, {0.0, 0.25, 0.7, 1.0}), w), 0.01, 1e-15);
}

TEST(ShapeTensor, StrongFormIsDerivativeOfTransportedLagrangian) {
  const Mesh m = small_annulus();
  const StepData d = random_step(m);
  SWEProblem prob;
  prob.mesh = &m;
  prob.bathymetry = {d.z};
  prob.params.eps_f = d.eps_f;
  const auto [tr, adj] = as_trajectories(m, d);
  const VertexField2 V = random_field(m, 4);
  const double s = 1e-5;
  const double fd = (lagrangian(apply_deformation(m, V, s), d, ShapeForm::Strong, prob.params.g) -
                     lagrangian(apply_deformation(m, V, -s), d, ShapeForm::Strong, prob.params.g)) / (2 * s);
  const double dj = dj1_volume<1>(prob, tr, adj, V, ShapeForm::Strong);
  EXPECT_NEAR(dj, fd, 1e-7 * std::abs(fd));
}

TEST(ShapeTensor, WeakFormIsDerivativeOfTransportedLagrangian) {
  const Mesh m = small_annulus();
  const StepData d = random_step(m);
  SWEProblem prob;
  prob.mesh = &m;
  prob.bathymetry = {d.z};
  prob.params.eps_f = d.eps_f;
  const auto [tr, adj] = as_trajectories(m, d);
  const VertexField2 V = random_field(m, 5);
  const double s = 1e-5;
  const double fd = (lagrangian(apply_deformation(m, V, s), d, ShapeForm::Weak, prob.params.g) -
                     lagrangian(apply_deformation(m, V, -s), d, ShapeForm::Weak, prob.params.g)) / (2 * s);
  const double dj = dj1_volume<1>(prob, tr, adj, V);
  EXPECT_NEAR(dj, fd, 1e-7 * std::abs(fd));
}

TEST(ShapeTensor, FormsAgreeAwayFromTheObstacle) {
  // with V = 0 on Gamma3 the two Lagrangians differ by a boundary term that does not move
  const Mesh m = small_annulus();
  const StepData d = random_step(m);
  SWEProblem prob;
  prob.mesh = &m;
  prob.bathymetry = {d.z};
  const auto [tr, adj] = as_trajectories(m, d);
  VertexField2 V = random_field(m, 6);
  for (std::size_t v = 0; v < V.size(); ++v)
    if (m.vertex(int(v)).norm() < 0.31 || m.vertex(int(v)).norm() > 0.99) V[v].setZero();
  const double a = dj1_volume<1>(prob, tr, adj, V, ShapeForm::Strong);
  const double b = dj1_volume<1>(prob, tr, adj, V, ShapeForm::Weak);
  EXPECT_GT(std::abs(a), 0.0);
  EXPECT_NEAR(a, b, 1e-8 * std::abs(a));
}

TEST(ShapeTensor, ZeroFieldOrZeroAdjoint) {
  const Mesh m = small_annulus();
  StepData d = random_step(m);
  SWEProblem prob;
  prob.mesh = &m;
  prob.bathymetry = {d.z};
  {
    const auto [tr, adj] = as_trajectories(m, d);
    EXPECT_EQ(dj1_volume<1>(prob, tr, adj, VertexField2(m.num_vertices(), Vec2::Zero())), 0.0);
  }
  for (auto& P : d.P) P.setZero();
  const auto [tr, adj] = as_trajectories(m, d);
  for (const auto& g : dj1_covector<1>(prob, tr, adj)) EXPECT_EQ(g.norm(), 0.0);
}

TEST(ShapeTensor, RejectsMismatchedGrids) {
  const Mesh m = small_annulus();
  const StepData d = random_step(m);
  SWEProblem prob;
  prob.mesh = &m;
  prob.bathymetry = {d.z};
  auto [tr, adj] = as_trajectories(m, d);
  adj.times.back() = 0.2;
  EXPECT_THROW(dj1_covector<1>(prob, tr, adj), DomainError);
}

namespace {

double bed(const Point& x) { return 0.5 - 0.2 * x.y(); }

struct Bay {
  meshgen::SymmetricMesh sm = meshgen::half_circle_with_obstacle({});
  SWEProblem prob;
  DGField<1, 3> U0;
  TimeControl tc{0.5, 1e-3, TimeScheme::SSPRK2};
  Bay() {
    prob.mesh = &sm.mesh;
    prob.bathymetry = Bathymetry::from_function(sm.mesh, bed);
    prob.params.c_f = 0.0;
    U0 = project<1, 3>(
        [](const Point& x) {
          const double d2 = (x.x() - 0.3) * (x.x() - 0.3) + (x.y() - 1.2) * (x.y() - 1.2);
          return State(1.0 + 0.1 * std::exp(-10 * d2) - bed(x), 0, 0);
        },
        sm.mesh);
  }
  double J1(const Mesh& m) const {
    SWEProblem p = prob;
    p.mesh = &m;
    return objective_J1<1>(p, solve_forward<1>(p, U0, tc), ObjectiveWeights{});
  }
};

} // namespace

TEST(ShapeGradient, MatchesFiniteDifferencesOnObstacleFields) {
  Bay bay;
  const Mesh& m = bay.sm.mesh;
  const auto fwd = solve_forward<1>(bay.prob, bay.U0, bay.tc);
  const auto adj = solve_adjoint<1>(bay.prob, fwd, ObjectiveWeights{});
  const VertexField2 G = dj1_covector<1>(bay.prob, fwd, adj);
  VertexField2 V(m.num_vertices(), Vec2::Zero());
  for (std::size_t v = 0; v < V.size(); ++v)
    if (m.on_obstacle(int(v))) {
      V[v] = Vec2(1.0 + 0.5 * m.vertex(int(v)).y(), -0.3 + m.vertex(int(v)).x());
    }
  const double s = 6e-5;
  const double fd = (bay.J1(apply_deformation(m, V, s)) - bay.J1(apply_deformation(m, V, -s))) / (2 * s);
  const double dj = apply_covector(G, V);
  EXPECT_LE(std::abs(dj - fd), 5e-2 * std::abs(fd)) << "fd " << fd << " dj " << dj;
}

TEST(TotalDerivative, ZeroWeightsGiveZero) {
  const Mesh m = small_annulus();
  PenaltyParams p;
  p.nu1 = p.nu2 = p.nu3 = 0.0;
  const auto a = total_derivative(m, VertexField2(m.num_vertices(), Vec2::Zero()), p);
  for (const auto& v : a.values) EXPECT_EQ(v.norm(), 0.0);
}

TEST(TotalDerivative, VolumeTermIsMaskedToObstacleSupport) {
  const Mesh m = meshgen::annulus(Point(0, 0), 0.3, 1.0, 8, 24);
  PenaltyParams p;
  p.nu2 = p.nu3 = 0.0;
  const auto a = total_derivative(m, {}, p);
  int masked = 0, free = 0;
  for (std::size_t v = 0; v < m.num_vertices(); ++v) {
    const bool touches = a.mask[v];
    if (m.on_obstacle(int(v))) {
      EXPECT_TRUE(touches);
    }
    if (m.vertex(int(v)).norm() > 0.6) {
      EXPECT_FALSE(touches);
      EXPECT_EQ(a.values[v].norm(), 0.0);
      ++masked;
    }
    if (touches) free += a.values[v].norm() > 0.0;
  }
  EXPECT_GT(masked, 0);
  EXPECT_GT(free, 0);
}

TEST(TotalDerivative, LinearInTheTestField) {
  const Mesh m = small_annulus();
  const auto a = total_derivative(m, random_field(m, 8), PenaltyParams{});
  const VertexField2 V1 = random_field(m, 9), V2 = random_field(m, 10);
  VertexField2 V12(V1.size());
  for (std::size_t i = 0; i < V1.size(); ++i) V12[i] = V1[i] + V2[i];
  EXPECT_NEAR(a.apply(V12), a.apply(V1) + a.apply(V2), 1e-14 * (std::abs(a.apply(V1)) + std::abs(a.apply(V2))));
}

TEST(TotalDerivative, VolumeOnlyGradientIsExactForJ2) {
  const Mesh m = meshgen::annulus(Point(0, 0), 0.3, 1.0, 6, 24);
  PenaltyParams p;
  p.nu2 = p.nu3 = 0.0;
  const auto a = total_derivative(m, {}, p);
  const VertexField2 V = random_field(m, 12, true);
  const double s = 1e-4;
  const double fd =
      (penalties(apply_deformation(m, V, s), p).J2 - penalties(apply_deformation(m, V, -s), p).J2) / (2 * s);
  EXPECT_NEAR(a.apply(V), fd, 1e-8 * std::abs(fd));
}

TEST(LameField, ConstantWhenBoundsAgree) {
  for (double mu : lame_field(small_annulus(), 10.0, 10.0)) EXPECT_NEAR(mu, 10.0, 1e-12);
}

TEST(LameField, MaximumPrinciple) {
  const auto mu = lame_field(meshgen::half_circle_with_obstacle({}).mesh, 10.0, 100.0);
  EXPECT_GE(*std::min_element(mu.begin(), mu.end()), 10.0 - 1e-9);
  EXPECT_LE(*std::max_element(mu.begin(), mu.end()), 100.0 + 1e-9);
}

TEST(LameField, AnnulusLogProfile) {
  const double a = 0.3, b = 1.0;
  const Mesh m = meshgen::annulus(Point(0, 0), a, b, 16, 64);
  const auto mu = lame_field(m, 10.0, 100.0);
  for (std::size_t v = 0; v < m.num_vertices(); ++v) {
    const double r = m.vertex(int(v)).norm();
    const double exact = 10.0 + 90.0 * std::log(r / b) / std::log(a / b);
    EXPECT_NEAR(mu[v], exact, 0.02 * exact);
  }
}

TEST(LameField, RejectsBadBounds) { EXPECT_THROW(lame_field(small_annulus(), 10.0, 5.0), ConfigError); }

namespace {

GradientAssembly random_assembly(const Mesh& m, unsigned seed) {
  GradientAssembly a;
  a.values = random_field(m, seed);
  a.mask.assign(m.num_vertices(), 1);
  return a;
}

} // namespace

TEST(Elasticity, ZeroAssemblyGivesZeroField) {
  const Mesh m = small_annulus();
  GradientAssembly a;
  a.values.assign(m.num_vertices(), Vec2::Zero());
  const auto W = solve_elasticity(m, a, lame_field(m, 10, 100));
  for (const auto& w : W) EXPECT_EQ(w.norm(), 0.0);
  EXPECT_EQ(gradient_norm(a, W), 0.0);
}

TEST(Elasticity, EnergyIdentityAndOuterBoundaryFixed) {
  const Mesh m = meshgen::half_circle_with_obstacle({}).mesh;
  const auto mu = lame_field(m, 10, 100);
  const auto a = random_assembly(m, 13);
  const auto W = solve_elasticity(m, a, mu);
  const double e = elasticity_energy(m, mu, W);
  EXPECT_NEAR(e, a.apply(W), 1e-8 * e);
  EXPECT_NEAR(gradient_norm(a, W) * gradient_norm(a, W), a.apply(W), 1e-8 * e);
  for (int f : m.boundary_faces())
    if (m.face(f).boundary_tag() != BoundaryTag::Obstacle) {
      for (int v : m.face(f).v) EXPECT_EQ(W[v].norm(), 0.0);
    }
}

TEST(Elasticity, NormScaling) {
  const Mesh m = small_annulus();
  const auto mu = lame_field(m, 10, 100);
  const auto a = random_assembly(m, 14);
  const auto a4 = scaled(a, 4.0);
  const auto W = solve_elasticity(m, a, mu);
  const double n = gradient_norm(a, W);
  // fixed W: the form is linear in the assembly, the norm its square root
  EXPECT_NEAR(gradient_norm(a4, W), 2.0 * n, 1e-10 * n);
  // re-solved W scales too, so the energy norm is linear
  EXPECT_NEAR(gradient_norm(a4, solve_elasticity(m, a4, mu)), 4.0 * n, 1e-10 * n);
}

TEST(Elasticity, StifferObstacleMovesLess) {
  const Mesh m = meshgen::annulus(Point(0, 0), 0.3, 1.0, 8, 32);
  GradientAssembly a;
  a.values.assign(m.num_vertices(), Vec2::Zero());
  // point load on the first ring off the obstacle
  int target = -1;
  for (std::size_t v = 0; v < m.num_vertices() && target < 0; ++v)
    if (!m.on_obstacle(int(v)) && m.vertex(int(v)).norm() < 0.4) target = int(v);
  ASSERT_GE(target, 0);
  a.values[target] = Vec2(1.0, 0.5);
  auto max_on_obstacle = [&](const VertexField2& W) {
    double s = 0.0;
    for (std::size_t v = 0; v < W.size(); ++v)
      if (m.on_obstacle(int(v))) s = std::max(s, W[v].norm());
    return s;
  };
  const double graded = max_on_obstacle(solve_elasticity(m, a, lame_field(m, 10, 100)));
  const double uniform = max_on_obstacle(solve_elasticity(m, a, lame_field(m, 10, 10)));
  EXPECT_LT(graded, uniform);
}

TEST(Elasticity, InvariantUnderTranslation) {
  const Mesh m = small_annulus();
  const Mesh shifted = apply_deformation(m, VertexField2(m.num_vertices(), Vec2(3.0, -2.0)), 1.0);
  const auto a = random_assembly(m, 15);
  const auto W1 = solve_elasticity(m, a, lame_field(m, 10, 100));
  const auto W2 = solve_elasticity(shifted, a, lame_field(shifted, 10, 100));
  for (std::size_t v = 0; v < W1.size(); ++v) EXPECT_NEAR((W1[v] - W2[v]).norm(), 0.0, 1e-10 * (1 + W1[v].norm()));
}

TEST(Elasticity, NegativeFormIsRejected) {
  const Mesh m = small_annulus();
  const auto a = random_assembly(m, 16);
  auto W = solve_elasticity(m, a, lame_field(m, 10, 100));
  for (auto& w : W) w = -w;
  EXPECT_THROW(gradient_norm(a, W), SolverError);
}
