#include "swopt/mesh/generators.hpp"
#include "swopt/swe/forward.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <random>

using namespace swopt;

namespace {

std::mt19937& rng() {
  static std::mt19937 r(1234);
  return r;
}

State random_state() {
  std::uniform_real_distribution<double> h(0.1, 5.0), q(-3.0, 3.0);
  return State(h(rng()), q(rng()), q(rng()));
}

Vec2 random_normal() {
  std::uniform_real_distribution<double> a(0.0, 2.0 * M_PI);
  const double t = a(rng());
  return Vec2(std::cos(t), std::sin(t));
}

SWEProblem make_problem(const Mesh& mesh, const Bathymetry& b, double level = 1.0) {
  SWEProblem p;
  p.mesh = &mesh;
  p.bathymetry = b;
  p.open_sea_level = level;
  return p;
}

} // namespace

TEST(PhysicalFlux, Examples) {
  FluxMatrix F = physical_flux(State(1, 0, 0), 9.81);
  FluxMatrix E;
  E << 0, 0, 4.905, 0, 0, 4.905;
  EXPECT_LT((F - E).norm(), 1e-14);
  F = physical_flux(State(1, 1, 0), 9.81);
  E << 1, 0, 5.905, 0, 0, 4.905;
  EXPECT_LT((F - E).norm(), 1e-14);
  EXPECT_EQ(physical_flux(State(2, 0, 0), 0.0).norm(), 0.0);
  EXPECT_THROW(physical_flux(State(0, 1, 0), 9.81), DomainError);
  EXPECT_THROW(physical_flux(State(-1, 0, 0), 9.81), DomainError);
}

TEST(FluxJacobians, Examples) {
  const auto [J1, J2] = flux_jacobians(State(1, 0, 0), 9.81);
  Mat3 E;
  E << 0, 1, 0, 9.81, 0, 0, 0, 0, 0;
  EXPECT_LT((J1 - E).norm(), 1e-15);
  const auto [K1, K2] = flux_jacobians(State(1, 1, 1), 9.81);
  EXPECT_DOUBLE_EQ(K1(2, 2), 1.0);
  EXPECT_THROW(flux_jacobians(State(0, 0, 0), 9.81), DomainError);
}

TEST(FluxJacobians, FiniteDifference) {
  for (int i = 0; i < 20; ++i) {
    const State U = random_state();
    const auto [J1, J2] = flux_jacobians(U, 9.81);
    for (int k = 0; k < 3; ++k) {
      const double d = 1e-6;
      State e = State::Zero();
      e[k] = 1.0;
      const FluxMatrix dF = (physical_flux(U + d * e, 9.81) - physical_flux(U, 9.81)) / d;
      EXPECT_LT((dF.col(0) - J1.col(k)).cwiseAbs().maxCoeff(), 1e-5 * std::max(1.0, J1.norm()));
      EXPECT_LT((dF.col(1) - J2.col(k)).cwiseAbs().maxCoeff(), 1e-5 * std::max(1.0, J2.norm()));
    }
  }
}

TEST(WaveSpeeds, Examples) {
  Vec3 l = wave_speeds(State(1, 0, 0), Vec2(1, 0), 9.81);
  EXPECT_NEAR(l[0], -3.132091953, 1e-9);
  EXPECT_EQ(l[1], 0.0);
  EXPECT_NEAR(l[2], 3.132091953, 1e-9);
  l = wave_speeds(State(4, 4, 0), Vec2(1, 0), 9.81);
  EXPECT_NEAR(l[0], 1 - 6.264183905, 1e-9);
  EXPECT_NEAR(l[1], 1.0, 1e-15);
  EXPECT_NEAR(l[2], 1 + 6.264183905, 1e-9);
  l = wave_speeds(State(2, 1, 3), Vec2(0.6, 0.8), 0.0);
  EXPECT_DOUBLE_EQ(l[0], l[1]);
  EXPECT_DOUBLE_EQ(l[2], l[1]);
  EXPECT_NEAR(l[1], (0.6 * 1 + 0.8 * 3) / 2.0, 1e-15);
}

TEST(WaveSpeeds, MatchEigensolver) {
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const State U = random_state();
    const Vec2 n = random_normal();
    const auto [J1, J2] = flux_jacobians(U, 9.81);
    Eigen::EigenSolver<Mat3> es(n.x() * J1 + n.y() * J2);
    Vec3 ev = es.eigenvalues().real();
    std::sort(ev.data(), ev.data() + 3);
    worst = std::max(worst, (ev - wave_speeds(U, n, 9.81)).cwiseAbs().maxCoeff());
    EXPECT_LT(es.eigenvalues().imag().cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(NumericalFlux, Examples) {
  const Vec2 n(1, 0);
  for (FluxKind k : {FluxKind::LLF, FluxKind::HLLE}) {
    const State F = numerical_flux(State(1, 0, 0), State(1, 0, 0), n, 9.81, k);
    EXPECT_LT((F - State(0, 4.905, 0)).norm(), 1e-15);
  }
  const State F = numerical_flux(State(1, 0, 0), State(2, 0, 0), n, 9.81, FluxKind::LLF);
  EXPECT_NEAR(F[0], -2.21473, 1e-5);
  EXPECT_NEAR(F[1], 12.2625, 1e-12);
  EXPECT_EQ(F[2], 0.0);
  // supersonic to the right: full upwind
  const State Up(1, 5, 0.3), Um(1.2, 6, -0.1);
  const State H = numerical_flux(Up, Um, n, 9.81, FluxKind::HLLE);
  EXPECT_LT((H - physical_flux(Up, 9.81) * n).norm(), 1e-13);
  EXPECT_THROW(numerical_flux(State(0, 0, 0), Um, n, 9.81, FluxKind::LLF), DomainError);
}

TEST(NumericalFlux, ConsistencyAndConservation) {
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const State U = random_state(), V = random_state();
    const Vec2 n = random_normal();
    for (FluxKind k : {FluxKind::LLF, FluxKind::HLLE}) {
      const State ref = physical_flux(U, 9.81) * n;
      worst = std::max(worst, (numerical_flux(U, U, n, 9.81, k) - ref).cwiseAbs().maxCoeff() /
                                  std::max(1.0, ref.cwiseAbs().maxCoeff()));
      const State a = numerical_flux(U, V, n, 9.81, k);
      const State b = numerical_flux(V, U, -n, 9.81, k);
      EXPECT_LT((a + b).norm(), 1e-12 * std::max(1.0, a.norm()));
    }
  }
  EXPECT_LE(worst, 1e-13);
}

TEST(BoundaryState, Examples) {
  State g = boundary_state(State(1, 1, 0), Vec2(1, 0), BoundaryTag::Shore, 0.0);
  EXPECT_LT((g - State(1, -1, 0)).norm(), 1e-15);
  g = boundary_state(State(1, 0, 2), Vec2(1, 0), BoundaryTag::Obstacle, 0.0);
  EXPECT_LT((g - State(1, 0, 2)).norm(), 1e-15);
  g = boundary_state(State(1.3, 0.2, -0.1), Vec2(0, -1), BoundaryTag::OpenSea, 1.0);
  EXPECT_LT((g - State(1.0, 0.2, -0.1)).norm(), 1e-15);
  EXPECT_THROW(boundary_state(State(1, 0, 0), Vec2(1, 0), BoundaryTag::OpenSea, 0.0), DomainError);
}

TEST(SourceTerm, Examples) {
  EXPECT_EQ(source_term(State(1, 0, 0), Vec2::Zero(), 9.81, 0.049).norm(), 0.0);
  State s = source_term(State(1, 0, 0), Vec2(0, -0.25), 9.81, 0.049);
  EXPECT_NEAR(s[2], 2.4525, 1e-14);
  EXPECT_EQ(s[0], 0.0);
  EXPECT_EQ(s[1], 0.0);
  s = source_term(State(1, 1, 0), Vec2::Zero(), 9.81, 0.049);
  EXPECT_NEAR(s[1], -0.049, 1e-15);
}

TEST(ShockSensor, ConstantAndRamp) {
  const Mesh m = meshgen::rectangle(-1, 1, -1, 1, 8, 8);
  const auto U = project<1, 3>([](const Point&) { return Vec3(1.3, 0.1, 0.0); }, m);
  for (double e : shock_viscosity<1>(U, ShockSensorParams{})) EXPECT_EQ(e, 0.0);
  ShockSensorParams p;
  EXPECT_DOUBLE_EQ(viscosity_ramp(p.s0, p), 0.5 * p.eps_v_max);
  EXPECT_EQ(viscosity_ramp(p.s0 - p.kappa - 1e-9, p), 0.0);
  EXPECT_EQ(viscosity_ramp(p.s0 + p.kappa + 1e-9, p), p.eps_v_max);
}

TEST(ShockSensor, DiscontinuousStep) {
  // the step x + 0.3 y = 0.05 cuts through cells; cells it crosses get the maximum viscosity
  const Mesh m = meshgen::rectangle(-1, 1, -1, 1, 10, 10);
  auto step = [](const Point& x) { return x.x() + 0.3 * x.y() < 0.05 ? 0.2 : 2.0; };
  const auto U = project<1, 3>([&](const Point& x) { return Vec3(step(x), 0, 0); }, m, 30);
  const ShockSensorParams p;
  const auto eps = shock_viscosity<1>(U, p);
  int cut = 0;
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const auto& t = m.triangle(int(c));
    const double a = step(m.vertex(t[0])), b = step(m.vertex(t[1])), d = step(m.vertex(t[2]));
    if (a == b && b == d) {
      EXPECT_EQ(eps[c], 0.0);
    } else {
      ++cut;
      // oracle: sensor formula evaluated on the projected step
      const double s = sensor_value<1>(U.cell(c));
      EXPECT_DOUBLE_EQ(eps[c], viscosity_ramp(s, p));
    }
  }
  EXPECT_GT(cut, 0);
  // a cell cut through its middle is flagged at full strength
  int full = 0;
  for (double e : eps) full += e == p.eps_v_max;
  EXPECT_GT(full, 0);
}

TEST(StableDt, Examples) {
  // single right triangle with smallest altitude 0.1
  const Mesh m(std::vector<Point>{{0, 0}, {0.1 * std::sqrt(2.0), 0}, {0, 0.1 * std::sqrt(2.0)}},
               {{0, 1, 2}}, {{{0, 1}, BoundaryTag::Shore}, {{1, 2}, BoundaryTag::Shore}, {{2, 0}, BoundaryTag::Shore}});
  EXPECT_NEAR(m.geometry().min_height[0], 0.1, 1e-15);
  const auto U = project<1, 3>([](const Point&) { return Vec3(1, 0, 0); }, m);
  SWEParams p;
  EXPECT_NEAR(stable_dt(U, m, p, 1.0), 0.3 * 0.1 / std::sqrt(9.81), 1e-15);
  EXPECT_NEAR(stable_dt(U, m, p, 1.0), 9.5783e-3, 1e-7);
  EXPECT_EQ(stable_dt(U, m, p, 5e-3), 5e-3);
  EXPECT_EQ(stable_dt(U, m, p, 5e-3, 1e-4), 1e-4);
}

TEST(Residual, LakeAtRestFlatBed) {
  const Mesh m = meshgen::half_circle_with_obstacle({}).mesh;
  SWEProblem prob = make_problem(m, Bathymetry::constant(m.num_vertices(), 0.2));
  prob.params.c_f = 0.3;
  const auto U = project<1, 3>([](const Point&) { return Vec3(0.8, 0, 0); }, m);
  DGField<1, 3> R;
  swe_residual<1>(prob, U, std::vector<double>(m.num_cells(), 0.05), R);
  EXPECT_LE(R.max_abs(), 1e-12);
}

TEST(Residual, LakeAtRestLinearBed) {
  const Mesh m = meshgen::half_circle_with_obstacle({}).mesh;
  SWEProblem prob =
      make_problem(m, Bathymetry::from_function(m, [](const Point& x) { return 0.5 - 0.25 * x.y(); }));
  const auto U = project<1, 3>([](const Point& x) { return Vec3(1.0 - (0.5 - 0.25 * x.y()), 0, 0); }, m);
  DGField<1, 3> R;
  swe_residual<1>(prob, U, shock_viscosity<1>(U, prob.params.sensor), R);
  double mom = 0.0;
  for (std::size_t c = 0; c < m.num_cells(); ++c) mom = std::max(mom, R.cell(c).bottomRows(2).cwiseAbs().maxCoeff());
  EXPECT_LE(mom, 1e-10);
}

namespace {

/// independent single-cell P1 oracle with a barycentric basis; the rules match the solver's degrees
/// because friction, Q^2/H and the wall penalty are not polynomial
Eigen::Matrix3d single_cell_oracle(const Mesh& m, const SWEProblem& prob, const std::function<State(Point)>& U,
                                   double eps_v) {
  const auto& t = m.triangle(0);
  const Point a = m.vertex(t[0]), b = m.vertex(t[1]), c = m.vertex(t[2]);
  const double area = m.geometry().area[0];
  // barycentric gradients
  Eigen::Matrix<double, 3, 2> dl;
  const Point pts[3] = {a, b, c};
  for (int i = 0; i < 3; ++i) {
    const Point& p = pts[(i + 1) % 3];
    const Point& q = pts[(i + 2) % 3];
    dl.row(i) = Vec2(p.y() - q.y(), q.x() - p.x()).transpose() / (2.0 * area);
  }
  auto bary = [&](const Point& x) {
    Vec3 l;
    for (int i = 0; i < 3; ++i) l[i] = 1.0 / 3.0 + dl.row(i).dot(x - (a + b + c) / 3.0);
    return l;
  };
  const SWEParams& par = prob.params;
  const Vec2 gz = prob.bathymetry.gradient(m, 0);
  const Vec3 G(eps_v, par.eps_f.x(), par.eps_f.y());
  // gradient of U by central differences (U affine)
  auto gradU = [&](const Point& x) {
    Eigen::Matrix<double, 3, 2> g;
    g.col(0) = (U(x + Vec2(1e-3, 0)) - U(x - Vec2(1e-3, 0))) / 2e-3;
    g.col(1) = (U(x + Vec2(0, 1e-3)) - U(x - Vec2(0, 1e-3))) / 2e-3;
    return g;
  };
  Eigen::Matrix3d R = Eigen::Matrix3d::Zero(); // component x dof
  const QuadratureRule vol = triangle_rule(4);
  for (std::size_t q = 0; q < vol.size(); ++q) {
    const Point x = m.map_to_physical(0, vol.points[q].x(), vol.points[q].y());
    const State u = U(x);
    const double w = vol.weights[q] * 2.0 * area;
    Eigen::Matrix<double, 3, 2> gh = gradU(x);
    gh.row(0) += gz.transpose();
    const Vec3 l = bary(x);
    const FluxMatrix F = physical_flux(u, par.g);
    const State S = source_term(u, gz, par);
    for (int i = 0; i < 3; ++i)
      R.col(i) += w * (-F * dl.row(i).transpose() + G.asDiagonal() * gh * dl.row(i).transpose() - S * l[i]);
  }
  const QuadratureRule gl = gauss_legendre(3);
  for (int k = 0; k < 3; ++k) {
    const Point p = pts[k], q = pts[(k + 1) % 3];
    const Vec2 tang = q - p;
    const Vec2 n = Vec2(tang.y(), -tang.x()).normalized();
    for (std::size_t j = 0; j < gl.size(); ++j) {
      const Point x = p + gl.points[j].x() * tang;
      const State u = U(x);
      const State F = numerical_flux(u, boundary_state(u, n, BoundaryTag::Shore, 0.0), n, par);
      const Vec3 l = bary(x);
      for (int i = 0; i < 3; ++i) R.col(i) += gl.weights[j] * tang.norm() * F * l[i];
    }
  }
  return R;
}

} // namespace

TEST(Residual, SingleCellOracle) {
  const Mesh m(std::vector<Point>{{0.1, 0.2}, {1.3, 0.4}, {0.5, 1.1}}, {{0, 1, 2}},
               {{{0, 1}, BoundaryTag::Shore}, {{1, 2}, BoundaryTag::Shore}, {{2, 0}, BoundaryTag::Shore}});
  SWEProblem prob = make_problem(m, Bathymetry::from_function(m, [](const Point& x) { return 0.1 + 0.2 * x.x() - 0.3 * x.y(); }));
  prob.params.c_f = 0.049;
  auto U = [](const Point& x) { return State(1.5 + 0.3 * x.x() - 0.2 * x.y(), 0.4 - 0.5 * x.y(), -0.3 + 0.2 * x.x()); };
  const auto Uh = project<1, 3>(U, m);
  for (FluxKind k : {FluxKind::LLF, FluxKind::HLLE}) {
    prob.params.flux = k;
    DGField<1, 3> R;
    swe_residual<1>(prob, Uh, {0.03}, R);
    const Eigen::Matrix3d oracle = single_cell_oracle(m, prob, U, 0.03);
    EXPECT_LE((Eigen::Matrix3d(R.cell(0)) - oracle).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Residual, NonpositiveHeight) {
  const Mesh m = meshgen::rectangle(0, 1, 0, 1, 2, 2);
  SWEProblem prob = make_problem(m, Bathymetry::constant(m.num_vertices(), 0.0));
  const auto U = project<1, 3>([](const Point& x) { return Vec3(x.x() - 0.5, 0, 0); }, m);
  DGField<1, 3> R;
  EXPECT_THROW(swe_residual<1>(prob, U, std::vector<double>(m.num_cells(), 0.0), R), DomainError);
}

TEST(SolveForward, LakeAtRestSteady) {
  const Mesh m = meshgen::rectangle(-1, 1, 0, 2, 12, 12);
  SWEProblem prob = make_problem(m, Bathymetry::constant(m.num_vertices(), 0.0));
  const auto U0 = project<1, 3>([](const Point&) { return Vec3(1, 0, 0); }, m);
  const auto traj = solve_forward<1>(prob, U0, {1.0, 5e-3, TimeScheme::SSPRK2});
  EXPECT_DOUBLE_EQ(traj.times.back(), 1.0);
  double drift = 0.0;
  for (std::size_t i = 0; i < U0.data().size(); ++i)
    drift = std::max(drift, std::abs(traj.states.back().data()[i] - U0.data()[i]));
  EXPECT_LE(drift, 1e-12);
  for (std::size_t n = 1; n < traj.times.size(); ++n) EXPECT_GT(traj.times[n], traj.times[n - 1]);
}

TEST(SolveForward, MassConservationClosedBasin) {
  const Mesh m = meshgen::half_circle_with_obstacle({}).mesh;
  // all walls: retag the open sea as shore
  std::vector<BoundaryEdge> be = m.boundary_edges();
  for (auto& e : be)
    if (e.tag == BoundaryTag::OpenSea) e.tag = BoundaryTag::Shore;
  const Mesh closed(m.vertices(), m.triangles(), be);
  SWEProblem prob =
      make_problem(closed, Bathymetry::from_function(closed, [](const Point& x) { return 0.5 - 0.25 * x.y(); }));
  prob.params.eps_f = Vec2::Zero();
  prob.params.sensor.eps_v_max = 0.0;
  const auto U0 = project<1, 3>(
      [](const Point& x) {
        return Vec3(1.0 + std::exp(-15 * x.x() * x.x() - 15 * (x.y() - 1) * (x.y() - 1)) - (0.5 - 0.25 * x.y()), 0, 0);
      },
      closed);
  const auto traj = solve_forward<1>(prob, U0, {1.0, 5e-3, TimeScheme::SSPRK2});
  const double m0 = total_mass(U0, closed), m1 = total_mass(traj.states.back(), closed);
  EXPECT_LE(std::abs(m1 - m0) / m0, 1e-11);
}

TEST(SolveForward, MirrorSymmetry) {
  meshgen::HalfCircleSpec spec;
  const auto sm = meshgen::half_circle_with_obstacle(spec);
  const Mesh& m = sm.mesh;
  SWEProblem prob = make_problem(m, Bathymetry::from_function(m, [](const Point& x) { return 0.5 - 0.25 * x.y(); }));
  const auto U0 = project<1, 3>(
      [](const Point& x) {
        return Vec3(1.0 + std::exp(-15 * x.x() * x.x() - 15 * (x.y() - 1) * (x.y() - 1)) - (0.5 - 0.25 * x.y()), 0, 0);
      },
      m);
  const auto traj = solve_forward<1>(prob, U0, {0.5, 5e-3, TimeScheme::SSPRK2});
  double worst = 0.0;
  for (std::size_t n = 0; n < traj.states.size(); n += 10) {
    const auto& U = traj.states[n];
    for (std::size_t c = 0; c < m.num_cells(); ++c) {
      const int mc = sm.mirror_cell[c];
      const auto& t = m.triangle(int(c));
      const auto& mt = m.triangle(mc);
      for (int k = 0; k < 3; ++k) {
        const int mv = sm.mirror_vertex[t[k]];
        int mk = 0;
        while (mt[mk] != mv) ++mk;
        const State a = U.vertex_value(c, k), b = U.vertex_value(mc, mk);
        worst = std::max({worst, std::abs(a[0] - b[0]), std::abs(a[1] + b[1]), std::abs(a[2] - b[2])});
      }
    }
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(SolveForward, EulerConvergesToSSPRK2) {
  const Mesh m = meshgen::rectangle(-1, 1, -1, 1, 8, 8);
  SWEProblem prob = make_problem(m, Bathymetry::constant(m.num_vertices(), 0.0));
  prob.params.sensor.eps_v_max = 0.0;
  const auto U0 = project<1, 3>(
      [](const Point& x) { return Vec3(1.0 + 0.2 * std::exp(-4 * x.squaredNorm()), 0, 0); }, m);
  const auto ref = solve_forward<1>(prob, U0, {0.2, 2.5e-4, TimeScheme::SSPRK2}).states.back();
  auto err = [&](double dt) {
    const auto u = solve_forward<1>(prob, U0, {0.2, dt, TimeScheme::ForwardEuler}).states.back();
    double e = 0.0;
    for (std::size_t i = 0; i < u.data().size(); ++i) e = std::max(e, std::abs(u.data()[i] - ref.data()[i]));
    return e;
  };
  const double e1 = err(4e-3), e2 = err(2e-3);
  EXPECT_GE(std::log2(e1 / e2), 0.9);
}

TEST(SolveForward, PositivityLossIsReported) {
  const Mesh m = meshgen::rectangle(-1, 1, -1, 1, 6, 6);
  SWEProblem prob = make_problem(m, Bathymetry::constant(m.num_vertices(), 0.0));
  // a violent outflow drains a thin layer
  const auto U0 = project<1, 3>([](const Point& x) { return Vec3(0.01, x.x() > 0 ? 2.0 : -2.0, 0); }, m);
  EXPECT_THROW(solve_forward<1>(prob, U0, {1.0, 1e-2, TimeScheme::ForwardEuler}), SolverError);
}

TEST(ImplicitViscous, MatrixMatchesResidualForm) {
  const auto sm = meshgen::half_circle_with_obstacle({});
  const Mesh& m = sm.mesh;
  std::uniform_real_distribution<double> u(-1.0, 1.0), e(0.0, 0.05);
  DGField<1, 3> W(m.num_cells());
  for (double& v : W.data()) v = u(rng());
  std::vector<double> eps_v(m.num_cells());
  for (double& v : eps_v) v = e(rng());
  const Vec2 eps_f(0.01, 0.02);
  DGField<1, 3> R(m.num_cells());
  add_sipg<1>(m, W, eps_v, eps_f, 20.0, R);
  for (int k = 0; k < 3; ++k) {
    const std::vector<double> d = k == 0 ? eps_v : std::vector<double>(m.num_cells(), eps_f[k - 1]);
    const SparseMatrix A = assemble_sipg_matrix<1>(m, d, 20.0);
    Eigen::VectorXd w(A.cols());
    for (std::size_t c = 0; c < m.num_cells(); ++c) w.segment<3>(3 * c) = W.cell(c).row(k).transpose();
    const Eigen::VectorXd Aw = A * w;
    double worst = 0.0, scale = 0.0;
    for (std::size_t c = 0; c < m.num_cells(); ++c)
      for (int i = 0; i < 3; ++i) {
        worst = std::max(worst, std::abs(Aw[3 * c + i] - R.cell(c)(k, i)));
        scale = std::max(scale, std::abs(Aw[3 * c + i]));
      }
    EXPECT_LE(worst, 1e-12 * scale) << "component " << k;
    EXPECT_LE((SparseMatrix(A.transpose()) - A).norm(), 1e-12 * A.norm());
    // constants lie in the kernel
    EXPECT_LE((A * Eigen::VectorXd::Ones(A.cols())).lpNorm<Eigen::Infinity>(), 1e-12 * A.norm());
  }
}

TEST(ImplicitViscous, BackwardEulerSolve) {
  const Mesh m = meshgen::rectangle(0, 1, 0, 1, 6, 6);
  ViscousSolver<1> solver(m, Vec2(0.01, 0.01), 20.0);
  DGField<1, 3> W(m.num_cells());
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : W.data()) v = u(rng());
  const std::vector<double> eps_v(m.num_cells(), 0.03);
  DGField<1, 3> b = detail::mass_times(W, m);
  const double mass0 = b.data().size() ? total_mass(W, m) : 0.0;
  solver.solve(b, eps_v, 0.1);
  // (M + dt A) x reproduces the right-hand side
  DGField<1, 3> Ax(m.num_cells());
  add_sipg<1>(m, b, eps_v, Vec2(0.01, 0.01), 20.0, Ax);
  DGField<1, 3> lhs = detail::mass_times(b, m);
  lhs.axpy(0.1, Ax);
  const DGField<1, 3> rhs = detail::mass_times(W, m);
  double worst = 0.0;
  for (std::size_t i = 0; i < lhs.data().size(); ++i) worst = std::max(worst, std::abs(lhs.data()[i] - rhs.data()[i]));
  EXPECT_LE(worst, 1e-13);
  // diffusion conserves every component's integral and does not amplify
  EXPECT_NEAR(total_mass(b, m), mass0, 1e-13);
  EXPECT_LE(b.max_abs(), W.max_abs());
}
