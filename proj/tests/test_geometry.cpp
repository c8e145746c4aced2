#include "swopt/geometry/distance.hpp"
#include "swopt/geometry/eikonal.hpp"
#include "swopt/geometry/penalties.hpp"
#include "swopt/mesh/generators.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace swopt;
using std::numbers::pi;

namespace {

BoundaryPolylines unit_square() {
  // clockwise on purpose, the constructor must fix the orientation
  return BoundaryPolylines({{Point(0, 0), Point(0, 1), Point(1, 1), Point(1, 0)}});
}

VertexField2 field(const Mesh& m, const std::function<Vec2(const Point&)>& f) {
  VertexField2 V(m.num_vertices());
  for (std::size_t v = 0; v < V.size(); ++v) V[v] = f(m.vertex(int(v)));
  return V;
}

Vec2 wavy(const Point& x) {
  return Vec2(std::sin(3 * x.x() + 1) * std::cos(2 * x.y()), std::cos(x.x()) * std::sin(4 * x.y() + 0.5));
}

/// central difference of f(mesh deformed by s V) at s = 0
double central_fd(const Mesh& m, const VertexField2& V, double s, const std::function<double(const Mesh&)>& f) {
  return (f(apply_deformation(m, V, s)) - f(apply_deformation(m, V, -s))) / (2 * s);
}

Mesh circle_obstacle() { return meshgen::annulus(Point(0, 0), 0.25, 1.0, 12, 64); }

/// rectangle [0,1]x[0,0.5] with a rectangular obstacle of width `w` starting at x = 0.49
Mesh slab(double w) {
  const Mesh base = meshgen::rectangle(0, 1, 0, 0.5, 100, 50);
  return meshgen::carve(base, [w](const Point& c) {
    return c.x() > 0.49 && c.x() < 0.49 + w && c.y() > 0.1 && c.y() < 0.4;
  });
}

double max_diameter(const Mesh& m) { return *std::max_element(m.geometry().diameter.begin(), m.geometry().diameter.end()); }

} // namespace

TEST(ExactDistance, UnitSquare) {
  const auto b = unit_square();
  EXPECT_NEAR(exact_distance(Point(0.5, 0.5), b), 0.5, 1e-15);
  EXPECT_NEAR(exact_distance(Point(0.25, 0.5), b), 0.25, 1e-15);
  EXPECT_NEAR(exact_distance(Point(2.0, 0.5), b), -1.0, 1e-15);
  EXPECT_NEAR(exact_distance(Point(2.0, 2.0), b), -std::sqrt(2.0), 1e-15);
  EXPECT_EQ(exact_distance(Point(1.0, 0.3), b), 0.0);
}

TEST(ExactDistance, HoleCountsAsOutside) {
  const BoundaryPolylines b({{Point(0, 0), Point(4, 0), Point(4, 4), Point(0, 4)},
                             {Point(1, 1), Point(3, 1), Point(3, 3), Point(1, 3)}});
  EXPECT_NEAR(exact_distance(Point(2, 2), b), -1.0, 1e-15);
  EXPECT_NEAR(exact_distance(Point(0.5, 2), b), 0.5, 1e-15);
}

TEST(ExactDistance, Lipschitz) {
  const auto b = unit_square();
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-0.5, 1.5);
  for (int i = 0; i < 1000; ++i) {
    const Point x(u(rng), u(rng)), y(u(rng), u(rng));
    EXPECT_LE(std::abs(exact_distance(x, b) - exact_distance(y, b)), (x - y).norm() + 1e-14);
  }
}

TEST(ExactDistance, ProjectionAndRidge) {
  const auto b = unit_square();
  const auto p = project_to_boundary(Point(0.5, 0.2), b);
  EXPECT_NEAR((p.point - Point(0.5, 0.0)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((p.normal - Vec2(0, -1)).norm(), 0.0, 1e-15);
  EXPECT_FALSE(p.ridge);
  EXPECT_TRUE(project_to_boundary(Point(0.5, 0.5), b).ridge);
  EXPECT_TRUE(project_to_boundary(Point(0.2, 0.2), b).ridge);
  // outside a corner the closest point is the vertex and the normal is diagonal
  const auto c = project_to_boundary(Point(1.5, 1.5), b);
  EXPECT_NEAR((c.point - Point(1, 1)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((c.normal - Vec2(1, 1).normalized()).norm(), 0.0, 1e-15);
  EXPECT_THROW(project_to_boundary(Point(0, 0), BoundaryPolylines{}), DomainError);
}

TEST(ExactDistance, MeshLoopsKeepDomainOnTheLeft) {
  const Mesh m = circle_obstacle();
  const auto b = BoundaryPolylines::from_mesh(m);
  EXPECT_NEAR(exact_distance(Point(0.0, 0.0), b), -0.25 * std::cos(pi / 64), 1e-12);
  EXPECT_NEAR(exact_distance(Point(0.5, 0.0), b), 0.25, 1e-12);
  EXPECT_LT(exact_distance(Point(1.5, 0.0), b), 0.0);
}

TEST(Eikonal, BoundaryValuesAreZero) {
  const Mesh m = meshgen::disk(Point(0, 0), 1.0, 6);
  const auto sd = eikonal_solve(m);
  EXPECT_LE(sd.residual, 1e-8);
  for (int f : m.boundary_faces())
    for (int v : m.face(f).v) EXPECT_LE(std::abs(sd.w[v]), 1e-12);
}

TEST(Eikonal, DiskCenterValue) {
  const double R = 1.0;
  const Mesh m = meshgen::disk(Point(0, 0), R, 6);
  const auto sd = eikonal_solve(m);
  EXPECT_DOUBLE_EQ(sd.eps, max_diameter(m));
  EXPECT_LE(std::abs(sd.w[0] - R), 2 * max_diameter(m));
}

TEST(Eikonal, HalfCircleObstacleAgreesWithExactDistance) {
  const Mesh m = meshgen::half_circle_with_obstacle({}).mesh;
  const auto sd = eikonal_solve(m);
  const auto b = BoundaryPolylines::from_mesh(m);
  double err = 0.0;
  for (std::size_t v = 0; v < m.num_vertices(); ++v)
    err = std::max(err, std::abs(sd.w[v] - exact_distance(m.vertex(int(v)), b)));
  EXPECT_LE(err, 2 * max_diameter(m));
}

TEST(Eikonal, GradientNearUnitAwayFromRidge) {
  // the only ridge of a disk is its center; the stabilization lowers |grad w|
  // by about eps / (distance to the ridge), so stay 8 eps away from it
  const Mesh m = meshgen::disk(Point(0, 0), 1.0, 32);
  const auto sd = eikonal_solve(m);
  int n = 0;
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const auto& t = m.triangle(int(c));
    bool far = true;
    for (int v : t) far = far && m.vertex(v).norm() >= 8 * sd.eps;
    if (!far) continue;
    const Vec2 g = p1_gradients(m, int(c)).transpose() * Vec3(sd.w[t[0]], sd.w[t[1]], sd.w[t[2]]);
    EXPECT_GE(g.norm(), 0.8);
    EXPECT_LE(g.norm(), 1.1);
    ++n;
  }
  EXPECT_GT(n, 1000);
}

TEST(Eikonal, ReportsNonConvergence) {
  EikonalOptions opt;
  opt.max_iters = 0;
  EXPECT_THROW(eikonal_solve(meshgen::disk(Point(0, 0), 1.0, 4), opt), SolverError);
}

TEST(Penalties, UnitSquareWithoutObstacle) {
  const PenaltyParams p;
  const auto v = penalties(meshgen::rectangle(0, 1, 0, 1, 8, 8), p);
  EXPECT_NEAR(v.J2, -p.nu1, 1e-18);
  EXPECT_EQ(v.J3, 0.0);
  EXPECT_EQ(v.J4, 0.0);
}

TEST(Penalties, CirclePerimeter) {
  const PenaltyParams p;
  const auto v = penalties(circle_obstacle(), p);
  const double exact = p.nu2 * 2 * pi * 0.25;
  EXPECT_LE(std::abs(v.J3 - exact), 0.01 * exact);
}

TEST(Penalties, ThickSlabHasNoThicknessPenalty) {
  PenaltyParams p;
  const auto v = penalties(slab(0.4), p);
  EXPECT_EQ(v.J4, 0.0);
  VertexField2 g = penalty_gradients(slab(0.4), p).dJ4;
  for (const auto& x : g) EXPECT_EQ(x.norm(), 0.0);
}

TEST(Penalties, ThinSlabIsPenalized) {
  PenaltyParams p;
  const Mesh m = slab(0.03);
  // rays from both long faces re-enter water after 0.03: nu3 * 2 * 0.3 * int_0.03^0.05 (xi - 0.03)^2
  const double model = p.nu3 * 2 * 0.3 * std::pow(0.02, 3) / 3;
  const double J4 = penalties(m, p).J4;
  EXPECT_GT(J4, 0.5 * model);
  EXPECT_LT(J4, 2.0 * model);
}

TEST(Penalties, RejectsInvalidParams) {
  PenaltyParams p;
  p.d_min = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = PenaltyParams{};
  p.nu3 = -1.0;
  EXPECT_THROW(penalties(circle_obstacle(), p), ConfigError);
}

TEST(PenaltyDerivatives, VolumeExamples) {
  const PenaltyParams p;
  const Mesh m = meshgen::rectangle(0, 1, 0, 1, 8, 8);
  EXPECT_NEAR(penalty_derivatives(m, field(m, [](const Point&) { return Vec2(0.3, -0.7); }), p).DJ2, 0.0, 1e-18);
  // J2 = -nu1 area and div (x, y) = 2
  EXPECT_NEAR(penalty_derivatives(m, field(m, [](const Point& x) { return Vec2(x); }), p).DJ2, -2 * p.nu1, 1e-17);
}

TEST(PenaltyDerivatives, VolumeMatchesFiniteDifferences) {
  const PenaltyParams p;
  const Mesh m = circle_obstacle();
  const auto V = field(m, wavy);
  const double fd = central_fd(m, V, 1e-3, [&](const Mesh& x) { return penalties(x, p).J2; });
  const double dj = penalty_derivatives(m, V, p).DJ2;
  EXPECT_LE(std::abs(fd - dj), 1e-10 * std::abs(dj));
}

TEST(PenaltyDerivatives, PerimeterRadialField) {
  const PenaltyParams p;
  const Mesh m = circle_obstacle();
  const auto V = field(m, [](const Point& x) { return Vec2(x.normalized()); });
  const double exact = 2 * pi * p.nu2;
  EXPECT_LE(std::abs(penalty_derivatives(m, V, p).DJ3 - exact), 0.02 * exact);
  EXPECT_LE(std::abs(dj3_curvature_form(m, V, p.nu2) - exact), 0.02 * exact);
}

TEST(PenaltyDerivatives, CurvatureOfObstacleBoundary) {
  const auto kappa = obstacle_curvature(circle_obstacle());
  const Mesh m = circle_obstacle();
  for (std::size_t v = 0; v < m.num_vertices(); ++v) {
    if (m.on_obstacle(int(v))) EXPECT_NEAR(kappa[v], -1.0 / 0.25, 0.01 / 0.25);
    else EXPECT_EQ(kappa[v], 0.0);
  }
}

TEST(PenaltyDerivatives, PerimeterMatchesFiniteDifferences) {
  const PenaltyParams p;
  const Mesh m = circle_obstacle();
  const auto V = field(m, wavy);
  const double fd = central_fd(m, V, 1e-5, [&](const Mesh& x) { return penalties(x, p).J3; });
  const double dj = penalty_derivatives(m, V, p).DJ3;
  EXPECT_LE(std::abs(fd - dj), 1e-3 * std::abs(dj));
}

TEST(PenaltyDerivatives, ThicknessMatchesFiniteDifferences) {
  const PenaltyParams p;
  const Mesh m = slab(0.03);
  const auto V = field(m, wavy);
  const double fd = central_fd(m, V, 1e-6, [&](const Mesh& x) { return penalties(x, p).J4; });
  const double dj = penalty_derivatives(m, V, p).DJ4;
  EXPECT_GT(std::abs(dj), 0.0);
  EXPECT_LE(std::abs(fd - dj), 5e-2 * std::abs(dj));
}
