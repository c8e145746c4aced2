// Shape derivative of the shore objective against central differences for one obstacle field.
#include "swopt/mesh/generators.hpp"
#include "swopt/shape/shape_derivative.hpp"

#include <cmath>
#include <iostream>

using namespace swopt;

int main() {
  meshgen::HalfCircleSpec hs;
  const meshgen::SymmetricMesh sm = meshgen::half_circle_with_obstacle(hs);
  const Mesh& mesh = sm.mesh;
  auto bed = [](const Point& x) { return 0.5 - 0.2 * x.y(); };
  const Bathymetry z = Bathymetry::from_function(mesh, bed);
  const auto U0 = project<1, 3>(
      [&](const Point& x) {
        return State(1.0 + 0.1 * std::exp(-10 * (x - Point(0.3, 1.2)).squaredNorm()) - bed(x), 0, 0);
      },
      mesh);
  const TimeControl tc{0.5, 1e-3, TimeScheme::SSPRK2};
  const ObjectiveWeights w;

  // radial push of the obstacle, fading away from its center
  VertexField2 V(mesh.num_vertices(), Vec2::Zero());
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
    if (mesh.on_obstacle(int(v))) V[v] = (mesh.vertex(int(v)) - hs.obstacle_center).normalized();

  auto problem = [&](const Mesh& m) {
    SWEProblem p;
    p.mesh = &m;
    p.params.c_f = 0.0;
    p.bathymetry = z;
    return p;
  };
  auto J = [&](const Mesh& m) {
    const SWEProblem p = problem(m);
    return objective_J1<1>(p, solve_forward<1>(p, U0, tc), w);
  };

  const SWEProblem prob = problem(mesh);
  const auto fwd = solve_forward<1>(prob, U0, tc);
  const auto adj = solve_adjoint<1>(prob, fwd, w);
  const double dj = dj1_volume<1>(prob, fwd, adj, V);
  const double s = 1e-4;
  const double fd = (J(apply_deformation(mesh, V, s)) - J(apply_deformation(mesh, V, -s))) / (2 * s);
  std::cout << "cells " << mesh.num_cells() << "\nDJ[V] = " << dj << "\nFD    = " << fd
            << "\nrelative error " << std::abs(dj - fd) / std::abs(fd) << '\n';
}
