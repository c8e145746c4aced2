// Gaussian surface bump in the half-circle bay: mass drift over time and a VTK of the final surface.
#include "swopt/mesh/generators.hpp"
#include "swopt/mesh/vtk_writer.hpp"
#include "swopt/swe/forward.hpp"

#include <cmath>
#include <iostream>

using namespace swopt;

int main() {
  const Mesh mesh = meshgen::half_circle_with_obstacle({}).mesh;
  auto bed = [](const Point& x) { return 0.5 - 0.25 * x.y(); };
  SWEProblem prob;
  prob.mesh = &mesh;
  prob.bathymetry = Bathymetry::from_function(mesh, bed);
  const auto U0 = project<1, 3>(
      [&](const Point& x) {
        return State(1.0 + std::exp(-15 * x.x() * x.x() - 15 * (x.y() - 1) * (x.y() - 1)) - bed(x), 0, 0);
      },
      mesh);
  const auto traj = solve_forward<1>(prob, U0, {1.0, 5e-3, TimeScheme::SSPRK2});

  const double m0 = total_mass(U0, mesh);
  for (std::size_t n = 0; n < traj.states.size(); n += 50)
    std::cout << "t = " << traj.times[n] << "  mass change through the open sea = " << total_mass(traj.states[n], mesh) / m0 - 1 << '\n';

  const auto Uv = dg_to_cg(traj.states.back(), mesh);
  std::vector<double> surface;
  for (std::size_t v = 0; v < Uv.size(); ++v) surface.push_back(Uv[v][0] + prob.bathymetry.z[v]);
  write_vtk("forward_bay.vtk", mesh, {point_scalar("surface", surface)}, "t = 1");
  std::cout << traj.num_steps() << " steps on " << mesh.num_cells() << " cells, wrote forward_bay.vtk\n";
}
