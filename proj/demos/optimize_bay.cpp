// A few descent iterations on the Ex.1-style bay, writing each iterate as VTK.
#include "swopt/mesh/generators.hpp"
#include "swopt/mesh/vtk_writer.hpp"
#include "swopt/optimizer/optimizer.hpp"

#include <cmath>
#include <iostream>

using namespace swopt;

int main(int argc, char** argv) {
  const int iters = argc > 1 ? std::atoi(argv[1]) : 5;
  auto bed = [](const Point& x) { return 0.5 - 0.25 * x.y(); };
  Scenario<1> sc(meshgen::half_circle_with_obstacle({}).mesh);
  sc.bathymetry = Bathymetry::from_function(sc.mesh, bed);
  sc.U0 = project<1, 3>(
      [&](const Point& x) {
        return State(1.0 + std::exp(-15 * x.x() * x.x() - 15 * (x.y() - 1) * (x.y() - 1)) - bed(x), 0, 0);
      },
      sc.mesh);
  sc.time = TimeControl{2.5, 5e-3, TimeScheme::SSPRK2};
  sc.optimizer.max_iters = iters;
  sc.optimizer.line_search.rho0 = 32.0;

  const OptResult r = optimize<1>(sc, [](const IterateView& v) {
    std::cout << "iter " << v.iteration << "  J = " << v.record.J.total() << "  |grad| = " << v.record.grad_norm
              << std::endl;
    write_vtk("optimize_bay_" + std::to_string(v.iteration) + ".vtk", v.mesh,
              {point_scalar("sdf", v.sdf.w), point_vector("W", v.W)}, "iteration " + std::to_string(v.iteration));
  });
  const auto& rec = r.history.records;
  std::cout << to_string(r.history.status) << ": J " << rec.front().J.total() << " -> " << rec.back().J.total()
            << ", obstacle mirror distance " << mirror_hausdorff(r.mesh) << '\n';
}
