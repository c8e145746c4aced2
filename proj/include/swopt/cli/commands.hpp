#pragma once
/**
 * @file commands.hpp
 * @brief forward, gradcheck and optimize entry points behind the swopt tool
 *
 * Every command writes only below the configured output directory, starting
 * with the effective config (config.json) that reproduces the run.
 */

#include "swopt/cli/config.hpp"
#include "swopt/mesh/vtk_writer.hpp"

#include <cstdio>
#include <iostream>
#include <optional>
#include <random>

namespace swopt {

/// command-line overrides of config values
struct RunFlags {
  std::optional<std::string> out;
  std::optional<int> threads;
  std::optional<int> snapshot_stride;
  std::optional<int> max_iters;
  std::optional<unsigned> seed;
};

inline ScenarioConfig apply_flags(ScenarioConfig c, const RunFlags& f) {
  if (f.out) c.output_dir = std::filesystem::absolute(*f.out).lexically_normal().string();
  if (f.threads) c.threads = *f.threads;
  if (f.snapshot_stride) c.snapshot_stride = *f.snapshot_stride;
  if (f.max_iters) c.optimizer.max_iters = *f.max_iters;
  if (f.seed) c.seed = *f.seed;
  c.validate();
  return c;
}

namespace detail {

inline std::filesystem::path prepare_output(const ScenarioConfig& c) {
  const std::filesystem::path dir(c.output_dir);
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "config.json");
  out << to_json(c).dump(2) << '\n';
  if (!out) throw Error("cannot write " + (dir / "config.json").string());
  Eigen::setNbThreads(c.threads);
  return dir;
}

inline std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw Error("cannot write " + p.string());
  out.precision(17);
  return out;
}

inline std::string numbered(const char* stem, long i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%06ld.%s", stem, i, ext);
  return buf;
}

template <typename F>
decltype(auto) with_order(int order, F&& f) {
  if (order == 2) return f(std::integral_constant<int, 2>{});
  return f(std::integral_constant<int, 1>{});
}

/// message on stderr and exit code 1 for library errors
template <typename F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    std::cerr << "swopt: " << e.what() << '\n';
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "swopt: " << e.what() << '\n';
  }
  return 1;
}

template <int P>
std::vector<VtkField> state_fields(const Mesh& mesh, const DGField<P, 3>& U, const Bathymetry& b) {
  const auto Uv = dg_to_cg(U, mesh);
  std::vector<double> H, surface;
  std::vector<Vec2> vel;
  for (std::size_t v = 0; v < Uv.size(); ++v) {
    H.push_back(Uv[v][0]);
    surface.push_back(Uv[v][0] + b.z[v]);
    vel.push_back(Vec2(Uv[v][1], Uv[v][2]) / Uv[v][0]);
  }
  return {point_scalar("H", H), point_scalar("surface", surface), point_vector("velocity", vel),
          point_scalar("bathymetry", b.z)};
}

} // namespace detail

template <int P>
int run_forward(const ScenarioConfig& c, std::ostream& log) {
  const auto dir = detail::prepare_output(c);
  const Scenario<P> sc = build_scenario<P>(c);
  const SWEProblem prob = sc.problem(sc.mesh);
  const Trajectory<P> traj = solve_forward<P>(prob, sc.U0, sc.time);
  const DGField<P, 3> Z = surface_offset<P>(sc.mesh, sc.bathymetry);

  auto csv = detail::open_output(dir / "diagnostics.csv");
  csv << "# swopt forward diagnostics v1\n";
  csv << "step,t,dt,mass,mass_drift,surface_min,surface_max,max_eps_v\n";
  const double m0 = total_mass(traj.states.front(), sc.mesh);
  const std::size_t N = traj.num_steps();
  for (std::size_t n = 0; n <= N; ++n) {
    DGField<P, 3> S = traj.states[n];
    S += Z;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t c2 = 0; c2 < sc.mesh.num_cells(); ++c2) {
      lo = std::min(lo, S.cell(c2).row(0).minCoeff());
      hi = std::max(hi, S.cell(c2).row(0).maxCoeff());
    }
    const double m = total_mass(traj.states[n], sc.mesh);
    double eps = 0.0;
    if (n > 0)
      for (double e : traj.eps_v[n - 1]) eps = std::max(eps, e);
    csv << n << ',' << traj.times[n] << ',' << (n ? traj.dt(n - 1) : 0.0) << ',' << m << ',' << (m - m0) / m0 << ','
        << lo << ',' << hi << ',' << eps << '\n';
    const bool snap = n == 0 || n == N || (c.snapshot_stride > 0 && n % std::size_t(c.snapshot_stride) == 0);
    if (snap) {
      auto fields = detail::state_fields<P>(sc.mesh, traj.states[n], sc.bathymetry);
      fields.push_back(cell_scalar("eps_v", n ? traj.eps_v[n - 1] : std::vector<double>(sc.mesh.num_cells(), 0.0)));
      write_vtk(dir / detail::numbered("state", long(n), "vtk"), sc.mesh, fields, "t=" + std::to_string(traj.times[n]));
    }
  }
  log << "forward: " << N << " steps to T=" << traj.times.back() << ", relative mass drift "
      << (total_mass(traj.states.back(), sc.mesh) - m0) / m0 << '\n';
  return 0;
}

/**
 * @brief random fields supported on the obstacle vertices, scaled to max |V| = 1
 *
 * Each component is a quadratic in xi = (x - centroid) / radius with standard
 * normal coefficients, so area and perimeter change at first order.
 */
inline std::vector<VertexField2> random_obstacle_fields(const Mesh& mesh, int n, unsigned seed) {
  std::vector<int> verts;
  Point c = Point::Zero();
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
    if (mesh.on_obstacle(int(v))) {
      verts.push_back(int(v));
      c += mesh.vertex(int(v));
    }
  if (verts.empty()) throw DomainError("random_obstacle_fields: mesh has no obstacle");
  c /= double(verts.size());
  double L = 0.0;
  for (int v : verts) L = std::max(L, (mesh.vertex(v) - c).norm());
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<VertexField2> out;
  for (int i = 0; i < n; ++i) {
    Eigen::Matrix<double, 2, 6> A;
    for (int k = 0; k < 12; ++k) A(k % 2, k / 2) = nd(rng);
    VertexField2 V(mesh.num_vertices(), Vec2::Zero());
    double vmax = 0.0;
    for (int v : verts) {
      const Vec2 xi = (mesh.vertex(v) - c) / L;
      Eigen::Matrix<double, 6, 1> basis;
      basis << 1.0, xi.x(), xi.y(), xi.x() * xi.x(), xi.x() * xi.y(), xi.y() * xi.y();
      V[v] = A * basis;
      vmax = std::max(vmax, V[v].norm());
    }
    for (auto& x : V) x /= vmax;
    out.push_back(std::move(V));
  }
  return out;
}

struct GradcheckRow {
  std::string term; ///< J1, J2, J3, J4 or total
  int field = 0;
  double dj = 0.0, fd = 0.0;

  double rel_err() const {
    if (fd == 0.0) return dj == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::abs(dj - fd) / std::abs(fd);
  }
};

/**
 * @brief DJ[V] against central differences for every active term and the total
 *
 * J1 is active when any weight C is nonzero, J2..J4 when their nu is.
 */
template <int P>
std::vector<GradcheckRow> gradient_check(const Scenario<P>& sc, const GradcheckSpec& spec, unsigned seed) {
  sc.validate();
  const Mesh& m = sc.mesh;
  const bool track = sc.weights.C.maxCoeff() > 0.0;
  const auto& pen = sc.penalties;
  VertexField2 dj1;
  if (track) {
    const SWEProblem prob = sc.problem(m);
    const auto fwd = solve_forward<P>(prob, sc.U0, sc.time);
    const auto adj = solve_adjoint<P>(prob, fwd, sc.weights);
    dj1 = dj1_covector<P>(prob, fwd, adj, spec.form);
  }
  const PenaltyGradients pg = penalty_gradients(m, pen);
  const GradientAssembly total = total_derivative(m, dj1, pen);
  auto values = [&](const Mesh& mm) {
    ObjectiveBreakdown J;
    if (track) {
      const SWEProblem prob = sc.problem(mm);
      J.J1 = objective_J1<P>(prob, solve_forward<P>(prob, sc.U0, sc.time), sc.weights);
    }
    const PenaltyValues pv = penalties(mm, pen);
    J.J2 = pv.J2;
    J.J3 = pv.J3;
    J.J4 = pv.J4;
    return J;
  };
  std::vector<GradcheckRow> rows;
  const double s = spec.fd_step;
  const auto fields = random_obstacle_fields(m, spec.fields, seed);
  for (int i = 0; i < int(fields.size()); ++i) {
    const VertexField2& V = fields[i];
    const Mesh mp = apply_deformation(m, V, s), mm = apply_deformation(m, V, -s);
    if (!validate_deformed(mp) || !validate_deformed(mm)) throw DomainError("gradcheck: fd_step inverts the mesh");
    const ObjectiveBreakdown Jp = values(mp), Jm = values(mm);
    auto fd = [&](double ObjectiveBreakdown::*t) { return (Jp.*t - Jm.*t) / (2 * s); };
    if (track) rows.push_back({"J1", i, apply_covector(dj1, V), fd(&ObjectiveBreakdown::J1)});
    if (pen.nu1 > 0.0) rows.push_back({"J2", i, apply_covector(pg.dJ2, V), fd(&ObjectiveBreakdown::J2)});
    if (pen.nu2 > 0.0) rows.push_back({"J3", i, apply_covector(pg.dJ3, V), fd(&ObjectiveBreakdown::J3)});
    if (pen.nu3 > 0.0) rows.push_back({"J4", i, apply_covector(pg.dJ4, V), fd(&ObjectiveBreakdown::J4)});
    rows.push_back({"total", i, total.apply(V), (Jp.total() - Jm.total()) / (2 * s)});
  }
  return rows;
}

template <int P>
int run_gradcheck(const ScenarioConfig& c, std::ostream& log) {
  const auto dir = detail::prepare_output(c);
  const auto rows = gradient_check<P>(build_scenario<P>(c), c.gradcheck, c.seed);
  auto csv = detail::open_output(dir / "gradcheck.csv");
  csv << "# swopt gradcheck v1\n";
  csv << "term,field,DJ,FD,rel_err\n";
  for (const auto& r : rows) {
    csv << r.term << ',' << r.field << ',' << r.dj << ',' << r.fd << ',' << r.rel_err() << '\n';
    log << r.term << " field " << r.field << ": DJ " << r.dj << " FD " << r.fd << " rel " << r.rel_err() << '\n';
  }
  return 0;
}

template <int P>
int run_optimize(const ScenarioConfig& c, std::ostream& log) {
  const auto dir = detail::prepare_output(c);
  const Scenario<P> sc = build_scenario<P>(c);
  auto observer = [&](const IterateView& v) {
    log << "iter " << v.iteration << ": J " << v.record.J.total() << " |grad| " << v.record.grad_norm << std::endl;
    if (v.iteration == 0 || (c.snapshot_stride > 0 && v.iteration % c.snapshot_stride == 0)) {
      const auto mu = lame_field(v.mesh, c.elasticity.mu_min, c.elasticity.mu_max);
      write_vtk(dir / detail::numbered("mesh", v.iteration, "vtk"), v.mesh,
                {point_scalar("sdf", v.sdf.w), point_vector("W", v.W), point_scalar("mu", mu)},
                "iteration " + std::to_string(v.iteration));
    }
  };
  const OptResult res = optimize<P>(sc, observer);
  {
    auto csv = detail::open_output(dir / "history.csv");
    res.history.write_csv(csv);
  }
  save_msh(dir / "final.msh", res.mesh);
  write_vtk(dir / "final.vtk", res.mesh, {}, "final");
  const auto& rec = res.history.records;
  json summary = {{"status", to_string(res.history.status)},
                  {"iterations", rec.back().iteration},
                  {"J_initial", rec.front().J.total()},
                  {"J_final", rec.back().J.total()},
                  {"ratio", rec.back().J.total() / rec.front().J.total()},
                  {"grad_norm_final", rec.back().grad_norm},
                  {"monotone", res.history.monotone()},
                  {"obstacle_mirror_distance", mirror_hausdorff(res.mesh)}};
  auto out = detail::open_output(dir / "summary.json");
  out << summary.dump(2) << '\n';
  log << "optimize: " << to_string(res.history.status) << " after " << rec.back().iteration << " iterations, J "
      << rec.front().J.total() << " -> " << rec.back().J.total() << '\n';
  return 0;
}

inline int cmd_forward(const std::filesystem::path& config, const RunFlags& flags, std::ostream& log = std::cout) {
  return detail::guarded([&] {
    const ScenarioConfig c = apply_flags(load_config(config), flags);
    return detail::with_order(c.order, [&](auto p) { return run_forward<decltype(p)::value>(c, log); });
  });
}

inline int cmd_gradcheck(const std::filesystem::path& config, const RunFlags& flags, std::ostream& log = std::cout) {
  return detail::guarded([&] {
    const ScenarioConfig c = apply_flags(load_config(config), flags);
    return detail::with_order(c.order, [&](auto p) { return run_gradcheck<decltype(p)::value>(c, log); });
  });
}

inline int cmd_optimize(const std::filesystem::path& config, const RunFlags& flags, std::ostream& log = std::cout) {
  return detail::guarded([&] {
    const ScenarioConfig c = apply_flags(load_config(config), flags);
    return detail::with_order(c.order, [&](auto p) { return run_optimize<decltype(p)::value>(c, log); });
  });
}

} // namespace swopt
