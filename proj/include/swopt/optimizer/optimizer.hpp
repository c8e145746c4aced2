#pragma once
/**
 * @file optimizer.hpp
 * @brief steepest descent in the elasticity metric with a backtracking line search
 *
 * One iteration: signed distance, state, adjoint, assembled derivative,
 * elasticity solve for W, then a step along -W. Bathymetry and initial state
 * are vertex/cell data and move with the mesh.
 */

#include "swopt/geometry/eikonal.hpp"
#include "swopt/shape/elasticity.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>

namespace swopt {

struct LineSearchParams {
  double rho0 = 1.0;
  double shrink = 0.5;
  int max_halvings = 20;

  void validate() const {
    if (!(rho0 > 0.0)) throw ConfigError("line_search.rho0: must be > 0");
    if (!(shrink > 0.0 && shrink < 1.0)) throw ConfigError("line_search.shrink: must satisfy 0 < shrink < 1");
    if (max_halvings < 0) throw ConfigError("line_search.max_halvings: must be >= 0");
  }
};

struct LineSearchResult {
  bool accepted = false;
  double step = 0.0;
  int halvings = 0;         ///< index k of the accepted step rho0 * shrink^k
  double objective = 0.0;   ///< value at the accepted mesh
  std::optional<Mesh> mesh; ///< accepted mesh
  int invalid_trials = 0;

  explicit operator bool() const { return accepted; }
};

using MeshObjective = std::function<double(const Mesh&)>;

/**
 * @brief largest rho in {rho0 shrink^k} with a valid mesh + rho D and a strictly lower objective
 *
 * D is the displacement direction (the negative gradient for descent).
 */
inline LineSearchResult line_search(const Mesh& mesh, const VertexField2& D, double current,
                                    const MeshObjective& objective, const LineSearchParams& p = {}) {
  p.validate();
  if (D.size() != mesh.num_vertices()) throw DomainError("line_search: direction size mismatch");
  for (const auto& d : D)
    if (!d.allFinite()) throw DomainError("line_search: non-finite direction");
  LineSearchResult r;
  double rho = p.rho0;
  for (int k = 0; k <= p.max_halvings; ++k, rho *= p.shrink) {
    Mesh trial = apply_deformation(mesh, D, rho);
    if (!validate_deformed(trial)) {
      ++r.invalid_trials;
      continue;
    }
    const double J = objective(trial);
    if (J < current) {
      r.accepted = true;
      r.step = rho;
      r.halvings = k;
      r.objective = J;
      r.mesh = std::move(trial);
      return r;
    }
  }
  return r;
}

struct ObjectiveBreakdown {
  double J1 = 0.0, J2 = 0.0, J3 = 0.0, J4 = 0.0;
  double total() const { return J1 + J2 + J3 + J4; }
};

struct OptimizerParams {
  double eps_stop = 1e-4; ///< in the elasticity-energy norm
  int max_iters = 200;
  LineSearchParams line_search;

  void validate() const {
    if (!(eps_stop >= 0.0)) throw ConfigError("optimizer.eps_stop: must be >= 0");
    if (max_iters < 0) throw ConfigError("optimizer.max_iters: must be >= 0");
    line_search.validate();
  }
};

/// everything the loop needs; mesh is the initial shape
template <int P>
struct Scenario {
  Mesh mesh;
  SWEParams swe;
  Bathymetry bathymetry;
  double open_sea_level = 1.0;
  DGField<P, 3> U0;
  TimeControl time;
  ObjectiveWeights weights;
  PenaltyParams penalties;
  ElasticityParams elasticity;
  OptimizerParams optimizer;

  explicit Scenario(Mesh m) : mesh(std::move(m)) {}

  SWEProblem problem(const Mesh& m) const {
    SWEProblem p;
    p.mesh = &m;
    p.params = swe;
    p.bathymetry = bathymetry;
    p.open_sea_level = open_sea_level;
    return p;
  }

  void validate() const {
    swe.validate();
    weights.validate();
    penalties.validate();
    elasticity.validate();
    optimizer.validate();
    if (bathymetry.z.size() != mesh.num_vertices()) throw ConfigError("scenario: bathymetry does not match mesh");
    if (U0.num_cells() != mesh.num_cells()) throw ConfigError("scenario: initial state does not match mesh");
  }
};

/// one row per iteration; step is the step taken from this mesh (0 on the last row)
struct OptRecord {
  int iteration = 0;
  ObjectiveBreakdown J;
  double grad_norm = 0.0;
  double step = 0.0;
  int halvings = 0;
  bool mesh_valid = true;
  double min_area = 0.0;
};

enum class OptStatus { Converged, MaxIterations, LineSearchFailed };

inline const char* to_string(OptStatus s) {
  switch (s) {
    case OptStatus::Converged: return "converged";
    case OptStatus::MaxIterations: return "max_iterations";
    case OptStatus::LineSearchFailed: return "line_search_failed";
  }
  return "?";
}

struct OptHistory {
  std::vector<OptRecord> records;
  OptStatus status = OptStatus::MaxIterations;

  /// totals of successive records strictly decrease
  bool monotone() const {
    for (std::size_t i = 1; i < records.size(); ++i)
      if (!(records[i].J.total() < records[i - 1].J.total())) return false;
    return true;
  }

  void write_csv(std::ostream& out) const {
    out << "# swopt optimization history v1\n";
    out << "iteration,J_total,J1,J2,J3,J4,grad_norm,step\n";
    out.precision(17);
    for (const auto& r : records)
      out << r.iteration << ',' << r.J.total() << ',' << r.J.J1 << ',' << r.J.J2 << ',' << r.J.J3 << ','
          << r.J.J4 << ',' << r.grad_norm << ',' << r.step << '\n';
  }
};

/// state at one iterate, handed to the observer before the line search
struct IterateView {
  int iteration;
  const Mesh& mesh;
  const SignedDistance& sdf;
  const VertexField2& W;
  const OptRecord& record;
};

struct OptResult {
  OptHistory history;
  Mesh mesh;
};

/**
 * @brief Hausdorff distance between the obstacle polylines and their reflection about x = axis
 *
 * Vertex-to-segment distances in both directions.
 */
inline double mirror_hausdorff(const Mesh& mesh, double axis = 0.0) {
  const std::vector<int> faces = mesh.faces_with_tag(BoundaryTag::Obstacle);
  auto reflect = [axis](const Point& p) { return Point(2 * axis - p.x(), p.y()); };
  auto seg = [](const Point& p, const Point& a, const Point& b) {
    const Vec2 ab = b - a;
    const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    return (p - (a + t * ab)).norm();
  };
  double h = 0.0;
  for (int mirrored = 0; mirrored < 2; ++mirrored)
    for (int f : faces)
      for (int v : mesh.face(f).v) {
        const Point p = mirrored ? reflect(mesh.vertex(v)) : mesh.vertex(v);
        double d = std::numeric_limits<double>::infinity();
        for (int g : faces) {
          const Point a = mesh.vertex(mesh.face(g).v[0]), b = mesh.vertex(mesh.face(g).v[1]);
          d = std::min(d, mirrored ? seg(p, a, b) : seg(p, reflect(a), reflect(b)));
        }
        h = std::max(h, d);
      }
  return h;
}

template <int P>
ObjectiveBreakdown evaluate_objective(const Scenario<P>& sc, const Mesh& m, Trajectory<P>* traj_out = nullptr) {
  const SWEProblem prob = sc.problem(m);
  Trajectory<P> traj = solve_forward<P>(prob, sc.U0, sc.time);
  const PenaltyValues pv = penalties(m, sc.penalties);
  ObjectiveBreakdown J{objective_J1<P>(prob, traj, sc.weights), pv.J2, pv.J3, pv.J4};
  if (traj_out) *traj_out = std::move(traj);
  return J;
}

template <int P>
OptResult optimize(const Scenario<P>& sc, const std::function<void(const IterateView&)>& observer = {}) {
  sc.validate();
  const auto& op = sc.optimizer;
  OptResult res{{}, sc.mesh};
  Trajectory<P> traj;
  ObjectiveBreakdown J = evaluate_objective<P>(sc, res.mesh, &traj);
  for (int k = 0;; ++k) {
    const Mesh& m = res.mesh;
    const SignedDistance sdf = eikonal_solve(m);
    const SWEProblem prob = sc.problem(m);
    const auto adj = solve_adjoint<P>(prob, traj, sc.weights);
    const GradientAssembly a = total_derivative(m, dj1_covector<P>(prob, traj, adj), sc.penalties);
    const VertexField2 W = solve_elasticity(m, a, lame_field(m, sc.elasticity.mu_min, sc.elasticity.mu_max),
                                            sc.elasticity.lambda);
    OptRecord rec;
    rec.iteration = k;
    rec.J = J;
    rec.grad_norm = gradient_norm(a, W);
    const ValidityReport vr = validate_deformed(m);
    rec.mesh_valid = vr.valid;
    rec.min_area = vr.min_area;
    if (observer) observer(IterateView{k, m, sdf, W, rec});
    if (rec.grad_norm <= op.eps_stop || k >= op.max_iters) {
      res.history.status = rec.grad_norm <= op.eps_stop ? OptStatus::Converged : OptStatus::MaxIterations;
      res.history.records.push_back(rec);
      break;
    }
    VertexField2 D(W.size());
    for (std::size_t i = 0; i < W.size(); ++i) D[i] = -W[i];
    // the accepted trial is the last one evaluated, so its trajectory is kept
    ObjectiveBreakdown last;
    Trajectory<P> last_traj;
    auto eval = [&](const Mesh& trial) {
      last = evaluate_objective<P>(sc, trial, &last_traj);
      return last.total();
    };
    LineSearchResult ls = line_search(m, D, J.total(), eval, op.line_search);
    if (!ls) {
      res.history.status = OptStatus::LineSearchFailed;
      res.history.records.push_back(rec);
      break;
    }
    rec.step = ls.step;
    rec.halvings = ls.halvings;
    res.history.records.push_back(rec);
    res.mesh = std::move(*ls.mesh);
    J = last;
    traj = std::move(last_traj);
  }
  return res;
}

} // namespace swopt
