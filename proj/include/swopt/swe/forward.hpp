#pragma once
/**
 * @file forward.hpp
 * @brief time marching of the state equations
 *
 * Advection and sources are explicit (forward Euler or SSPRK2). The SIPG
 * diffusion is linear in the free surface state and is taken backward-Euler
 * inside every stage, which removes the h^2 step restriction of the penalty
 * term while keeping the hyperbolic CFL step.
 */

#include "swopt/swe/implicit_viscous.hpp"
#include "swopt/swe/residual.hpp"
#include "swopt/swe/shock_sensor.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

namespace swopt {

/// all time levels of a forward run
template <int P>
struct Trajectory {
  std::vector<double> times;              ///< t_0 = 0 < ... < t_N = T
  std::vector<DGField<P, 3>> states;      ///< U at every level
  std::vector<std::vector<double>> eps_v; ///< shock viscosity used on step n (size N)

  std::size_t num_steps() const { return times.empty() ? 0 : times.size() - 1; }
  double dt(std::size_t n) const { return times[n + 1] - times[n]; }
};

struct TimeControl {
  double T = 2.5;
  double dt_max = 5e-3;
  TimeScheme scheme = TimeScheme::SSPRK2;
};

/**
 * @brief CFL step: cfl * min over cells of (smallest altitude / max nodal wave speed),
 *        capped by dt_max and by the remaining time
 */
template <int P>
double stable_dt(const DGField<P, 3>& U, const Mesh& mesh, const SWEParams& par, double dt_max,
                 double remaining = std::numeric_limits<double>::infinity()) {
  double dt = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    double smax = 0.0;
    const auto coeffs = U.cell(c);
    for (int i = 0; i < LagrangeBasis<P>::N; ++i) {
      const double H = coeffs(0, i);
      if (!(H > 0.0)) throw DomainError("stable_dt: nonpositive water height in cell " + std::to_string(c));
      const Vec2 u(coeffs(1, i) / H, coeffs(2, i) / H);
      smax = std::max(smax, u.norm() + std::sqrt(par.g * H));
    }
    if (smax > 0.0) dt = std::min(dt, par.cfl * mesh.geometry().min_height[c] / smax);
  }
  return std::min({dt, dt_max, remaining});
}

/// integral of H over the domain
template <int P>
double total_mass(const DGField<P, 3>& U, const Mesh& mesh) {
  double m = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) m += U.mean(c)[0] * mesh.geometry().area[c];
  return m;
}

/// integral of |Q|^2/(2H) + g H^2/2 + g H z
template <int P>
double total_energy(const DGField<P, 3>& U, const Mesh& mesh, const Bathymetry& b, double g) {
  const auto& ref = ReferenceElement<P>::instance();
  double e = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const double jac = 2.0 * mesh.geometry().area[c];
    for (std::size_t q = 0; q < ref.volume.size(); ++q) {
      const State u = U.cell(c) * ref.phi[q];
      const double z = b.at(mesh, int(c), ref.volume.points[q]);
      e += ref.volume.weights[q] * jac *
           (0.5 * u.tail<2>().squaredNorm() / u[0] + 0.5 * g * u[0] * u[0] + g * u[0] * z);
    }
  }
  return e;
}

/// rate -M^{-1} R(U)
template <int P>
DGField<P, 3> swe_rate(const SWEProblem& prob, const DGField<P, 3>& U, const std::vector<double>& eps_v) {
  DGField<P, 3> R;
  swe_residual<P>(prob, U, eps_v, R);
  DGField<P, 3> rate = apply_inverse_mass(R, *prob.mesh);
  rate *= -1.0;
  return rate;
}

namespace detail {

template <int P>
DGField<P, 3> mass_times(const DGField<P, 3>& U, const Mesh& mesh) {
  DGField<P, 3> out(U.num_cells());
  for (std::size_t c = 0; c < U.num_cells(); ++c) out.cell(c) = U.cell(c) * cell_mass<P>(mesh, int(c));
  return out;
}

} // namespace detail

/**
 * @brief one IMEX Euler stage: (M + dt A)(U' + Z) = M(U + Z) - dt R_adv(U)
 *
 * Z = (z, 0, 0) is the bed offset and A the SIPG operator; R_adv is the
 * residual without viscous terms.
 */
template <int P>
DGField<P, 3> imex_euler_stage(const SWEProblem& prob, const DGField<P, 3>& U, const std::vector<double>& eps_v,
                               double dt, const DGField<P, 3>& Z, ViscousSolver<P>& visc) {
  DGField<P, 3> R;
  swe_residual<P>(prob, U, eps_v, R, false);
  DGField<P, 3> Uhat = U;
  Uhat += Z;
  DGField<P, 3> b = detail::mass_times(Uhat, *prob.mesh);
  b.axpy(-dt, R);
  visc.solve(b, eps_v, dt);
  b.axpy(-1.0, Z);
  return b;
}

/// called after every accepted level (including t = 0)
template <int P>
using ForwardObserver = std::function<void(std::size_t level, double t, const DGField<P, 3>& U)>;

namespace detail {

template <int P>
void check_state(const DGField<P, 3>& U, double H_min, double t) {
  for (std::size_t c = 0; c < U.num_cells(); ++c) {
    const auto coeffs = U.cell(c);
    for (int i = 0; i < LagrangeBasis<P>::N; ++i) {
      for (int k = 0; k < 3; ++k)
        if (!std::isfinite(coeffs(k, i)))
          throw SolverError("non-finite state at t=" + std::to_string(t) + " in cell " + std::to_string(c));
      if (!(coeffs(0, i) > H_min))
        throw SolverError("positivity lost at t=" + std::to_string(t) + " in cell " + std::to_string(c) +
                          " (H=" + std::to_string(coeffs(0, i)) + ")");
    }
  }
}

} // namespace detail

/**
 * @brief march U0 to T
 *
 * Each step uses the CFL step of the current state (capped by dt_max and the
 * remaining time, so the last level is exactly T). The shock viscosity is
 * evaluated once per step from the state at its start. SSPRK2 averages U with
 * two consecutive IMEX Euler stages.
 */
template <int P>
Trajectory<P> solve_forward(const SWEProblem& prob, const DGField<P, 3>& U0, const TimeControl& tc,
                            const ForwardObserver<P>& observer = {}) {
  prob.params.validate();
  if (!(tc.T > 0.0) || !(tc.dt_max > 0.0)) throw ConfigError("time control: T and dt_max must be > 0");
  const Mesh& mesh = *prob.mesh;
  if (U0.num_cells() != mesh.num_cells()) throw DomainError("solve_forward: initial state does not match mesh");
  detail::check_state(U0, prob.params.H_min, 0.0);

  Trajectory<P> traj;
  traj.times.push_back(0.0);
  traj.states.push_back(U0);
  if (observer) observer(0, 0.0, U0);
  const DGField<P, 3> Z = surface_offset<P>(mesh, prob.bathymetry);
  ViscousSolver<P> visc(mesh, prob.params.eps_f, prob.params.C_IP);
  double t = 0.0;
  while (t < tc.T) {
    const DGField<P, 3>& U = traj.states.back();
    double dt = stable_dt(U, mesh, prob.params, tc.dt_max, tc.T - t);
    // avoid a sliver step at the end
    if (tc.T - t - dt < 1e-9 * dt) dt = tc.T - t;
    std::vector<double> eps = shock_viscosity<P>(U, prob.params.sensor);
    DGField<P, 3> next;
    try {
      next = imex_euler_stage<P>(prob, U, eps, dt, Z, visc);
      if (tc.scheme == TimeScheme::SSPRK2) {
        detail::check_state(next, prob.params.H_min, t + dt);
        DGField<P, 3> stage = imex_euler_stage<P>(prob, next, eps, dt, Z, visc);
        next = U;
        next *= 0.5;
        next.axpy(0.5, stage);
      }
    } catch (const DomainError& e) {
      throw SolverError(std::string("forward solve at t=") + std::to_string(t) + ": " + e.what());
    }
    const double tn = (tc.T - t - dt <= 0.0) ? tc.T : t + dt;
    detail::check_state(next, prob.params.H_min, tn);
    t = tn;
    traj.times.push_back(t);
    traj.states.push_back(std::move(next));
    traj.eps_v.push_back(std::move(eps));
    if (observer) observer(traj.states.size() - 1, t, traj.states.back());
  }
  return traj;
}

} // namespace swopt
