#pragma once
/**
 * @file physics.hpp
 * @brief pointwise shallow-water kernels: fluxes, Jacobians, wave speeds,
 *        approximate Riemann solvers, boundary ghost states and sources
 *
 * State U = (H, Q1, Q2) with H the water column height and Q = H u.
 */

#include "swopt/mesh/mesh.hpp"
#include "swopt/swe/params.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace swopt {

namespace detail {

inline void require_positive_height(const State& U, const char* who) {
  if (!(U[0] > 0.0)) throw DomainError(std::string(who) + ": nonpositive water height " + std::to_string(U[0]));
}

/// F(U) n from primitives; valid for H = 0
inline State normal_flux_primitive(double H, const Vec2& u, const Vec2& n, double g) {
  const double un = u.dot(n);
  const double p = 0.5 * g * H * H;
  return State(H * un, H * u.x() * un + p * n.x(), H * u.y() * un + p * n.y());
}

} // namespace detail

/// flux matrix F = [F1 F2], columns are the x and y fluxes
inline FluxMatrix physical_flux(const State& U, double g) {
  detail::require_positive_height(U, "physical_flux");
  const double H = U[0], Q1 = U[1], Q2 = U[2];
  const double p = 0.5 * g * H * H;
  FluxMatrix F;
  F << Q1, Q2,
       Q1 * Q1 / H + p, Q1 * Q2 / H,
       Q1 * Q2 / H, Q2 * Q2 / H + p;
  return F;
}

/// J1 = dF1/dU, J2 = dF2/dU
inline std::pair<Mat3, Mat3> flux_jacobians(const State& U, double g) {
  detail::require_positive_height(U, "flux_jacobians");
  const double H = U[0], u = U[1] / H, v = U[2] / H;
  Mat3 J1, J2;
  J1 << 0, 1, 0,
        -u * u + g * H, 2 * u, 0,
        -u * v, v, u;
  J2 << 0, 0, 1,
        -u * v, v, u,
        -v * v + g * H, 0, 2 * v;
  return {J1, J2};
}

/// eigenvalues of n1 J1 + n2 J2 in ascending order: u.n - c, u.n, u.n + c
inline Vec3 wave_speeds(const State& U, const Vec2& n, double g) {
  detail::require_positive_height(U, "wave_speeds");
  const double un = (U[1] * n.x() + U[2] * n.y()) / U[0];
  const double c = std::sqrt(g * U[0]);
  return Vec3(un - c, un, un + c);
}

/**
 * @brief approximate Riemann flux from primitive traces (H may be 0)
 *
 * Hp, up is the interior trace, n points out of the interior.
 */
inline State riemann_flux_primitive(double Hp, const Vec2& up, double Hm, const Vec2& um, const Vec2& n,
                                    double g, FluxKind kind) {
  const State Fp = detail::normal_flux_primitive(Hp, up, n, g);
  const State Fm = detail::normal_flux_primitive(Hm, um, n, g);
  const State Up(Hp, Hp * up.x(), Hp * up.y());
  const State Um(Hm, Hm * um.x(), Hm * um.y());
  const double cp = std::sqrt(g * Hp), cm = std::sqrt(g * Hm);
  const double unp = up.dot(n), unm = um.dot(n);
  if (kind == FluxKind::LLF) {
    const double alpha = std::max(std::abs(unp) + cp, std::abs(unm) + cm);
    return 0.5 * (Fp + Fm + alpha * (Up - Um));
  }
  const double amax = std::max(unp + cp, unm + cm);
  const double amin = std::min(unp - cp, unm - cm);
  const double lp = std::max(amax, 0.0), lm = std::min(amin, 0.0);
  if (lp - lm <= 0.0) return 0.5 * (Fp + Fm);
  return (lp * Fp - lm * Fm - lp * lm * (Up - Um)) / (lp - lm);
}

/// LLF or HLLE flux; U_plus is the trace on the side n points away from
inline State numerical_flux(const State& U_plus, const State& U_minus, const Vec2& n, double g,
                            FluxKind kind) {
  detail::require_positive_height(U_plus, "numerical_flux");
  detail::require_positive_height(U_minus, "numerical_flux");
  return riemann_flux_primitive(U_plus[0], U_plus.tail<2>() / U_plus[0], U_minus[0],
                                U_minus.tail<2>() / U_minus[0], n, g, kind);
}

inline State numerical_flux(const State& U_plus, const State& U_minus, const Vec2& n, const SWEParams& p) {
  return numerical_flux(U_plus, U_minus, n, p.g, p.flux);
}

/**
 * @brief ghost state behind a boundary face
 *
 * Shore and Obstacle are rigid walls (normal discharge mirrored); OpenSea
 * prescribes the height H1 and copies the discharge.
 */
inline State boundary_state(const State& U, const Vec2& n, BoundaryTag tag, double H1) {
  detail::require_positive_height(U, "boundary_state");
  if (tag == BoundaryTag::OpenSea) {
    if (!(H1 > 0.0)) throw DomainError("boundary_state: open-sea height must be > 0");
    return State(H1, U[1], U[2]);
  }
  const Vec2 Q = U.tail<2>();
  const Vec2 Qg = Q - 2.0 * Q.dot(n) * n;
  return State(U[0], Qg.x(), Qg.y());
}

/// bed slope and Chezy friction: (0, -g H z_x - c_f u |u|, -g H z_y - c_f v |u|)
inline State source_term(const State& U, const Vec2& grad_z, double g, double c_f) {
  detail::require_positive_height(U, "source_term");
  const double H = U[0];
  const Vec2 u = U.tail<2>() / H;
  const double speed = u.norm();
  return State(0.0, -g * H * grad_z.x() - c_f * u.x() * speed, -g * H * grad_z.y() - c_f * u.y() * speed);
}

inline State source_term(const State& U, const Vec2& grad_z, const SWEParams& p) {
  return source_term(U, grad_z, p.g, p.c_f);
}

} // namespace swopt
