#pragma once
/**
 * @file shock_sensor.hpp
 * @brief per-cell artificial viscosity from the decay of the non-constant
 *        part of the water height
 */

#include "swopt/dg/field.hpp"
#include "swopt/swe/params.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace swopt {

/// smooth ramp: 0 below s0 - kappa, eps_max above s0 + kappa, sine in between
inline double viscosity_ramp(double s, const ShockSensorParams& p) {
  if (s < p.s0 - p.kappa) return 0.0;
  if (s > p.s0 + p.kappa) return p.eps_v_max;
  return 0.5 * p.eps_v_max * (1.0 + std::sin(0.5 * std::numbers::pi * (s - p.s0) / p.kappa));
}

/// s = log10(||H - mean(H)||^2 / ||H||^2) on one cell; -inf for a constant cell
template <int P>
double sensor_value(const typename DGField<P, 3>::ConstCellMap& coeffs) {
  const auto& ref = ReferenceElement<P>::instance();
  double mean = 0.0, sq = 0.0;
  for (std::size_t q = 0; q < ref.volume.size(); ++q) {
    const double h = coeffs.row(0).dot(ref.phi[q].transpose());
    mean += ref.volume.weights[q] * h;
    sq += ref.volume.weights[q] * h * h;
  }
  mean *= 2.0;
  double var = 0.0;
  for (std::size_t q = 0; q < ref.volume.size(); ++q) {
    const double h = coeffs.row(0).dot(ref.phi[q].transpose()) - mean;
    var += ref.volume.weights[q] * h * h;
  }
  if (var <= 0.0 || sq <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log10(var / sq);
}

template <int P>
std::vector<double> shock_viscosity(const DGField<P, 3>& U, const ShockSensorParams& p) {
  std::vector<double> eps(U.num_cells(), 0.0);
  if (p.eps_v_max <= 0.0) return eps;
  for (std::size_t c = 0; c < U.num_cells(); ++c) eps[c] = viscosity_ramp(sensor_value<P>(U.cell(c)), p);
  return eps;
}

} // namespace swopt
