#pragma once
/**
 * @file params.hpp
 * @brief physical and numerical parameters of the shallow-water solver
 */

#include "swopt/common.hpp"

#include <string>

namespace swopt {

enum class FluxKind { LLF, HLLE };
enum class TimeScheme { ForwardEuler, SSPRK2 };

inline const char* to_string(FluxKind k) { return k == FluxKind::LLF ? "LLF" : "HLLE"; }
inline const char* to_string(TimeScheme s) { return s == TimeScheme::ForwardEuler ? "ForwardEuler" : "SSPRK2"; }

/// smoothness-indicator artificial viscosity (Persson-Peraire style)
struct ShockSensorParams {
  double s0 = -2.0;       ///< ramp center in log10 units
  double kappa = 1.0;     ///< ramp half-width
  double eps_v_max = 0.05;
};

struct SWEParams {
  double g = 9.81;
  double c_f = 0.049;               ///< Chezy-type bed friction coefficient
  Vec2 eps_f{0.01, 0.01};           ///< momentum diffusivities
  ShockSensorParams sensor;
  double C_IP = 20.0;
  double cfl = 0.3;
  FluxKind flux = FluxKind::LLF;
  bool well_balanced = true;
  double H_min = 1e-8;              ///< positivity guard

  void validate() const {
    if (!(g > 0.0)) throw ConfigError("swe.g: must be > 0");
    if (!(c_f >= 0.0)) throw ConfigError("swe.c_f: must be >= 0");
    if (!(eps_f.x() >= 0.0 && eps_f.y() >= 0.0)) throw ConfigError("swe.eps_f: components must be >= 0");
    if (!(C_IP > 0.0)) throw ConfigError("swe.C_IP: must be > 0");
    if (!(cfl > 0.0 && cfl <= 1.0)) throw ConfigError("swe.cfl: must satisfy 0 < cfl <= 1");
    if (!(sensor.kappa > 0.0)) throw ConfigError("swe.sensor.kappa: must be > 0");
    if (!(sensor.eps_v_max >= 0.0)) throw ConfigError("swe.sensor.eps_v_max: must be >= 0");
    if (!(H_min > 0.0)) throw ConfigError("swe.H_min: must be > 0");
  }
};

} // namespace swopt
