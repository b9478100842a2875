#pragma once

#include "core/config.hpp"
#include "core/dynamics.hpp"

namespace fopdg {

// Canonical reference quantities. Lengths scale by R0, velocities by the
// circular speed at R0, times by R0 / V_ref, masses by m0, forces by the
// surface gravity force on m0. The dimensionless gravitational parameter
// is then exactly 1.
struct ScalingConstants {
  double L_ref = 0.0;  // m
  double V_ref = 0.0;  // m/s
  double T_ref = 0.0;  // s
  double M_ref = 0.0;  // kg
  double F_ref = 0.0;  // N
};

ScalingConstants make_scaling(const PhysicalParams& p);

EngineParams make_engine(const PhysicalParams& p);

// SI <-> dimensionless maps. SI states carry r in m, v in m/s, theta in
// rad, omega in rad/s, m in kg.
LanderState scale_state(const LanderState& si, const ScalingConstants& sc);
LanderState unscale_state(const LanderState& bar, const ScalingConstants& sc);

inline double scale_time(double t_s, const ScalingConstants& sc) { return t_s / sc.T_ref; }
inline double unscale_time(double t_bar, const ScalingConstants& sc) { return t_bar * sc.T_ref; }

}  // namespace fopdg
