#include "core/scaling.hpp"

#include <cmath>

namespace fopdg {

ScalingConstants make_scaling(const PhysicalParams& p) {
  ScalingConstants sc;
  sc.L_ref = p.R0;
  sc.V_ref = std::sqrt(p.mu / p.R0);
  sc.T_ref = p.R0 / sc.V_ref;  // = sqrt(R0^3 / mu)
  sc.M_ref = p.m0;
  sc.F_ref = p.m0 * p.mu / (p.R0 * p.R0);
  return sc;
}

EngineParams make_engine(const PhysicalParams& p) {
  const ScalingConstants sc = make_scaling(p);
  EngineParams eng;
  eng.tm = p.Tm / sc.F_ref;
  eng.ve = p.Isp * p.ge / sc.V_ref;
  eng.m_dry = p.m_dry / p.m0;
  return eng;
}

LanderState scale_state(const LanderState& si, const ScalingConstants& sc) {
  return {si.r / sc.L_ref, si.v / sc.V_ref, si.theta, si.omega * sc.T_ref, si.m / sc.M_ref};
}

LanderState unscale_state(const LanderState& bar, const ScalingConstants& sc) {
  return {bar.r * sc.L_ref, bar.v * sc.V_ref, bar.theta, bar.omega / sc.T_ref, bar.m * sc.M_ref};
}

}  // namespace fopdg
