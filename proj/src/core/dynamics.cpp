#include "core/dynamics.hpp"

#include <cmath>

#include "core/error.hpp"

namespace fopdg {

void require_finite(const LanderState& x) {
  for (double c : x.to_array())
    if (!std::isfinite(c)) throw Error(ErrorCode::non_finite, "non-finite lander state");
}

void require_finite(const Costate& p) {
  for (double c : p.to_array())
    if (!std::isfinite(c)) throw Error(ErrorCode::non_finite, "non-finite costate");
}

namespace {

void require_domain(const LanderState& x) {
  if (x.r <= 0.0 || x.m <= 0.0)
    throw Error(ErrorCode::invalid_argument, "lander state outside domain (needs r > 0, m > 0)");
}

}  // namespace

Vec5 dynamics_rhs(const LanderState& x, const ThrustCommand& cmd, const EngineParams& eng) {
  require_finite(x);
  require_domain(x);
  if (!std::isfinite(cmd.u) || !std::isfinite(cmd.psi))
    throw Error(ErrorCode::non_finite, "non-finite thrust command");

  const double acc = cmd.u * eng.tm / x.m;  // thrust acceleration
  const double r2 = x.r * x.r;
  return {
      x.v,
      acc * std::sin(cmd.psi) - 1.0 / r2 + x.r * x.omega * x.omega,
      -x.omega,
      -(acc * std::cos(cmd.psi) + 2.0 * x.v * x.omega) / x.r,
      -cmd.u * eng.tm / eng.ve,
  };
}

Vec5 costate_rhs(const LanderState& x, const Costate& p, const ThrustCommand& cmd,
                 const EngineParams& eng) {
  require_finite(p);
  require_domain(x);

  const double acc = cmd.u * eng.tm / x.m;
  const double r2 = x.r * x.r;
  const double r3 = r2 * x.r;
  const double sp = std::sin(cmd.psi);
  const double cp = std::cos(cmd.psi);

  const double dp_r = -p.p_v * (2.0 / r3 + x.omega * x.omega) -
                      p.p_omega * (acc * cp + 2.0 * x.v * x.omega) / r2;
  const double dp_v = -p.p_r + 2.0 * p.p_omega * x.omega / x.r;
  const double dp_theta = 0.0;
  const double dp_omega =
      -2.0 * p.p_v * x.r * x.omega + p.p_theta + 2.0 * p.p_omega * x.v / x.r;
  const double dp_m = (cmd.u * eng.tm / (x.m * x.m)) * (p.p_v * sp - p.p_omega * cp / x.r);
  return {dp_r, dp_v, dp_theta, dp_omega, dp_m};
}

double hamiltonian(const LanderState& x, const Costate& p, const ThrustCommand& cmd,
                   const EngineParams& eng) {
  const Vec5 f = dynamics_rhs(x, cmd, eng);
  const Vec5 pa = p.to_array();
  double h = cmd.u;
  for (int i = 0; i < 5; ++i) h += pa[i] * f[i];
  return h;
}

double steering_norm(const LanderState& x, const Costate& p) {
  return std::hypot(p.p_v, p.p_omega / x.r);
}

double optimal_steering(const LanderState& x, const Costate& p) {
  const double a = -p.p_v;
  const double b = p.p_omega / x.r;
  if (a == 0.0 && b == 0.0)
    throw Error(ErrorCode::singular_steering, "steering undefined: p_v and p_omega/r both zero");
  return std::atan2(a, b);
}

double switching_function(const LanderState& x, const Costate& p, const EngineParams& eng) {
  return 1.0 - (eng.tm / x.m) * steering_norm(x, p) - p.p_m * eng.tm / eng.ve;
}

double bang_bang_u(double S) {
  if (std::isnan(S)) throw Error(ErrorCode::non_finite, "bang_bang_u: NaN switching value");
  return S <= 0.0 ? 1.0 : 0.0;
}

double smoothed_u(double S, double delta) {
  return 0.5 * (1.0 - S / std::sqrt(delta + S * S));
}

}  // namespace fopdg
