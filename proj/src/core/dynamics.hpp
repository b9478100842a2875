#pragma once

#include <array>

namespace fopdg {

// Planar lander state over a spherical body, dimensionless unless noted.
// r: radius, v: radial velocity, theta: downrange angle to the landing
// site, omega: angular velocity of the site line (theta' = -omega),
// m: mass.
struct LanderState {
  double r = 1.0;
  double v = 0.0;
  double theta = 0.0;
  double omega = 0.0;
  double m = 1.0;

  std::array<double, 5> to_array() const { return {r, v, theta, omega, m}; }
  static LanderState from_array(const std::array<double, 5>& a) {
    return {a[0], a[1], a[2], a[3], a[4]};
  }
};

struct Costate {
  double p_r = 0.0;
  double p_v = 0.0;
  double p_theta = 0.0;
  double p_omega = 0.0;
  double p_m = 0.0;

  std::array<double, 5> to_array() const { return {p_r, p_v, p_theta, p_omega, p_m}; }
  static Costate from_array(const std::array<double, 5>& a) {
    return {a[0], a[1], a[2], a[3], a[4]};
  }
};

// Throttle u in [0,1] and steering angle psi measured from the local
// horizontal (thrust direction opposing motion).
struct ThrustCommand {
  double u = 0.0;
  double psi = 0.0;
};

// Dimensionless engine constants.
struct EngineParams {
  double tm = 0.0;     // max thrust / reference force
  double ve = 0.0;     // exhaust velocity / reference velocity
  double m_dry = 0.0;  // dry mass / initial mass
};

using Vec5 = std::array<double, 5>;

// State equations of motion. Raises Error{non_finite} on non-finite input.
Vec5 dynamics_rhs(const LanderState& x, const ThrustCommand& cmd, const EngineParams& eng);

// Costate equations (gradient of the control Hamiltonian, negated).
Vec5 costate_rhs(const LanderState& x, const Costate& p, const ThrustCommand& cmd,
                 const EngineParams& eng);

// Control Hamiltonian for the fuel-optimal problem (running cost u).
double hamiltonian(const LanderState& x, const Costate& p, const ThrustCommand& cmd,
                   const EngineParams& eng);

// Hamiltonian-minimizing thrust angle. Raises Error{singular_steering}
// when p_v and p_omega/r both vanish.
double optimal_steering(const LanderState& x, const Costate& p);

// Thrust switching function; thrust is on where it is negative.
double switching_function(const LanderState& x, const Costate& p, const EngineParams& eng);

// Bang-bang throttle, full thrust on the S = 0 boundary.
double bang_bang_u(double S);

// Smoothed throttle used by the homotopy in the shooting solver.
double smoothed_u(double S, double delta);

// Magnitude of the primer-like vector (p_v, p_omega / r).
double steering_norm(const LanderState& x, const Costate& p);

void require_finite(const LanderState& x);
void require_finite(const Costate& p);

}  // namespace fopdg
