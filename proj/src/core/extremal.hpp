#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/dynamics.hpp"

namespace fopdg {

// Initial touchdown costates that parameterize one extremal.
struct Quadruple {
  double p_r0 = 0.0;
  double p_v0 = 0.0;
  double p_theta0 = 0.0;
  double p_omega0 = 0.0;
};

// One sampled point along an extremal or a switched forward run.
struct ExtremalRecord {
  double tau = 0.0;  // backward time for extremals, forward time otherwise
  LanderState x;
  Costate p;
  double u = 0.0;
  double psi = 0.0;
  double S = 0.0;
  double S_reg = 0.0;
  bool is_switch = false;
};

// Touchdown mass consistent with a free final time (zero Hamiltonian at
// the surface with zero mass costate).
double m_bar0_from(double p_v0, double p_omega0, double tm);

// Switching-function regularization: maps raw S to (-1, 1).
inline double regularize(double S, double alpha) { return std::tanh(S / alpha); }

// Forward-time thrust sequence label for a trajectory with n switches
// before touchdown, e.g. 0 -> "on", 2 -> "on-off-on".
std::string classify_label(std::size_t n_switches);

//
// switched propagation core
//

// Integrates the stacked (state, costate) system with bang-bang thrust,
// locating switching-function zero crossings and restarting across them.
// With backward = true the system is propagated against physical time
// (touchdown conditions evolve toward flight conditions).
struct SwitchedSpec {
  double s_end = 0.9;
  double grid_dt = 0.0;  // 0 = record only switches
  bool backward = false;
  bool stop_on_escape = false;
  double r_escape = 1.1;
  bool reject_r_floor = false;
  bool reject_mass_bounds = false;
  double switch_tol = 1e-10;
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double alpha = 0.01;
};

enum class RunEnd { horizon, escape, r_floor, mass_bound };

struct SwitchedRun {
  std::vector<ExtremalRecord> records;
  std::vector<double> switch_s;
  double s_final = 0.0;
  RunEnd end = RunEnd::horizon;
  LanderState x_final;
  Costate p_final;
  double u_final = 0.0;
};

SwitchedRun run_switched(const LanderState& x0, const Costate& p0, const EngineParams& eng,
                         const SwitchedSpec& spec);

//
// extremal generation
//

enum class EndReason { horizon, escape };
enum class RejectReason { subsurface, mass_bound };

struct ExtremalTrajectory {
  Quadruple quadruple;
  double m_bar0 = 0.0;
  std::vector<ExtremalRecord> records;
  std::vector<double> switch_taus;
  double tau_end = 0.0;
  EndReason end_reason = EndReason::horizon;

  std::size_t n_switches() const { return switch_taus.size(); }
  std::string label() const { return classify_label(n_switches()); }
};

struct PropagationResult {
  std::optional<ExtremalTrajectory> trajectory;
  RejectReason reason = RejectReason::subsurface;
  double reject_tau = 0.0;

  bool accepted() const { return trajectory.has_value(); }
};

struct PropagateOptions {
  GenParams gen;
  bool enforce_r_floor = true;
  bool enforce_mass_bounds = true;
};

// Backward-propagate the extremal defined by quadruple q from touchdown.
PropagationResult propagate_extremal(const Quadruple& q, const EngineParams& eng,
                                     const PropagateOptions& opt);

// Draw quadruples uniformly from the sampling box, keeping those whose
// touchdown mass lies in [m_dry, 1]. Raises Error{sampling_exhausted} if
// the yield is hopeless.
std::vector<Quadruple> sample_quadruples(std::size_t n, const SamplingBox& box,
                                         const EngineParams& eng, std::uint64_t seed);

}  // namespace fopdg
