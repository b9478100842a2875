#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "core/config.hpp"
#include "core/dataset.hpp"
#include "core/dynamics.hpp"
#include "core/mlp.hpp"
#include "core/shooting.hpp"

namespace fopdg {

struct GuidanceModels {
  MlpModel n_tau;   // time of flight (reporting only)
  MlpModel n_psi;   // steering angle
  MlpModel n_sreg;  // regularized switching function
};

// One guidance update from the dimensionless flight state:
// psi from N_psi, thrust on when the N_sreg prediction is negative.
ThrustCommand guidance_step(const LanderState& x_bar, const GuidanceModels& models);

struct TraceRow {
  double t_s = 0, r_m = 0, v_mps = 0, theta_deg = 0, omega_radps = 0, m_kg = 0;
  double u = 0, psi_rad = 0;
};

struct LandingReport {
  bool success = false;
  std::string reason;  // landed, fuel_exhausted, horizon, guidance_fault, integrator_failure
  double vf_mps = 0;
  double theta_f_deg = 0;
  double e_p_m = 0;
  double fuel_kg = 0;
  double flight_time_s = 0;
  double tof_pred_s = 0;  // N_tau prediction at t=0
  bool in_distribution = true;
  std::vector<TraceRow> trace;
};

// Closed-loop descent from an SI initial state (r m, v m/s, theta rad,
// omega rad/s, m kg) under zero-order-hold neural guidance.
LandingReport simulate(const LanderState& x0_si, const GuidanceModels& models,
                       const PhysicalParams& phys, const SimParams& sc);

extern const char* const kTraceHeader;
std::string trace_csv(const std::vector<TraceRow>& trace);

// Shooting warm start assembled from the three networks' predictions at
// a dimensionless state: tf from N_tau, costate direction from N_psi,
// magnitude from inverting the switching relation on the N_sreg output
// (with p_m = 0), p_r closing H = 0.
ShootingUnknowns seed_from_models(const LanderState& x0_bar, const GuidanceModels& models,
                                  const EngineParams& eng, double alpha);

//
// Monte Carlo
//

struct McCase {
  std::size_t run = 0;
  std::size_t row_index = 0;
  std::uint32_t traj_id = 0;
  LandingReport report;  // trace cleared
  bool oracle_attempted = false;
  bool oracle_converged = false;
  double oracle_fuel_kg = 0;
  double oracle_tf_s = 0;
  double oracle_pm_tf = 0;
  double oracle_max_abs_H = 0;
  double fuel_penalty_kg = 0;  // neural fuel - oracle fuel
};

struct Histogram {
  double lo = 0, hi = 0;
  std::vector<std::size_t> counts;  // 40 bins
};

Histogram make_histogram(const std::vector<double>& values, int bins);

struct McAggregate {
  std::size_t n = 0;
  std::size_t n_success = 0;
  double success_rate = 0;
  double fuel_total_kg = 0;
  Histogram h_vf, h_theta, h_ep, h_penalty;
  std::size_t oracle_attempts = 0;
  std::size_t oracle_converged = 0;
  std::vector<McCase> cases;
};

// Initial conditions are dataset rows drawn uniformly with replacement.
// When with_oracle is set, each case also runs a shooting solve warm
// started from the row's generating trajectory.
McAggregate monte_carlo(std::size_t n, const std::vector<DatasetRow>& rows,
                        const std::map<std::uint32_t, TrajectorySeed>& seeds,
                        const GuidanceModels& models, const Config& cfg, bool with_oracle,
                        std::uint64_t seed);

nlohmann::json report_to_json(const LandingReport& rep);
nlohmann::json aggregate_to_json(const McAggregate& agg);
std::string histogram_csv(const Histogram& h);

}  // namespace fopdg
