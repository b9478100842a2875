#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace fopdg {

// Vehicle and environment constants, SI units.
struct PhysicalParams {
  double R0 = 1.738e6;     // body radius, m
  double mu = 4.90275e12;  // gravitational parameter, m^3/s^2
  double Isp = 300.0;      // specific impulse, s
  double ge = 9.81;        // reference gravity for Isp, m/s^2
  double Tm = 1500.0;      // max thrust, N
  double m0 = 600.0;       // initial (wet) mass, kg
  double m_dry = 250.0;    // dry mass, kg
};

// Costate sampling box for trajectory generation.
struct SamplingBox {
  double pr_min = 0.489, pr_max = 0.839;
  double pv_min = -0.317, pv_max = -0.107;
  double ptheta_min = -0.1, ptheta_max = 0.1;
  double pomega_min = 0.297, pomega_max = 0.427;
};

// Backward-propagation and dataset-grid settings (dimensionless).
struct GenParams {
  double tau_max = 0.9;       // propagation horizon
  double grid_dt = 0.002;     // output grid spacing
  double r_escape = 1.1;      // radius at which a trajectory is accepted early
  double switch_tol = 1e-10;  // switch location tolerance in tau
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double alpha = 0.01;        // switching-function regularization scale
};

// Network training settings.
struct TrainParams {
  int max_epochs = 1500;
  double loss_goal = 1e-8;
  int patience = 25;
  std::string optimizer = "lm";  // "lm" or "adam"
  int max_rows = 30000;          // training-split subsample cap (0 = no cap)
  double split_train = 0.70;
  double split_val = 0.15;
  double lambda0 = 1e-3;         // initial LM damping
  double adam_lr = 1e-3;
  std::vector<int> tau_hidden = {15, 15};
  std::vector<int> angle_hidden = {20, 20, 20};
  std::vector<int> switch_hidden = {20, 20, 20};
};

// Closed-loop simulation settings.
struct SimParams {
  double update_period_s = 0.2;
  double stop_altitude_m = 0.2;
  double handoff_altitude_m = 20.0;  // slow arrivals below this altitude count as landed
  double success_vf_mps = 5.0;
  double horizon_factor = 2.0;   // sim horizon = factor * predicted flight time
  double min_horizon_s = 60.0;
  double deadband = 0.0;         // thrust hysteresis half-width on the N_sreg output; 0 disables
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
};

// Indirect shooting settings.
struct OracleParams {
  double delta_start = 1e-2;
  double delta_end = 1e-10;
  double tol = 1e-9;
  int max_iter = 60;
  double fd_step = 1e-7;
};

struct Config {
  PhysicalParams phys;
  SamplingBox sampling;
  GenParams gen;
  TrainParams train;
  SimParams sim;
  OracleParams oracle;
};

// Parse "key = value" text. '#' starts a comment; blank lines are skipped.
// Unknown keys and unparseable values raise Error{parse} naming the key.
Config parse_config(const std::string& text, const Config& base = Config{});
Config load_config(const std::string& path, const Config& base = Config{});

// Apply one "key=value" override (used for --set).
void config_set(Config& cfg, const std::string& key, const std::string& value);

// Basic sanity checks (positive masses, m_dry < m0, ...). Raises Error{invalid_argument}.
void validate(const Config& cfg);

// Full resolved configuration, suitable for embedding in run manifests.
nlohmann::json config_to_json(const Config& cfg);

// Inverse of config_to_json (used to replay run manifests).
Config config_from_json(const nlohmann::json& j);

}  // namespace fopdg
