#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "core/config.hpp"
#include "core/dynamics.hpp"
#include "core/extremal.hpp"

namespace fopdg {

struct ShootingUnknowns {
  Costate p0;
  double tf = 0.0;  // dimensionless time of flight
};

using ShootingResidual = std::array<double, 6>;

struct StageLog {
  double delta = 0.0;
  int iters = 0;
  double res_norm = 0.0;  // infinity norm at stage exit
  bool converged = false;
};

struct ShootingSolution {
  bool converged = false;
  ShootingUnknowns z;
  double res_norm = 0.0;
  std::vector<StageLog> stages;

  // Exact bang-bang reconstruction of the converged trajectory.
  std::vector<ExtremalRecord> records;
  std::vector<double> switch_times;
  LanderState x_final;
  Costate p_final;
  double fuel_bar = 0.0;   // m(0) - m(tf)
  double pm_tf = 0.0;      // mass costate at tf on the reconstruction
  double max_abs_H = 0.0;  // over the reconstruction records
};

// Boundary defects (r(tf)-1, v(tf), theta(tf), omega(tf), p_m(tf), H(tf))
// of the smoothed forward system started at x0 with costates z.p0.
ShootingResidual shooting_residual(const LanderState& x0, const ShootingUnknowns& z,
                                   double delta, const EngineParams& eng);

// Damped Gauss-Newton on the residual with a geometric homotopy on the
// smoothing constant. Non-convergence is reported in the solution, not
// thrown.
ShootingSolution solve_shooting(const LanderState& x0, const ShootingUnknowns& z0,
                                const EngineParams& eng, const OracleParams& op,
                                double grid_dt = 0.002);

// Backward-propagate a quadruple to backward time tau; the resulting
// state/costate pair warm-starts a shooting solve from that state.
struct WarmStart {
  LanderState x;
  Costate p0;
  double tf = 0.0;
};
WarmStart backward_point(const Quadruple& q, double tau, const EngineParams& eng,
                         const GenParams& gen);

// Warm start from a freshly generated extremal bank: nearest record to
// x0 in feature-normalized distance.
ShootingUnknowns seed_from_bank(const LanderState& x0, const Config& cfg, std::uint64_t seed,
                                std::size_t n_bank = 200);

// Fixed heuristic used when nothing better is available.
ShootingUnknowns cold_start(const LanderState& x0, const EngineParams& eng);

}  // namespace fopdg
