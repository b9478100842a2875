#include "core/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "core/error.hpp"
#include "core/ode.hpp"
#include "core/rng.hpp"
#include "core/scaling.hpp"

namespace fopdg {

namespace {

using Vec10 = std::array<double, 10>;

Vec10 pack(const LanderState& x, const Costate& p) {
  return {x.r, x.v, x.theta, x.omega, x.m, p.p_r, p.p_v, p.p_theta, p.p_omega, p.p_m};
}

void unpack(const Vec10& y, LanderState& x, Costate& p) {
  x = {y[0], y[1], y[2], y[3], y[4]};
  p = {y[5], y[6], y[7], y[8], y[9]};
}

double inf_norm(const ShootingResidual& f) {
  double m = 0;
  for (double v : f) m = std::max(m, std::fabs(v));
  return m;
}

}  // namespace

ShootingResidual shooting_residual(const LanderState& x0, const ShootingUnknowns& z,
                                   double delta, const EngineParams& eng) {
  if (!(delta > 0)) throw Error(ErrorCode::invalid_argument, "shooting: delta must be positive");
  if (!(z.tf > 0))
    throw Error(ErrorCode::invalid_argument, "shooting: time of flight must be positive");
  require_finite(x0);
  require_finite(z.p0);

  auto rhs = [&](double, const Vec10& y) -> Vec10 {
    LanderState x;
    Costate p;
    unpack(y, x, p);
    const double S = switching_function(x, p, eng);
    const ThrustCommand cmd{smoothed_u(S, delta), optimal_steering(x, p)};
    const Vec5 fx = dynamics_rhs(x, cmd, eng);
    const Vec5 fp = costate_rhs(x, p, cmd, eng);
    Vec10 out;
    for (int i = 0; i < 5; ++i) {
      out[i] = fx[i];
      out[5 + i] = fp[i];
    }
    return out;
  };

  OdeOptions oo;
  oo.abs_tol = 1e-12;
  oo.rel_tol = 1e-12;
  Dopri5<10, decltype(rhs)> st(rhs, oo);
  st.init(0.0, pack(x0, z.p0), z.tf);
  while (!st.done()) st.step();

  LanderState xf;
  Costate pf;
  unpack(st.y(), xf, pf);
  const double Sf = switching_function(xf, pf, eng);
  const ThrustCommand cmdf{smoothed_u(Sf, delta), optimal_steering(xf, pf)};
  const double H = hamiltonian(xf, pf, cmdf, eng);
  return {xf.r - 1.0, xf.v, xf.theta, xf.omega, pf.p_m, H};
}

namespace {

std::array<double, 6> to_array(const ShootingUnknowns& z) {
  return {z.p0.p_r, z.p0.p_v, z.p0.p_theta, z.p0.p_omega, z.p0.p_m, z.tf};
}

ShootingUnknowns from_array(const std::array<double, 6>& a) {
  ShootingUnknowns z;
  z.p0 = {a[0], a[1], a[2], a[3], a[4]};
  z.tf = a[5];
  return z;
}

// Boundary defects of the exact switched system (event-located thrust
// toggles instead of delta-smoothing); used to polish a homotopy solution
// so the reported certificates hold on the reconstruction itself.
ShootingResidual exact_residual(const LanderState& x0, const ShootingUnknowns& z,
                                const EngineParams& eng) {
  if (!(z.tf > 0))
    throw Error(ErrorCode::invalid_argument, "shooting: time of flight must be positive");
  SwitchedSpec spec;
  spec.s_end = z.tf;
  spec.grid_dt = 0.0;
  spec.backward = false;
  spec.abs_tol = 1e-12;
  spec.rel_tol = 1e-12;
  const SwitchedRun run = run_switched(x0, z.p0, eng, spec);
  const LanderState& xf = run.x_final;
  const Costate& pf = run.p_final;
  const ThrustCommand cmd{run.u_final, optimal_steering(xf, pf)};
  return {xf.r - 1.0, xf.v, xf.theta, xf.omega, pf.p_m, hamiltonian(xf, pf, cmd, eng)};
}

// Residual wrapper that reports integration blow-ups as unusable trials.
template <class ResidFn>
bool try_residual(ResidFn&& resid, const std::array<double, 6>& za, ShootingResidual& out) {
  try {
    out = resid(from_array(za));
  } catch (const Error&) {
    return false;
  }
  for (double v : out)
    if (!std::isfinite(v)) return false;
  return true;
}

// One damped Gauss-Newton stage at a fixed residual map.
template <class ResidFn>
StageLog gauss_newton_stage(ResidFn&& resid, std::array<double, 6>& za, double delta_label,
                            const OracleParams& op) {
  StageLog log;
  log.delta = delta_label;

  ShootingResidual F;
  if (!try_residual(resid, za, F)) {
    log.res_norm = std::numeric_limits<double>::infinity();
    return log;
  }
  double fnorm = inf_norm(F);

  for (int iter = 0; iter < op.max_iter; ++iter) {
    if (fnorm < op.tol) {
      log.converged = true;
      break;
    }
    ++log.iters;

    Eigen::Matrix<double, 6, 6> J;
    Eigen::Matrix<double, 6, 1> Fv;
    for (int i = 0; i < 6; ++i) Fv[i] = F[i];
    bool jac_ok = true;
    for (int i = 0; i < 6; ++i) {
      std::array<double, 6> zp = za;
      const double h = op.fd_step * std::max(1.0, std::fabs(za[i]));
      zp[i] += h;
      ShootingResidual Fp;
      if (!try_residual(resid, zp, Fp)) {
        jac_ok = false;
        break;
      }
      for (int r = 0; r < 6; ++r) J(r, i) = (Fp[r] - F[r]) / h;
    }
    if (!jac_ok) break;

    const Eigen::Matrix<double, 6, 1> step = J.colPivHouseholderQr().solve(-Fv);
    if (!step.allFinite()) break;

    // backtracking on the residual norm
    bool accepted = false;
    for (double t = 1.0; t >= 1.0 / 64; t *= 0.5) {
      std::array<double, 6> zc = za;
      for (int i = 0; i < 6; ++i) zc[i] += t * step[i];
      ShootingResidual Fc;
      if (!try_residual(resid, zc, Fc)) continue;
      const double cnorm = inf_norm(Fc);
      if (cnorm < fnorm) {
        za = zc;
        F = Fc;
        fnorm = cnorm;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }

  log.converged = log.converged || fnorm < op.tol;
  log.res_norm = fnorm;
  return log;
}

}  // namespace

ShootingSolution solve_shooting(const LanderState& x0, const ShootingUnknowns& z0,
                                const EngineParams& eng, const OracleParams& op,
                                double grid_dt) {
  ShootingSolution sol;
  std::array<double, 6> za = to_array(z0);

  // geometric delta schedule, always ending exactly at delta_end
  std::vector<double> deltas;
  for (double d = op.delta_start; d > op.delta_end * 1.0000001; d /= 10.0) deltas.push_back(d);
  deltas.push_back(op.delta_end);

  for (double d : deltas) {
    auto smoothed = [&](const ShootingUnknowns& z) { return shooting_residual(x0, z, d, eng); };
    StageLog log = gauss_newton_stage(smoothed, za, d, op);
    sol.stages.push_back(log);
    if (!log.converged) {
      sol.z = from_array(za);
      sol.res_norm = log.res_norm;
      return sol;  // failure carries the partial stage log
    }
  }

  // final polish on the exact switched system so the optimality
  // certificates hold on the bang-bang reconstruction, not just on the
  // last smoothed stage
  {
    auto exact = [&](const ShootingUnknowns& z) { return exact_residual(x0, z, eng); };
    StageLog log = gauss_newton_stage(exact, za, 0.0, op);
    sol.stages.push_back(log);
    if (!log.converged) {
      sol.z = from_array(za);
      sol.res_norm = log.res_norm;
      return sol;
    }
  }

  sol.converged = true;
  sol.z = from_array(za);
  sol.res_norm = sol.stages.back().res_norm;

  // exact bang-bang reconstruction for reporting
  SwitchedSpec spec;
  spec.s_end = sol.z.tf;
  spec.grid_dt = grid_dt;
  spec.backward = false;
  spec.abs_tol = 1e-12;
  spec.rel_tol = 1e-12;
  SwitchedRun run = run_switched(x0, sol.z.p0, eng, spec);
  sol.records = std::move(run.records);
  sol.switch_times = std::move(run.switch_s);
  sol.x_final = run.x_final;
  sol.p_final = run.p_final;
  sol.fuel_bar = x0.m - run.x_final.m;
  sol.pm_tf = run.p_final.p_m;
  double maxH = 0;
  for (const ExtremalRecord& rec : sol.records) {
    const ThrustCommand cmd{rec.u, rec.psi};
    maxH = std::max(maxH, std::fabs(hamiltonian(rec.x, rec.p, cmd, eng)));
  }
  {
    const ThrustCommand cmd{run.u_final, optimal_steering(run.x_final, run.p_final)};
    maxH = std::max(maxH, std::fabs(hamiltonian(run.x_final, run.p_final, cmd, eng)));
  }
  sol.max_abs_H = maxH;
  return sol;
}

WarmStart backward_point(const Quadruple& q, double tau, const EngineParams& eng,
                         const GenParams& gen) {
  const double m0 = m_bar0_from(q.p_v0, q.p_omega0, eng.tm);
  const LanderState x0{1.0, 0.0, 0.0, 0.0, m0};
  const Costate p0{q.p_r0, q.p_v0, q.p_theta0, q.p_omega0, 0.0};

  SwitchedSpec spec;
  spec.s_end = tau;
  spec.grid_dt = 0.0;
  spec.backward = true;
  spec.switch_tol = gen.switch_tol;
  spec.abs_tol = gen.abs_tol;
  spec.rel_tol = gen.rel_tol;
  spec.alpha = gen.alpha;
  SwitchedRun run = run_switched(x0, p0, eng, spec);

  WarmStart ws;
  ws.x = run.x_final;
  ws.p0 = run.p_final;
  ws.tf = tau;
  return ws;
}

ShootingUnknowns seed_from_bank(const LanderState& x0, const Config& cfg, std::uint64_t seed,
                                std::size_t n_bank) {
  const EngineParams eng = make_engine(cfg.phys);
  PropagateOptions popt;
  popt.gen = cfg.gen;

  std::vector<Quadruple> qs = sample_quadruples(n_bank * 4, cfg.sampling, eng, seed);
  std::vector<ExtremalRecord> bank;
  std::size_t accepted = 0;
  for (const Quadruple& q : qs) {
    if (accepted >= n_bank) break;
    PropagationResult res = propagate_extremal(q, eng, popt);
    if (!res.accepted()) continue;
    ++accepted;
    for (const ExtremalRecord& rec : res.trajectory->records)
      if (!rec.is_switch) bank.push_back(rec);
  }
  if (bank.empty())
    throw Error(ErrorCode::sampling_exhausted, "seed bank: no accepted trajectories");

  // feature scales from the bank itself
  std::array<double, 5> lo{}, hi{};
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());
  for (const ExtremalRecord& rec : bank) {
    const auto a = rec.x.to_array();
    for (int i = 0; i < 5; ++i) {
      lo[i] = std::min(lo[i], a[i]);
      hi[i] = std::max(hi[i], a[i]);
    }
  }
  std::array<double, 5> scale{};
  for (int i = 0; i < 5; ++i) scale[i] = hi[i] > lo[i] ? 1.0 / (hi[i] - lo[i]) : 0.0;

  const auto target = x0.to_array();
  double best = std::numeric_limits<double>::infinity();
  const ExtremalRecord* best_rec = nullptr;
  for (const ExtremalRecord& rec : bank) {
    const auto a = rec.x.to_array();
    double d2 = 0;
    for (int i = 0; i < 5; ++i) {
      const double q = (a[i] - target[i]) * scale[i];
      d2 += q * q;
    }
    if (d2 < best) {
      best = d2;
      best_rec = &rec;
    }
  }
  return {best_rec->p, best_rec->tau};
}

ShootingUnknowns cold_start(const LanderState& x0, const EngineParams& eng) {
  // mid-box costates and a two-phase time estimate: free fall to the
  // surface plus a braking burn at full thrust
  ShootingUnknowns z;
  z.p0 = {0.66, -0.21, 0.0, 0.36, 0.0};
  const double alt = std::max(x0.r - 1.0, 1e-3);
  const double vfall = std::sqrt(x0.v * x0.v + 2.0 * alt);
  const double a_thrust = eng.tm / x0.m;
  z.tf = std::sqrt(2.0 * alt) + vfall / std::max(a_thrust - 1.0, 0.1);
  return z;
}

}  // namespace fopdg
