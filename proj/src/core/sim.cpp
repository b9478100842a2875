#include "core/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include <nlohmann/json.hpp>

#include "core/error.hpp"
#include "core/io_util.hpp"
#include "core/ode.hpp"
#include "core/rng.hpp"
#include "core/scaling.hpp"

namespace fopdg {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

ThrustCommand guidance_step(const LanderState& x_bar, const GuidanceModels& models) {
  const double psi = models.n_psi.predict(x_bar);
  const double sreg = models.n_sreg.predict(x_bar);
  if (!std::isfinite(psi) || !std::isfinite(sreg))
    throw Error(ErrorCode::non_finite, "guidance: non-finite network output");
  ThrustCommand cmd;
  cmd.psi = psi;
  cmd.u = sreg < 0.0 ? 1.0 : 0.0;
  return cmd;
}

//
// closed-loop simulation
//

namespace {

TraceRow make_trace(double t_bar, const LanderState& x_bar, const ThrustCommand& cmd,
                    const ScalingConstants& scal) {
  TraceRow row;
  row.t_s = t_bar * scal.T_ref;
  row.r_m = x_bar.r * scal.L_ref;
  row.v_mps = x_bar.v * scal.V_ref;
  row.theta_deg = x_bar.theta * 180.0 / kPi;
  row.omega_radps = x_bar.omega / scal.T_ref;
  row.m_kg = x_bar.m * scal.M_ref;
  row.u = cmd.u;
  row.psi_rad = cmd.psi;
  return row;
}

void finish_report(LandingReport& rep, const LanderState& x_bar, double t_bar, double m0_si_kg,
                   const PhysicalParams& phys, const SimParams& sc,
                   const ScalingConstants& scal) {
  rep.vf_mps = std::hypot(x_bar.v, x_bar.omega * x_bar.r) * scal.V_ref;
  rep.theta_f_deg = x_bar.theta * 180.0 / kPi;
  rep.e_p_m = 2.0 * kPi * phys.R0 * std::abs(rep.theta_f_deg) / 360.0;
  rep.fuel_kg = m0_si_kg - x_bar.m * scal.M_ref;
  rep.flight_time_s = t_bar * scal.T_ref;
  rep.success = rep.reason == "landed" && rep.vf_mps < sc.success_vf_mps;
}

}  // namespace

LandingReport simulate(const LanderState& x0_si, const GuidanceModels& models,
                       const PhysicalParams& phys, const SimParams& sc) {
  require_finite(x0_si);
  const ScalingConstants scal = make_scaling(phys);
  const EngineParams eng = make_engine(phys);

  if (x0_si.m <= phys.m_dry)
    throw Error(ErrorCode::invalid_argument, "simulate: initial mass at or below dry mass");
  if (x0_si.r < phys.R0)
    throw Error(ErrorCode::invalid_argument, "simulate: initial radius below the surface");

  LanderState x = scale_state(x0_si, scal);
  const double stop_r = 1.0 + sc.stop_altitude_m / phys.R0;

  LandingReport rep;
  rep.tof_pred_s = models.n_tau.predict(x) * scal.T_ref;
  rep.in_distribution = models.n_tau.in_training_hull(x) && models.n_psi.in_training_hull(x) &&
                        models.n_sreg.in_training_hull(x);

  const double horizon =
      std::max(sc.horizon_factor * std::max(rep.tof_pred_s, 0.0), sc.min_horizon_s) / scal.T_ref;
  const double period = sc.update_period_s / scal.T_ref;

  double t = 0.0;
  ThrustCommand cmd;

  // Already within the stop band: report the initial state as the landing.
  if (x.r <= stop_r) {
    rep.reason = "landed";
    try {
      cmd = guidance_step(x, models);
    } catch (const Error&) {
      cmd = ThrustCommand{};
    }
    rep.trace.push_back(make_trace(t, x, cmd, scal));
    finish_report(rep, x, t, x0_si.m, phys, sc, scal);
    return rep;
  }

  OdeOptions opt;
  opt.abs_tol = sc.abs_tol;
  opt.rel_tol = sc.rel_tol;

  // Optional hysteresis: hold the previous throttle while the switching
  // network's output sits inside the deadband.
  bool have_prev_u = false;
  double prev_u = 0.0;
  auto next_command = [&]() {
    if (sc.deadband <= 0.0) return guidance_step(x, models);
    const double psi = models.n_psi.predict(x);
    const double sreg = models.n_sreg.predict(x);
    if (!std::isfinite(psi) || !std::isfinite(sreg))
      throw Error(ErrorCode::non_finite, "guidance: non-finite network output");
    ThrustCommand c;
    c.psi = psi;
    if (sreg < -sc.deadband)
      c.u = 1.0;
    else if (sreg > sc.deadband)
      c.u = 0.0;
    else
      c.u = have_prev_u ? prev_u : (sreg < 0.0 ? 1.0 : 0.0);
    return c;
  };

  while (true) {
    try {
      cmd = next_command();
    } catch (const Error&) {
      rep.reason = "guidance_fault";
      break;
    }
    have_prev_u = true;
    prev_u = cmd.u;
    rep.trace.push_back(make_trace(t, x, cmd, scal));

    const double t_next = std::min(t + period, horizon);
    const bool burning = cmd.u > 0.5;

    auto rhs = [&](double, const Vec5& y) {
      return dynamics_rhs(LanderState::from_array(y), cmd, eng);
    };

    bool failed = false;
    bool landed = false;
    bool dry = false;
    double t_end_seg = t_next;
    LanderState x_end;

    try {
      Dopri5<5, decltype(rhs)> st(rhs, opt);
      st.init(t, x.to_array(), t_next);
      while (st.t() < t_next) {
        st.step();
        const double ta = st.t_prev(), tb = st.t();
        // Scan the accepted step for a touchdown or burnout crossing.
        auto g_stop = [&](double s) { return st.eval(s)[0] - stop_r; };
        auto g_dry = [&](double s) { return st.eval(s)[4] - eng.m_dry; };
        double t_event = tb;
        int which = 0;
        constexpr int kScan = 8;
        for (int i = 0; i < kScan && which == 0; ++i) {
          const double sa = ta + (tb - ta) * i / kScan;
          const double sb = ta + (tb - ta) * (i + 1) / kScan;
          if (g_stop(sa) > 0.0 && g_stop(sb) <= 0.0) {
            t_event = bisect_root(g_stop, sa, sb, 1e-11);
            which = 1;
          } else if (burning && g_dry(sa) > 0.0 && g_dry(sb) <= 0.0) {
            t_event = bisect_root(g_dry, sa, sb, 1e-11);
            which = 2;
          }
        }
        if (which != 0) {
          t_end_seg = t_event;
          x_end = LanderState::from_array(st.eval(t_event));
          landed = which == 1;
          dry = which == 2;
          break;
        }
      }
      if (!landed && !dry) x_end = LanderState::from_array(st.y());
    } catch (const Error&) {
      failed = true;
    }

    if (failed) {
      rep.reason = "integrator_failure";
      break;
    }
    t = landed || dry ? t_end_seg : t_next;
    x = x_end;
    if (landed) {
      rep.reason = "landed";
      break;
    }
    if (dry) {
      rep.reason = "fuel_exhausted";
      break;
    }
    if (t >= horizon) {
      rep.reason = "horizon";
      break;
    }
  }

  rep.trace.push_back(make_trace(t, x, cmd, scal));
  finish_report(rep, x, t, x0_si.m, phys, sc, scal);
  return rep;
}

ShootingUnknowns seed_from_models(const LanderState& x0_bar, const GuidanceModels& models,
                                  const EngineParams& eng, double alpha) {
  require_finite(x0_bar);
  ShootingUnknowns z;
  z.tf = std::max(models.n_tau.predict(x0_bar), 1e-3);
  const double psi = models.n_psi.predict(x0_bar);
  const double sreg = std::clamp(models.n_sreg.predict(x0_bar), -0.999999, 0.999999);
  const double S = alpha * std::atanh(sreg);
  const double u = sreg < 0.0 ? 1.0 : 0.0;

  // S = 1 - (tm/m) N - p_m tm / ve with p_m = 0 fixes the costate norm.
  double N = (1.0 - S) * x0_bar.m / eng.tm;
  if (!(N > 0.0) || !std::isfinite(N)) N = 1e-3;

  Costate p;
  p.p_v = -N * std::sin(psi);
  p.p_omega = N * x0_bar.r * std::cos(psi);
  p.p_theta = 0.0;
  p.p_m = 0.0;
  p.p_r = 0.0;

  // Close H = 0 through p_r when the radial rate allows it.
  const ThrustCommand cmd{u, psi};
  const double h0 = hamiltonian(x0_bar, p, cmd, eng);
  const Vec5 d = dynamics_rhs(x0_bar, cmd, eng);
  p.p_r = std::abs(d[0]) > 1e-6 ? -h0 / d[0] : 0.66;

  z.p0 = p;
  return z;
}

const char* const kTraceHeader = "t_s,r_m,v_mps,theta_deg,omega_radps,m_kg,u,psi_rad";

std::string trace_csv(const std::vector<TraceRow>& trace) {
  std::string out = kTraceHeader;
  out += '\n';
  for (const auto& r : trace) {
    out += fmt(r.t_s);
    out += ',';
    out += fmt(r.r_m);
    out += ',';
    out += fmt(r.v_mps);
    out += ',';
    out += fmt(r.theta_deg);
    out += ',';
    out += fmt(r.omega_radps);
    out += ',';
    out += fmt(r.m_kg);
    out += ',';
    out += fmt(r.u);
    out += ',';
    out += fmt(r.psi_rad);
    out += '\n';
  }
  return out;
}

//
// Monte Carlo
//

Histogram make_histogram(const std::vector<double>& values, int bins) {
  Histogram h;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  if (values.empty()) return h;
  h.lo = *std::min_element(values.begin(), values.end());
  h.hi = *std::max_element(values.begin(), values.end());
  if (h.hi <= h.lo) h.hi = h.lo + 1.0;
  for (double v : values) {
    auto idx = static_cast<long>((v - h.lo) / (h.hi - h.lo) * bins);
    idx = std::clamp(idx, 0L, static_cast<long>(bins - 1));
    h.counts[static_cast<std::size_t>(idx)]++;
  }
  return h;
}

McAggregate monte_carlo(std::size_t n, const std::vector<DatasetRow>& rows,
                        const std::map<std::uint32_t, TrajectorySeed>& seeds,
                        const GuidanceModels& models, const Config& cfg, bool with_oracle,
                        std::uint64_t seed) {
  if (rows.empty() && n > 0)
    throw Error(ErrorCode::invalid_argument, "monte carlo: empty dataset");

  const ScalingConstants scal = make_scaling(cfg.phys);
  const EngineParams eng = make_engine(cfg.phys);
  Rng rng(seed);

  McAggregate agg;
  agg.n = n;
  std::vector<double> vfs, thetas, eps, penalties;
  vfs.reserve(n);
  thetas.reserve(n);
  eps.reserve(n);

  for (std::size_t run = 0; run < n; ++run) {
    McCase mc;
    mc.run = run;
    mc.row_index = rng.integer(rows.size());
    const DatasetRow& row = rows[mc.row_index];
    mc.traj_id = row.traj_id;

    const LanderState x0_bar{row.r, row.v, row.theta, row.omega, row.m};
    const LanderState x0_si = unscale_state(x0_bar, scal);

    mc.report = simulate(x0_si, models, cfg.phys, cfg.sim);
    mc.report.trace.clear();
    if (mc.report.success) agg.n_success++;
    agg.fuel_total_kg += mc.report.fuel_kg;
    vfs.push_back(mc.report.vf_mps);
    thetas.push_back(mc.report.theta_f_deg);
    eps.push_back(mc.report.e_p_m);

    if (with_oracle) {
      auto it = seeds.find(row.traj_id);
      if (it == seeds.end())
        throw Error(ErrorCode::parse, "monte carlo: dataset row references a trajectory id "
                                      "missing from the stats file");
      mc.oracle_attempted = true;
      agg.oracle_attempts++;
      const WarmStart ws = backward_point(it->second.quadruple, row.tau, eng, cfg.gen);
      ShootingUnknowns z0;
      z0.p0 = ws.p0;
      z0.tf = ws.tf;
      const ShootingSolution sol = solve_shooting(x0_bar, z0, eng, cfg.oracle, 0.0);
      mc.oracle_converged = sol.converged;
      if (sol.converged) {
        agg.oracle_converged++;
        mc.oracle_fuel_kg = sol.fuel_bar * scal.M_ref;
        mc.oracle_tf_s = sol.z.tf * scal.T_ref;
        mc.oracle_pm_tf = sol.pm_tf;
        mc.oracle_max_abs_H = sol.max_abs_H;
        mc.fuel_penalty_kg = mc.report.fuel_kg - mc.oracle_fuel_kg;
        penalties.push_back(mc.fuel_penalty_kg);
      }
    }
    agg.cases.push_back(std::move(mc));
  }

  agg.success_rate = n == 0 ? 0.0 : static_cast<double>(agg.n_success) / static_cast<double>(n);
  agg.h_vf = make_histogram(vfs, 40);
  agg.h_theta = make_histogram(thetas, 40);
  agg.h_ep = make_histogram(eps, 40);
  agg.h_penalty = make_histogram(penalties, 40);
  return agg;
}

//
// serialization
//

nlohmann::json report_to_json(const LandingReport& rep) {
  nlohmann::ordered_json j;
  j["success"] = rep.success;
  j["reason"] = rep.reason;
  j["vf_mps"] = rep.vf_mps;
  j["theta_f_deg"] = rep.theta_f_deg;
  j["e_p_m"] = rep.e_p_m;
  j["fuel_kg"] = rep.fuel_kg;
  j["flight_time_s"] = rep.flight_time_s;
  j["tof_pred_s"] = rep.tof_pred_s;
  j["in_distribution"] = rep.in_distribution;
  return j;
}

namespace {

nlohmann::json histogram_to_json(const Histogram& h) {
  nlohmann::ordered_json j;
  j["lo"] = h.lo;
  j["hi"] = h.hi;
  j["counts"] = h.counts;
  return j;
}

}  // namespace

nlohmann::json aggregate_to_json(const McAggregate& agg) {
  nlohmann::ordered_json j;
  j["n"] = agg.n;
  j["n_success"] = agg.n_success;
  j["success_rate"] = agg.success_rate;
  j["fuel_total_kg"] = agg.fuel_total_kg;
  j["oracle_attempts"] = agg.oracle_attempts;
  j["oracle_converged"] = agg.oracle_converged;
  j["hist_vf_mps"] = histogram_to_json(agg.h_vf);
  j["hist_theta_deg"] = histogram_to_json(agg.h_theta);
  j["hist_ep_m"] = histogram_to_json(agg.h_ep);
  j["hist_penalty_kg"] = histogram_to_json(agg.h_penalty);
  nlohmann::ordered_json cases = nlohmann::ordered_json::array();
  for (const auto& c : agg.cases) {
    nlohmann::ordered_json cj;
    cj["run"] = c.run;
    cj["row_index"] = c.row_index;
    cj["traj_id"] = c.traj_id;
    cj["report"] = report_to_json(c.report);
    cj["oracle_attempted"] = c.oracle_attempted;
    cj["oracle_converged"] = c.oracle_converged;
    if (c.oracle_converged) {
      cj["oracle_fuel_kg"] = c.oracle_fuel_kg;
      cj["oracle_tf_s"] = c.oracle_tf_s;
      cj["oracle_pm_tf"] = c.oracle_pm_tf;
      cj["oracle_max_abs_H"] = c.oracle_max_abs_H;
      cj["fuel_penalty_kg"] = c.fuel_penalty_kg;
    }
    cases.push_back(std::move(cj));
  }
  j["cases"] = std::move(cases);
  return j;
}

std::string histogram_csv(const Histogram& h) {
  std::string out = "bin_lo,bin_hi,count\n";
  const std::size_t n = h.counts.size();
  const double w = n == 0 ? 0.0 : (h.hi - h.lo) / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    out += fmt(h.lo + w * static_cast<double>(i));
    out += ',';
    out += fmt(h.lo + w * static_cast<double>(i + 1));
    out += ',';
    out += fmt(static_cast<std::uint64_t>(h.counts[i]));
    out += '\n';
  }
  return out;
}

}  // namespace fopdg
