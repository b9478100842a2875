#include "core/extremal.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "core/error.hpp"
#include "core/ode.hpp"
#include "core/rng.hpp"

namespace fopdg {

double m_bar0_from(double p_v0, double p_omega0, double tm) {
  return tm * std::hypot(p_v0, p_omega0) / (1.0 - p_v0);
}

std::string classify_label(std::size_t n_switches) {
  switch (n_switches) {
    case 0: return "always-on";
    case 1: return "off-on";
    case 2: return "on-off-on";
    default: return "other";
  }
}

namespace {

using Vec10 = std::array<double, 10>;

Vec10 pack(const LanderState& x, const Costate& p) {
  return {x.r, x.v, x.theta, x.omega, x.m, p.p_r, p.p_v, p.p_theta, p.p_omega, p.p_m};
}

void unpack(const Vec10& y, LanderState& x, Costate& p) {
  x = {y[0], y[1], y[2], y[3], y[4]};
  p = {y[5], y[6], y[7], y[8], y[9]};
}

}  // namespace

SwitchedRun run_switched(const LanderState& x0, const Costate& p0, const EngineParams& eng,
                         const SwitchedSpec& spec) {
  require_finite(x0);
  require_finite(p0);

  const double sign = spec.backward ? -1.0 : 1.0;
  double u_seg = bang_bang_u(switching_function(x0, p0, eng));

  auto rhs = [&](double, const Vec10& y) -> Vec10 {
    LanderState x;
    Costate p;
    unpack(y, x, p);
    const ThrustCommand cmd{u_seg, optimal_steering(x, p)};
    const Vec5 fx = dynamics_rhs(x, cmd, eng);
    const Vec5 fp = costate_rhs(x, p, cmd, eng);
    Vec10 out;
    for (int i = 0; i < 5; ++i) {
      out[i] = sign * fx[i];
      out[5 + i] = sign * fp[i];
    }
    return out;
  };

  OdeOptions oo;
  oo.abs_tol = spec.abs_tol;
  oo.rel_tol = spec.rel_tol;
  Dopri5<10, decltype(rhs)> st(rhs, oo);

  SwitchedRun out;
  auto make_record = [&](double s, const Vec10& y, bool is_switch, double u) {
    LanderState x;
    Costate p;
    unpack(y, x, p);
    ExtremalRecord rec;
    rec.tau = s;
    rec.x = x;
    rec.p = p;
    rec.S = switching_function(x, p, eng);
    rec.S_reg = regularize(rec.S, spec.alpha);
    rec.psi = optimal_steering(x, p);
    rec.u = u;
    rec.is_switch = is_switch;
    return rec;
  };

  auto finalize = [&](double s, const Vec10& y, RunEnd end) {
    out.s_final = s;
    out.end = end;
    unpack(y, out.x_final, out.p_final);
    out.u_final = u_seg;
  };

  long next_grid = 0;
  if (spec.grid_dt > 0) {
    out.records.push_back(make_record(0.0, pack(x0, p0), false, u_seg));
    next_grid = 1;
  }

  if (spec.s_end == 0.0) {
    finalize(0.0, pack(x0, p0), RunEnd::horizon);
    return out;
  }

  double seg_start = 0.0;
  const double guard = std::max(10.0 * spec.switch_tol, 1e-9);
  st.init(0.0, pack(x0, p0), spec.s_end);

  while (!st.done()) {
    st.step();
    const double ta = st.t_prev();
    const double tb = st.t();

    // event functions over the dense output of this step
    auto S_at = [&](double s) {
      LanderState x;
      Costate p;
      unpack(st.eval(s), x, p);
      return switching_function(x, p, eng);
    };
    auto r_at = [&](double s) { return st.eval(s)[0]; };
    auto m_at = [&](double s) { return st.eval(s)[4]; };

    enum EventKind { ev_switch, ev_escape, ev_floor, ev_mass };
    double t_event = tb + 1.0;
    EventKind kind = ev_switch;

    auto scan = [&](auto&& g, double lo, EventKind k) {
      if (lo >= tb) return;
      constexpr int K = 8;
      double prev_t = lo, prev_g = g(lo);
      for (int i = 1; i <= K; ++i) {
        const double ti = lo + (tb - lo) * i / K;
        const double gi = g(ti);
        if (prev_g == 0.0 || (prev_g > 0) != (gi > 0) || gi == 0.0) {
          double te = prev_g == 0.0 ? prev_t : bisect_root(g, prev_t, ti, spec.switch_tol);
          if (te < t_event) {
            t_event = te;
            kind = k;
          }
          return;
        }
        prev_t = ti;
        prev_g = gi;
      }
    };

    // bound events carry a hair of margin so states that start exactly on
    // a bound (touchdown r = 1, wet or dry mass limit) do not fire at s = 0
    constexpr double edge = 1e-13;
    scan(S_at, std::max(ta, seg_start + guard), ev_switch);
    if (spec.stop_on_escape) scan([&](double s) { return r_at(s) - spec.r_escape; }, ta, ev_escape);
    if (spec.reject_r_floor) scan([&](double s) { return r_at(s) - 1.0 + edge; }, ta, ev_floor);
    if (spec.reject_mass_bounds) {
      scan([&](double s) { return m_at(s) - 1.0 - edge; }, ta, ev_mass);
      scan([&](double s) { return m_at(s) - eng.m_dry + edge; }, ta, ev_mass);
    }

    const bool have_event = t_event <= tb;
    const double s_hi = have_event ? t_event : tb;

    if (have_event && (kind == ev_floor || kind == ev_mass)) {
      finalize(t_event, st.eval(t_event), kind == ev_floor ? RunEnd::r_floor : RunEnd::mass_bound);
      return out;
    }

    if (spec.grid_dt > 0) {
      while (next_grid * spec.grid_dt <= s_hi) {
        const double tg = next_grid * spec.grid_dt;
        out.records.push_back(make_record(tg, st.eval(tg), false, u_seg));
        ++next_grid;
      }
    }

    if (!have_event) continue;

    const Vec10 y_e = st.eval(t_event);
    if (kind == ev_escape) {
      finalize(t_event, y_e, RunEnd::escape);
      return out;
    }

    // thrust switch: record both one-sided limits, toggle, restart
    out.records.push_back(make_record(t_event, y_e, true, u_seg));
    out.records.push_back(make_record(t_event, y_e, true, 1.0 - u_seg));
    out.switch_s.push_back(t_event);
    u_seg = 1.0 - u_seg;
    seg_start = t_event;
    if (spec.s_end - t_event <= 1e-14) {
      finalize(t_event, y_e, RunEnd::horizon);
      return out;
    }
    st.init(t_event, y_e, spec.s_end);
  }

  finalize(spec.s_end, st.eval(spec.s_end), RunEnd::horizon);
  return out;
}

PropagationResult propagate_extremal(const Quadruple& q, const EngineParams& eng,
                                     const PropagateOptions& opt) {
  const double m0 = m_bar0_from(q.p_v0, q.p_omega0, eng.tm);
  const LanderState x0{1.0, 0.0, 0.0, 0.0, m0};
  const Costate p0{q.p_r0, q.p_v0, q.p_theta0, q.p_omega0, 0.0};

  SwitchedSpec spec;
  spec.s_end = opt.gen.tau_max;
  spec.grid_dt = opt.gen.grid_dt;
  spec.backward = true;
  spec.stop_on_escape = true;
  spec.r_escape = opt.gen.r_escape;
  spec.reject_r_floor = opt.enforce_r_floor;
  spec.reject_mass_bounds = opt.enforce_mass_bounds;
  spec.switch_tol = opt.gen.switch_tol;
  spec.abs_tol = opt.gen.abs_tol;
  spec.rel_tol = opt.gen.rel_tol;
  spec.alpha = opt.gen.alpha;

  SwitchedRun run = run_switched(x0, p0, eng, spec);

  PropagationResult res;
  if (run.end == RunEnd::r_floor || run.end == RunEnd::mass_bound) {
    res.reason = run.end == RunEnd::r_floor ? RejectReason::subsurface : RejectReason::mass_bound;
    res.reject_tau = run.s_final;
    return res;
  }

  ExtremalTrajectory tr;
  tr.quadruple = q;
  tr.m_bar0 = m0;
  tr.records = std::move(run.records);
  tr.switch_taus = std::move(run.switch_s);
  tr.tau_end = run.s_final;
  tr.end_reason = run.end == RunEnd::escape ? EndReason::escape : EndReason::horizon;
  res.trajectory = std::move(tr);
  return res;
}

std::vector<Quadruple> sample_quadruples(std::size_t n, const SamplingBox& box,
                                         const EngineParams& eng, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Quadruple> out;
  out.reserve(n);
  std::size_t attempts = 0;
  const std::size_t max_attempts = 1000 * n + 1000;
  while (out.size() < n) {
    if (++attempts > max_attempts)
      throw Error(ErrorCode::sampling_exhausted,
                  "quadruple sampling: touchdown-mass filter accepts too few candidates");
    Quadruple q;
    q.p_r0 = rng.uniform(box.pr_min, box.pr_max);
    q.p_v0 = rng.uniform(box.pv_min, box.pv_max);
    q.p_theta0 = rng.uniform(box.ptheta_min, box.ptheta_max);
    q.p_omega0 = rng.uniform(box.pomega_min, box.pomega_max);
    const double m0 = m_bar0_from(q.p_v0, q.p_omega0, eng.tm);
    if (m0 >= eng.m_dry && m0 <= 1.0) out.push_back(q);
  }
  return out;
}

}  // namespace fopdg
