// End-to-end acceptance runner. Exercises the toolkit from analytic
// touchdown identities through dataset generation, network training,
// closed-loop landing, oracle cross-checks, and manifest replays, and
// prints one PASS/FAIL line per criterion. Slow: trains real networks.
//
// usage: fopdg_acceptance <path-to-fopdg-cli>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include "core/config.hpp"
#include "core/dataset.hpp"
#include "core/dynamics.hpp"
#include "core/extremal.hpp"
#include "core/mlp.hpp"
#include "core/rng.hpp"
#include "core/scaling.hpp"
#include "core/shooting.hpp"
#include "core/sim.hpp"

namespace fs = std::filesystem;
using namespace fopdg;

namespace {

int g_failures = 0;

std::string strf(const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, ap);
  va_end(ap);
  return buf;
}

using Outcome = std::pair<bool, std::string>;

template <typename F>
void criterion(int n, F&& fn) {
  Outcome r;
  try {
    r = fn();
  } catch (const std::exception& e) {
    r = {false, strf("exception: %s", e.what())};
  }
  std::printf("criterion %2d: %s  %s\n", n, r.first ? "PASS" : "FAIL", r.second.c_str());
  std::fflush(stdout);
  if (!r.first) ++g_failures;
}

void info(const std::string& s) {
  std::printf("info: %s\n", s.c_str());
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) return "<unreadable:" + p.string() + ">";
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

bool same_bytes(const fs::path& a, const fs::path& b) { return slurp(a) == slurp(b); }

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <path-to-fopdg-cli>\n", argv[0]);
    return 2;
  }
  const std::string cli = argv[1];

  const Config cfg;
  const ScalingConstants scal = make_scaling(cfg.phys);
  const EngineParams eng = make_engine(cfg.phys);

  // 1. touchdown identity: the switching function at touchdown equals the
  //    radial-velocity costate, and the free-final-time mass choice zeroes
  //    the Hamiltonian there.
  criterion(1, [&]() -> Outcome {
    const double tol = 1e-12;
    const auto quads = sample_quadruples(200, cfg.sampling, eng, 2028);
    double worst_s = 0.0, worst_h = 0.0;
    for (const auto& q : quads) {
      const double m0 = m_bar0_from(q.p_v0, q.p_omega0, eng.tm);
      const LanderState x{1.0, 0.0, 0.0, 0.0, m0};
      const Costate p{q.p_r0, q.p_v0, q.p_theta0, q.p_omega0, 0.0};
      const double S = switching_function(x, p, eng);
      const ThrustCommand cmd{bang_bang_u(S), optimal_steering(x, p)};
      const double H = hamiltonian(x, p, cmd, eng);
      worst_s = std::max(worst_s, std::abs(S - q.p_v0));
      worst_h = std::max(worst_h, std::abs(H));
    }
    return {worst_s < tol && worst_h < tol,
            strf("200 quadruples: max |S(0)-p_v0| %.2e, max |H(0)| %.2e (tol %.0e)", worst_s,
                 worst_h, tol)};
  });

  // 2. touchdown-mass spot value for a reference quadruple.
  criterion(2, [&]() -> Outcome {
    const double target = 0.5380, tol = 5e-4;
    const double m0 = m_bar0_from(-0.238, 0.361, eng.tm);
    return {std::abs(m0 - target) < tol,
            strf("m_bar0(0.753, -0.238, 0.019, 0.361) = %.6f (target %.4f +/- %.0e)", m0, target,
                 tol)};
  });

  // 3. normalization spot value: the dimensionless horizon in seconds.
  criterion(3, [&]() -> Outcome {
    const double target = 931.32, tol = 0.05;
    const double horizon_s = 0.9 * scal.T_ref;
    return {std::abs(horizon_s - target) < tol,
            strf("0.9 horizon = %.4f s (target %.2f +/- %.2f s)", horizon_s, target, tol)};
  });

  // 10. gradient and unit checks: costate equations against finite
  //     differences of the Hamiltonian, network backprop against finite
  //     differences over the flattened parameters, SI scaling round trip.
  criterion(10, [&]() -> Outcome {
    const double tol_costate = 1e-5, tol_backprop = 1e-4, tol_scaling = 1e-12;

    const LanderState xc{1.05, -0.08, 0.25, 0.31, 0.83};
    const Costate pc{0.61, -0.22, 0.04, 0.35, 0.12};
    const ThrustCommand cmd{0.7, 0.9};
    const Vec5 dp = costate_rhs(xc, pc, cmd, eng);
    double worst_costate = 0.0;
    const double h = 1e-6;
    for (int k = 0; k < 5; ++k) {
      auto xp = xc.to_array(), xm = xc.to_array();
      xp[k] += h;
      xm[k] -= h;
      const double Hp = hamiltonian(LanderState::from_array(xp), pc, cmd, eng);
      const double Hm = hamiltonian(LanderState::from_array(xm), pc, cmd, eng);
      const double fd = -(Hp - Hm) / (2.0 * h);
      worst_costate =
          std::max(worst_costate, std::abs(dp[k] - fd) / std::max(1.0, std::abs(fd)));
    }

    Rng rng(5);
    Eigen::MatrixXd X(60, 2);
    Eigen::VectorXd y(60);
    for (int i = 0; i < 60; ++i) {
      X(i, 0) = rng.uniform(-1.0, 1.0);
      X(i, 1) = rng.uniform(-1.0, 1.0);
      y[i] = std::sin(2.0 * X(i, 0)) * std::cos(X(i, 1));
    }
    TrainParams tp;
    tp.max_epochs = 3;
    MlpModel net = train_mlp(X, y, {5, 4}, tp, 11).model;
    Eigen::MatrixXd Xn(2, 60);
    Eigen::VectorXd yn(60);
    for (int i = 0; i < 60; ++i) {
      Xn.col(i) = net.in_norm.apply(X.row(i).transpose());
      Eigen::VectorXd t(1);
      t << y[i];
      yn[i] = net.out_norm.apply(t)[0];
    }
    Eigen::VectorXd grad;
    mse_and_gradient(net, Xn, yn, &grad);
    Eigen::VectorXd theta = flatten_params(net);
    double worst_backprop = 0.0;
    const double hb = 1e-5;
    for (int k = 0; k < theta.size(); ++k) {
      Eigen::VectorXd tplus = theta, tminus = theta;
      tplus[k] += hb;
      tminus[k] -= hb;
      MlpModel mp = net, mm = net;
      unflatten_params(mp, tplus);
      unflatten_params(mm, tminus);
      const double fd =
          (mse_and_gradient(mp, Xn, yn, nullptr) - mse_and_gradient(mm, Xn, yn, nullptr)) /
          (2.0 * hb);
      worst_backprop =
          std::max(worst_backprop, std::abs(grad[k] - fd) / std::max(1.0, std::abs(fd)));
    }

    const LanderState si{1.76205e6, 21.35, 0.42, 1.1274e-3, 600.0};
    const LanderState back = unscale_state(scale_state(si, scal), scal);
    double worst_scaling = 0.0;
    const auto a = si.to_array(), b = back.to_array();
    for (int k = 0; k < 5; ++k)
      worst_scaling = std::max(worst_scaling, std::abs(a[k] - b[k]) / std::max(1.0, std::abs(a[k])));
    worst_scaling = std::max(
        worst_scaling, std::abs(unscale_time(scale_time(660.62, scal), scal) - 660.62) / 660.62);

    const bool pass = worst_costate < tol_costate && worst_backprop < tol_backprop &&
                      worst_scaling < tol_scaling;
    return {pass, strf("costate FD rel %.2e, backprop FD rel %.2e, scaling round trip %.2e "
                       "(tols %.0e, %.0e, %.0e)",
                       worst_costate, worst_backprop, worst_scaling, tol_costate, tol_backprop,
                       tol_scaling)};
  });

  // 5. one touchdown mass, three radial-velocity costates: the touchdown
  //    state is shared, the raw switching function reproduces each p_v0,
  //    and the regularized output collapses them all to -1.
  criterion(5, [&]() -> Outcome {
    const double m_target = 0.5380;
    const double tol_m = 1e-9, tol_s = 1e-12, sreg_bound = -0.999;
    PropagateOptions opt;
    opt.gen = cfg.gen;
    opt.enforce_r_floor = false;
    opt.enforce_mass_bounds = false;

    double worst_m = 0.0, worst_s = 0.0, max_sreg = -1.0;
    std::vector<LanderState> touchdowns;
    for (const double pv : {-0.1, -0.2, -0.3}) {
      const double norm = m_target * (1.0 - pv) / eng.tm;
      const double pom = std::sqrt(norm * norm - pv * pv);
      const Quadruple q{0.753, pv, 0.019, pom};
      const auto res = propagate_extremal(q, eng, opt);
      if (!res.accepted()) return {false, strf("branch p_v0=%.1f rejected", pv)};
      const auto& tr = *res.trajectory;
      const auto& td = tr.records.front();
      worst_m = std::max(worst_m, std::abs(tr.m_bar0 - m_target));
      worst_s = std::max(worst_s, std::abs(td.S - pv));
      max_sreg = std::max(max_sreg, td.S_reg);
      touchdowns.push_back(td.x);
    }
    double worst_share = 0.0;
    for (const auto& td : touchdowns) {
      const auto a = td.to_array(), b = touchdowns.front().to_array();
      for (int k = 0; k < 5; ++k) worst_share = std::max(worst_share, std::abs(a[k] - b[k]));
      worst_share = std::max({worst_share, std::abs(td.r - 1.0), std::abs(td.v),
                              std::abs(td.theta), std::abs(td.omega)});
    }
    const bool pass =
        worst_m < tol_m && worst_s < tol_s && max_sreg < sreg_bound && worst_share < 1e-12;
    return {pass,
            strf("p_v0 in {-0.1,-0.2,-0.3}: max |m_bar0-%.4f| %.2e, max |S(0)-p_v0| %.2e, "
                 "max S_reg(0) %.10f, touchdown spread %.2e (tols %.0e, %.0e, < %.3f)",
                 m_target, worst_m, worst_s, max_sreg, worst_share, tol_m, tol_s, sreg_bound)};
  });

  // 4. extremal validity in bulk: Hamiltonian stays at zero, the cyclic
  //    costate stays constant, and forward reintegration of the far end
  //    recovers the touchdown state.
  criterion(4, [&]() -> Outcome {
    const double tol_h = 1e-6, tol_drift = 1e-10, tol_defect = 1e-6;
    const std::size_t n_target = 500, n_audit = 50;
    const auto t0 = std::chrono::steady_clock::now();

    double worst_h = 0.0, worst_drift = 0.0, worst_defect = 0.0;
    std::size_t accepted = 0, audited = 0;
    std::uint64_t batch_seed = 9000;
    while (accepted < n_target) {
      const auto quads = sample_quadruples(200, cfg.sampling, eng, batch_seed++);
      for (const auto& q : quads) {
        PropagateOptions opt;
        opt.gen = cfg.gen;
        const auto res = propagate_extremal(q, eng, opt);
        if (!res.accepted()) continue;
        const auto& tr = *res.trajectory;
        for (const auto& rec : tr.records) {
          const double H = hamiltonian(rec.x, rec.p, ThrustCommand{rec.u, rec.psi}, eng);
          worst_h = std::max(worst_h, std::abs(H));
          worst_drift = std::max(worst_drift, std::abs(rec.p.p_theta - q.p_theta0));
        }
        if (audited < n_audit) {
          const auto& far = tr.records.back();
          SwitchedSpec fwd;
          fwd.s_end = tr.tau_end;
          fwd.grid_dt = 0.0;
          fwd.backward = false;
          fwd.switch_tol = cfg.gen.switch_tol;
          fwd.abs_tol = cfg.gen.abs_tol;
          fwd.rel_tol = cfg.gen.rel_tol;
          fwd.alpha = cfg.gen.alpha;
          const auto run = run_switched(far.x, far.p, eng, fwd);
          const double defect =
              std::max({std::abs(run.x_final.r - 1.0), std::abs(run.x_final.v),
                        std::abs(run.x_final.theta), std::abs(run.x_final.omega),
                        std::abs(run.x_final.m - tr.m_bar0)});
          worst_defect = std::max(worst_defect, defect);
          ++audited;
        }
        if (++accepted >= n_target) break;
      }
    }
    const bool pass = worst_h < tol_h && worst_drift < tol_drift && worst_defect < tol_defect;
    return {pass, strf("%zu extremals in %.0f s: max |H| %.2e, p_theta drift %.2e, round-trip "
                       "defect %.2e over %zu audited (tols %.0e, %.0e, %.0e)",
                       accepted, seconds_since(t0), worst_h, worst_drift, worst_defect, audited,
                       tol_h, tol_drift, tol_defect)};
  });

  // shared corpus for the training-dependent criteria: one generated
  // dataset, four networks on a fixed budget, a few switch-rich
  // trajectories held out of training entirely.
  const std::size_t kCorpusTrajectories = 2005;
  const std::size_t kHoldOut = 5;
  TrainParams budget = cfg.train;
  budget.max_rows = 12000;
  budget.max_epochs = 600;
  const std::uint64_t kTrainSeed = 1;

  bool corpus_ready = false;
  GeneratedDataset ds;
  std::vector<std::uint32_t> held;
  TrainResult rt_tau, rt_psi, rt_sreg, rt_s;
  GuidanceModels models;
  try {
    auto t0 = std::chrono::steady_clock::now();
    ds = build_dataset(cfg, kCorpusTrajectories, 42);
    info(strf("dataset: %zu trajectories, %zu rows, acceptance %.4f (%.0f s)",
              ds.stats.n_accepted, ds.stats.n_rows, ds.stats.acceptance_rate,
              seconds_since(t0)));

    for (const auto& t : ds.trajectories)
      if (t.switch_taus.size() == 2 && held.size() < kHoldOut) held.push_back(t.traj_id);
    std::set<std::uint32_t> held_set(held.begin(), held.end());
    std::vector<DatasetRow> train_rows;
    train_rows.reserve(ds.rows.size());
    for (const auto& r : ds.rows)
      if (!held_set.count(r.traj_id)) train_rows.push_back(r);
    info(strf("training corpus: %zu of %zu trajectories (%zu switch-rich held out), %zu rows",
              ds.trajectories.size() - held.size(), ds.trajectories.size(), held.size(),
              train_rows.size()));

    const auto train_target = [&](const char* target) {
      const auto tt0 = std::chrono::steady_clock::now();
      Eigen::MatrixXd X;
      Eigen::VectorXd y;
      dataset_matrix(train_rows, target, X, y);
      TrainResult r = train_mlp(X, y, arch_for_target(budget, target), budget, kTrainSeed);
      info(strf("trained %s: %d epochs (%s), val MSE %.3e (%.0f s)", target, r.report.epochs,
                r.report.stop_reason.c_str(), r.report.val_mse, seconds_since(tt0)));
      return r;
    };
    rt_tau = train_target("tau");
    rt_psi = train_target("psi");
    rt_sreg = train_target("sreg");
    rt_s = train_target("s");
    models = GuidanceModels{rt_tau.model, rt_psi.model, rt_sreg.model};
    corpus_ready = true;
  } catch (const std::exception& e) {
    info(strf("corpus construction failed: %s", e.what()));
  }

  // 6. regularization training gain: on the identical corpus and budget,
  //    the regularized switching network must validate at least five
  //    times better than the raw one.
  criterion(6, [&]() -> Outcome {
    if (!corpus_ready) return {false, "corpus unavailable"};
    const double max_ratio = 0.2;
    const double ratio = rt_sreg.report.val_mse / rt_s.report.val_mse;
    return {ratio <= max_ratio,
            strf("val MSE: regularized %.3e vs raw %.3e, ratio %.3f (need <= %.1f)",
                 rt_sreg.report.val_mse, rt_s.report.val_mse, ratio, max_ratio)};
  });

  // 7. switch-time prediction on trajectories the networks never saw:
  //    zero crossings of the predicted switching output against the true
  //    switch times, as a fraction of each flight's duration.
  criterion(7, [&]() -> Outcome {
    if (!corpus_ready) return {false, "corpus unavailable"};
    const double tol_frac = 0.02;
    if (held.empty()) return {false, "no switch-rich trajectories held out"};

    double worst_frac = 0.0;
    std::size_t n_checked = 0;
    for (const std::uint32_t id : held) {
      const TrajectoryMeta* meta = nullptr;
      for (const auto& t : ds.trajectories)
        if (t.traj_id == id) meta = &t;
      if (!meta) return {false, strf("trajectory %u missing from the stats block", id)};

      std::vector<const DatasetRow*> rows;
      for (const auto& r : ds.rows)
        if (r.traj_id == id) rows.push_back(&r);
      std::stable_sort(rows.begin(), rows.end(),
                       [](const DatasetRow* a, const DatasetRow* b) { return a->tau < b->tau; });

      // forward-time series, one sample per grid point
      std::vector<std::pair<double, double>> series;  // (t, prediction)
      for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
        const DatasetRow& r = **it;
        if (!series.empty() && std::abs((meta->tau_end - r.tau) - series.back().first) == 0.0)
          continue;
        const LanderState x{r.r, r.v, r.theta, r.omega, r.m};
        series.emplace_back(meta->tau_end - r.tau, models.n_sreg.predict(x));
      }

      std::vector<double> predicted;
      for (std::size_t i = 0; i + 1 < series.size(); ++i) {
        const auto [ta, fa] = series[i];
        const auto [tb, fb] = series[i + 1];
        if (fa == 0.0)
          predicted.push_back(ta);
        else if (fa * fb < 0.0)
          predicted.push_back(ta + fa / (fa - fb) * (tb - ta));
      }

      if (predicted.size() != meta->switch_taus.size())
        return {false, strf("trajectory %u: %zu predicted crossings vs %zu true", id,
                            predicted.size(), meta->switch_taus.size())};
      for (const double st : meta->switch_taus) {
        const double t_true = meta->tau_end - st;
        double best = 1e30;
        for (const double tp : predicted) best = std::min(best, std::abs(tp - t_true));
        worst_frac = std::max(worst_frac, best / meta->tau_end);
        ++n_checked;
      }
    }
    return {worst_frac <= tol_frac,
            strf("%zu crossings on %zu held-out trajectories: worst offset %.2f%% of flight "
                 "time (tol %.0f%%)",
                 n_checked, held.size(), 100.0 * worst_frac, 100.0 * tol_frac)};
  });

  // 8. closed-loop landing statistics over states drawn from the corpus.
  criterion(8, [&]() -> Outcome {
    if (!corpus_ready) return {false, "corpus unavailable"};
    const std::size_t n = 20;
    const double need = 0.90, vf_limit = 5.0, ep_limit = 500.0;
    Rng rng(2029);
    std::size_t good = 0;
    double worst_vf = 0.0, worst_ep = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& row = ds.rows[rng.integer(ds.rows.size())];
      const LanderState x_bar{row.r, row.v, row.theta, row.omega, row.m};
      const auto rep = simulate(unscale_state(x_bar, scal), models, cfg.phys, cfg.sim);
      const bool ok =
          rep.reason == "landed" && rep.vf_mps < vf_limit && rep.e_p_m < ep_limit;
      if (ok) ++good;
      worst_vf = std::max(worst_vf, rep.vf_mps);
      worst_ep = std::max(worst_ep, rep.e_p_m);
    }
    const bool pass = static_cast<double>(good) >= need * static_cast<double>(n);
    return {pass, strf("%zu/%zu landings with V_f < %.0f m/s and e_p < %.0f m "
                       "(worst V_f %.2f m/s, worst e_p %.1f m; need >= %.0f%%)",
                       good, n, vf_limit, ep_limit, worst_vf, worst_ep, 100.0 * need)};
  });

  // 9. oracle cross-check on a Monte-Carlo campaign: fuel penalty of the
  //    neural loop against the optimal, and optimality conditions on
  //    every converged oracle solution.
  criterion(9, [&]() -> Outcome {
    if (!corpus_ready) return {false, "corpus unavailable"};
    const double pen_lo = -0.5, pen_hi = 10.0, tol_pm = 1e-8, tol_h = 1e-6;
    std::map<std::uint32_t, TrajectorySeed> seeds;
    for (const auto& t : ds.trajectories)
      seeds[t.traj_id] = TrajectorySeed{t.quadruple, t.m_bar0, t.tau_end};
    const auto agg = monte_carlo(12, ds.rows, seeds, models, cfg, true, 31);
    if (agg.oracle_converged == 0)
      return {false, strf("no converged oracle case in %zu attempts", agg.oracle_attempts)};
    double pen_min = 1e30, pen_max = -1e30, worst_pm = 0.0, worst_h = 0.0;
    for (const auto& c : agg.cases) {
      if (!c.oracle_converged) continue;
      pen_min = std::min(pen_min, c.fuel_penalty_kg);
      pen_max = std::max(pen_max, c.fuel_penalty_kg);
      worst_pm = std::max(worst_pm, std::abs(c.oracle_pm_tf));
      worst_h = std::max(worst_h, c.oracle_max_abs_H);
    }
    const bool pass = pen_min >= pen_lo && pen_max <= pen_hi && worst_pm < tol_pm &&
                      worst_h < tol_h;
    return {pass,
            strf("%zu/%zu oracle-converged: penalty [%.3f, %.3f] kg, max |p_m(tf)| %.2e, "
                 "max |H| %.2e (bounds [%.1f, %.1f] kg, %.0e, %.0e)",
                 agg.oracle_converged, agg.oracle_attempts, pen_min, pen_max, worst_pm, worst_h,
                 pen_lo, pen_hi, tol_pm, tol_h)};
  });

  // demonstration descent-orbit condition, reported for reference only
  if (corpus_ready) {
    const double pi = 3.14159265358979323846;
    const LanderState demo{1.76205e6, 21.35, 24.02 * pi / 180.0, 1.1274e-3, 600.0};
    const auto rep = simulate(demo, models, cfg.phys, cfg.sim);
    info(strf("descent-orbit demo: %s (%s), V_f %.3f m/s, e_p %.1f m, flight %.2f s "
              "(predicted %.2f s)",
              rep.success ? "success" : "failure", rep.reason.c_str(), rep.vf_mps, rep.e_p_m,
              rep.flight_time_s, rep.tof_pred_s));
  }

  // 11. determinism: every pipeline stage replays byte-identically from
  //     its manifest, via the installed command-line front end.
  criterion(11, [&]() -> Outcome {
    const fs::path work =
        fs::temp_directory_path() / strf("fopdg_acceptance_%d", static_cast<int>(getpid()));
    fs::remove_all(work);
    fs::create_directories(work);
    const fs::path log = work / "cli.log";
    const auto sh = [&](const std::string& args) {
      const std::string cmd =
          "\"" + cli + "\" " + args + " >> \"" + log.string() + "\" 2>&1";
      return std::system(cmd.c_str()) == 0;
    };
    const auto q = [](const fs::path& p) { return "\"" + p.string() + "\""; };

    std::ofstream(work / "tiny.cfg") << "train_max_epochs = 15\ntrain_max_rows = 2000\n";
    const std::string cfg_arg = " --config " + q(work / "tiny.cfg");

    std::vector<std::string> bad;
    const auto compare = [&](const char* stage, const fs::path& a, const fs::path& b,
                             const std::vector<std::string>& files) {
      for (const auto& f : files)
        if (!same_bytes(a / f, b / f)) bad.push_back(strf("%s:%s", stage, f.c_str()));
    };

    bool ran = true;
    ran = ran && sh("gen-dataset --n-traj 15 --seed 7 --out " + q(work / "g"));
    ran = ran && sh("rerun --manifest " + q(work / "g/manifest.json") + " --out " + q(work / "g2"));
    compare("gen-dataset", work / "g", work / "g2", {"dataset.csv", "stats.json", "manifest.json"});

    for (const char* t : {"tau", "psi", "sreg"})
      ran = ran && sh(std::string("train --dataset ") + q(work / "g/dataset.csv") + " --target " +
                      t + " --seed 7 --out " + q(work / "m") + cfg_arg);
    ran = ran &&
          sh("rerun --manifest " + q(work / "m/n_tau.manifest.json") + " --out " + q(work / "m2"));
    compare("train", work / "m", work / "m2",
            {"n_tau.json", "n_tau.history.csv", "n_tau.report.json", "n_tau.manifest.json"});

    const std::string x0 = "\"1762.05,21.35,24.02,1.1274e-3,600\"";
    ran = ran && sh("simulate --models " + q(work / "m") + " --x0 " + x0 + " --out " +
                    q(work / "s1"));
    ran = ran &&
          sh("rerun --manifest " + q(work / "s1/manifest.json") + " --out " + q(work / "s2"));
    compare("simulate", work / "s1", work / "s2", {"report.json", "trace.csv", "manifest.json"});

    ran = ran && sh("montecarlo --models " + q(work / "m") + " --dataset " +
                    q(work / "g/dataset.csv") + " --n 3 --seed 5 --out " + q(work / "mc1"));
    ran = ran &&
          sh("rerun --manifest " + q(work / "mc1/manifest.json") + " --out " + q(work / "mc2"));
    compare("montecarlo", work / "mc1", work / "mc2",
            {"mc_report.json", "hist_vf.csv", "hist_theta.csv", "hist_ep.csv", "hist_penalty.csv",
             "manifest.json"});

    if (!ran) {
      const std::string tail = slurp(log);
      return {false, strf("a pipeline stage failed; log tail: %.200s",
                          tail.substr(tail.size() > 200 ? tail.size() - 200 : 0).c_str())};
    }
    std::string diff;
    for (const auto& s : bad) diff += (diff.empty() ? "" : ", ") + s;
    fs::remove_all(work);
    return {bad.empty(), bad.empty()
                             ? std::string("gen-dataset, train, simulate, montecarlo replay "
                                           "byte-identically from their manifests")
                             : "mismatched artifacts: " + diff};
  });

  std::printf("%s: %d of 11 criteria failed\n", g_failures == 0 ? "PASS" : "FAIL", g_failures);
  return g_failures == 0 ? 0 : 1;
}
