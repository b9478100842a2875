#include "fopdg.h"

#include <array>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "core/config.hpp"
#include "core/dataset.hpp"
#include "core/dynamics.hpp"
#include "core/error.hpp"
#include "core/io_util.hpp"
#include "core/mlp.hpp"
#include "core/scaling.hpp"
#include "core/sha256.hpp"
#include "core/shooting.hpp"
#include "core/sim.hpp"

struct fopdg_config {
  fopdg::Config cfg;
};

struct fopdg_guidance {
  fopdg::GuidanceModels models;
};

namespace {

constexpr double kPi = 3.14159265358979323846;

thread_local std::string g_last_error;

fopdg_status map_code(fopdg::ErrorCode c) {
  using fopdg::ErrorCode;
  switch (c) {
    case ErrorCode::ok: return FOPDG_OK;
    case ErrorCode::invalid_argument: return FOPDG_E_INVALID;
    case ErrorCode::io: return FOPDG_E_IO;
    case ErrorCode::parse: return FOPDG_E_PARSE;
    case ErrorCode::singular_steering: return FOPDG_E_SINGULAR;
    case ErrorCode::non_finite: return FOPDG_E_NONFINITE;
    case ErrorCode::integrator_failure: return FOPDG_E_INTEGRATOR;
    case ErrorCode::sampling_exhausted: return FOPDG_E_SAMPLING;
    case ErrorCode::training_failure: return FOPDG_E_TRAINING;
    case ErrorCode::no_convergence: return FOPDG_E_NOCONV;
  }
  return FOPDG_E_UNKNOWN;
}

fopdg_status fail(fopdg_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
fopdg_status guarded(F&& f) {
  try {
    return f();
  } catch (const fopdg::Error& e) {
    return fail(map_code(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(FOPDG_E_PARSE, e.what());
  } catch (const std::exception& e) {
    return fail(FOPDG_E_UNKNOWN, e.what());
  } catch (...) {
    return fail(FOPDG_E_UNKNOWN, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

fopdg::LanderState state_from(const double x[5]) {
  return {x[0], x[1], x[2], x[3], x[4]};
}

fopdg::ShootingUnknowns unknowns_from(const double z[6]) {
  fopdg::ShootingUnknowns u;
  u.p0 = {z[0], z[1], z[2], z[3], z[4]};
  u.tf = z[5];
  return u;
}

void unknowns_to(const fopdg::ShootingUnknowns& u, double z[6]) {
  z[0] = u.p0.p_r;
  z[1] = u.p0.p_v;
  z[2] = u.p0.p_theta;
  z[3] = u.p0.p_omega;
  z[4] = u.p0.p_m;
  z[5] = u.tf;
}

nlohmann::ordered_json solution_to_json(const fopdg::ShootingSolution& sol,
                                        const fopdg::ScalingConstants& scal) {
  nlohmann::ordered_json j;
  j["converged"] = sol.converged;
  j["res_norm"] = sol.res_norm;
  nlohmann::ordered_json z;
  z["p_r"] = sol.z.p0.p_r;
  z["p_v"] = sol.z.p0.p_v;
  z["p_theta"] = sol.z.p0.p_theta;
  z["p_omega"] = sol.z.p0.p_omega;
  z["p_m"] = sol.z.p0.p_m;
  z["tf_bar"] = sol.z.tf;
  z["tf_s"] = sol.z.tf * scal.T_ref;
  j["z"] = std::move(z);
  nlohmann::ordered_json stages = nlohmann::ordered_json::array();
  for (const auto& st : sol.stages) {
    nlohmann::ordered_json sj;
    sj["delta"] = st.delta;
    sj["iters"] = st.iters;
    sj["res_norm"] = st.res_norm;
    sj["converged"] = st.converged;
    stages.push_back(std::move(sj));
  }
  j["stages"] = std::move(stages);
  if (sol.converged) {
    j["fuel_kg"] = sol.fuel_bar * scal.M_ref;
    j["pm_tf"] = sol.pm_tf;
    j["max_abs_H"] = sol.max_abs_H;
    nlohmann::ordered_json sw = nlohmann::ordered_json::array();
    for (double s : sol.switch_times) sw.push_back(s * scal.T_ref);
    j["switch_times_s"] = std::move(sw);
    nlohmann::ordered_json xf;
    xf["r_m"] = sol.x_final.r * scal.L_ref;
    xf["v_mps"] = sol.x_final.v * scal.V_ref;
    xf["theta_deg"] = sol.x_final.theta * 180.0 / kPi;
    xf["omega_radps"] = sol.x_final.omega / scal.T_ref;
    xf["m_kg"] = sol.x_final.m * scal.M_ref;
    j["x_final"] = std::move(xf);
  }
  return j;
}

std::vector<fopdg::TraceRow> reconstruction_trace(const fopdg::ShootingSolution& sol,
                                                  const fopdg::ScalingConstants& scal) {
  std::vector<fopdg::TraceRow> rows;
  rows.reserve(sol.records.size());
  for (const auto& rec : sol.records) {
    fopdg::TraceRow row;
    row.t_s = rec.tau * scal.T_ref;
    row.r_m = rec.x.r * scal.L_ref;
    row.v_mps = rec.x.v * scal.V_ref;
    row.theta_deg = rec.x.theta * 180.0 / kPi;
    row.omega_radps = rec.x.omega / scal.T_ref;
    row.m_kg = rec.x.m * scal.M_ref;
    row.u = rec.u;
    row.psi_rad = rec.psi;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

extern "C" {

const char* fopdg_version(void) { return "0.1.0"; }

const char* fopdg_status_string(fopdg_status s) {
  switch (s) {
    case FOPDG_OK: return "ok";
    case FOPDG_E_INVALID: return "invalid_argument";
    case FOPDG_E_IO: return "io";
    case FOPDG_E_PARSE: return "parse";
    case FOPDG_E_SINGULAR: return "singular_steering";
    case FOPDG_E_NONFINITE: return "non_finite";
    case FOPDG_E_INTEGRATOR: return "integrator_failure";
    case FOPDG_E_SAMPLING: return "sampling_exhausted";
    case FOPDG_E_TRAINING: return "training_failure";
    case FOPDG_E_NOCONV: return "no_convergence";
    case FOPDG_E_UNKNOWN: break;
  }
  return "unknown";
}

const char* fopdg_last_error(void) { return g_last_error.c_str(); }

void fopdg_string_free(char* s) { delete[] s; }

fopdg_status fopdg_config_create(fopdg_config** out) {
  if (!out) return fail(FOPDG_E_INVALID, "config_create: null output pointer");
  return guarded([&] {
    *out = new fopdg_config{};
    return FOPDG_OK;
  });
}

fopdg_status fopdg_config_load(const char* path, fopdg_config** out) {
  if (!path || !out) return fail(FOPDG_E_INVALID, "config_load: null argument");
  return guarded([&] {
    auto cfg = fopdg::load_config(path);
    *out = new fopdg_config{std::move(cfg)};
    return FOPDG_OK;
  });
}

fopdg_status fopdg_config_from_json(const char* json_text, fopdg_config** out) {
  if (!json_text || !out) return fail(FOPDG_E_INVALID, "config_from_json: null argument");
  return guarded([&] {
    auto cfg = fopdg::config_from_json(nlohmann::json::parse(json_text));
    *out = new fopdg_config{std::move(cfg)};
    return FOPDG_OK;
  });
}

fopdg_status fopdg_config_set(fopdg_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return fail(FOPDG_E_INVALID, "config_set: null argument");
  return guarded([&] {
    fopdg::config_set(cfg->cfg, key, value);
    return FOPDG_OK;
  });
}

fopdg_status fopdg_config_to_json(const fopdg_config* cfg, char** out_json) {
  if (!cfg || !out_json) return fail(FOPDG_E_INVALID, "config_to_json: null argument");
  return guarded([&] {
    *out_json = dup_string(fopdg::config_to_json(cfg->cfg).dump(2));
    return FOPDG_OK;
  });
}

fopdg_status fopdg_config_validate(const fopdg_config* cfg) {
  if (!cfg) return fail(FOPDG_E_INVALID, "config_validate: null argument");
  return guarded([&] {
    fopdg::validate(cfg->cfg);
    return FOPDG_OK;
  });
}

void fopdg_config_free(fopdg_config* cfg) { delete cfg; }

fopdg_status fopdg_sha256_file(const char* path, char out_hex[65]) {
  if (!path || !out_hex) return fail(FOPDG_E_INVALID, "sha256_file: null argument");
  return guarded([&] {
    const std::string hex = fopdg::sha256_file(path);
    std::memcpy(out_hex, hex.c_str(), 65);
    return FOPDG_OK;
  });
}

fopdg_status fopdg_sha256_bytes(const void* data, size_t n, char out_hex[65]) {
  if ((!data && n > 0) || !out_hex) return fail(FOPDG_E_INVALID, "sha256_bytes: null argument");
  return guarded([&] {
    const std::string hex = fopdg::sha256_hex(data, n);
    std::memcpy(out_hex, hex.c_str(), 65);
    return FOPDG_OK;
  });
}

fopdg_status fopdg_generate_dataset(const fopdg_config* cfg, uint64_t n_traj, uint64_t seed,
                                    const char* csv_path, const char* stats_json_path) {
  if (!cfg || !csv_path || !stats_json_path)
    return fail(FOPDG_E_INVALID, "generate_dataset: null argument");
  return guarded([&] {
    fopdg::validate(cfg->cfg);
    const auto ds = fopdg::build_dataset(cfg->cfg, static_cast<std::size_t>(n_traj), seed);
    fopdg::write_dataset_csv(csv_path, ds.rows);
    fopdg::write_text_file(stats_json_path, fopdg::stats_to_json(ds).dump(2) + "\n");
    return FOPDG_OK;
  });
}

fopdg_status fopdg_train(const fopdg_config* cfg, const char* dataset_csv, const char* target,
                         uint64_t seed, const char* model_json_path,
                         const char* history_csv_path, const char* report_json_path) {
  if (!cfg || !dataset_csv || !target || !model_json_path)
    return fail(FOPDG_E_INVALID, "train: null argument");
  return guarded([&] {
    fopdg::validate(cfg->cfg);
    const auto rows = fopdg::read_dataset_csv(dataset_csv);
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    fopdg::dataset_matrix(rows, target, X, y);
    const auto arch = fopdg::arch_for_target(cfg->cfg.train, target);
    auto tr = fopdg::train_mlp(X, y, arch, cfg->cfg.train, seed);
    tr.model.target = target;
    tr.model.dataset_sha256 = fopdg::sha256_file(dataset_csv);
    tr.model.seed = seed;
    fopdg::save_model(model_json_path, tr.model);
    if (history_csv_path) fopdg::write_text_file(history_csv_path, fopdg::history_csv(tr.report));
    if (report_json_path)
      fopdg::write_text_file(report_json_path, fopdg::report_to_json(tr.report).dump(2) + "\n");
    return FOPDG_OK;
  });
}

fopdg_status fopdg_guidance_load(const char* models_dir, fopdg_guidance** out) {
  if (!models_dir || !out) return fail(FOPDG_E_INVALID, "guidance_load: null argument");
  return guarded([&] {
    namespace fs = std::filesystem;
    const std::array<std::pair<const char*, const char*>, 3> wanted = {
        {{"n_tau.json", "tau"}, {"n_psi.json", "psi"}, {"n_sreg.json", "sreg"}}};
    std::string missing;
    for (const auto& [name, _] : wanted) {
      if (!fs::exists(fs::path(models_dir) / name)) {
        if (!missing.empty()) missing += ", ";
        missing += name;
      }
    }
    if (!missing.empty())
      throw fopdg::Error(fopdg::ErrorCode::io,
                         "missing model files in '" + std::string(models_dir) + "': " + missing);
    auto g = std::make_unique<fopdg_guidance>();
    fopdg::MlpModel* slots[3] = {&g->models.n_tau, &g->models.n_psi, &g->models.n_sreg};
    for (int i = 0; i < 3; ++i) {
      *slots[i] = fopdg::load_model((fs::path(models_dir) / wanted[i].first).string());
      if (!slots[i]->target.empty() && slots[i]->target != wanted[i].second)
        throw fopdg::Error(fopdg::ErrorCode::invalid_argument,
                           std::string(wanted[i].first) + " was trained for target '" +
                               slots[i]->target + "', expected '" + wanted[i].second + "'");
    }
    *out = g.release();
    return FOPDG_OK;
  });
}

void fopdg_guidance_free(fopdg_guidance* g) { delete g; }

fopdg_status fopdg_guidance_command(const fopdg_guidance* g, const fopdg_config* cfg,
                                    const double x_si[5], double* u, double* psi_rad) {
  if (!g || !cfg || !x_si || !u || !psi_rad)
    return fail(FOPDG_E_INVALID, "guidance_command: null argument");
  return guarded([&] {
    const auto scal = fopdg::make_scaling(cfg->cfg.phys);
    const auto cmd = fopdg::guidance_step(fopdg::scale_state(state_from(x_si), scal), g->models);
    *u = cmd.u;
    *psi_rad = cmd.psi;
    return FOPDG_OK;
  });
}

fopdg_status fopdg_guidance_time_of_flight(const fopdg_guidance* g, const fopdg_config* cfg,
                                           const double x_si[5], double* tof_s) {
  if (!g || !cfg || !x_si || !tof_s)
    return fail(FOPDG_E_INVALID, "guidance_time_of_flight: null argument");
  return guarded([&] {
    const auto scal = fopdg::make_scaling(cfg->cfg.phys);
    *tof_s = g->models.n_tau.predict(fopdg::scale_state(state_from(x_si), scal)) * scal.T_ref;
    return FOPDG_OK;
  });
}

fopdg_status fopdg_simulate(const fopdg_config* cfg, const fopdg_guidance* g,
                            const double x0_si[5], const char* report_json_path,
                            const char* trace_csv_path) {
  if (!cfg || !g || !x0_si || !report_json_path)
    return fail(FOPDG_E_INVALID, "simulate: null argument");
  return guarded([&] {
    fopdg::validate(cfg->cfg);
    const auto rep = fopdg::simulate(state_from(x0_si), g->models, cfg->cfg.phys, cfg->cfg.sim);
    fopdg::write_text_file(report_json_path, fopdg::report_to_json(rep).dump(2) + "\n");
    if (trace_csv_path) fopdg::write_text_file(trace_csv_path, fopdg::trace_csv(rep.trace));
    return FOPDG_OK;
  });
}

fopdg_status fopdg_monte_carlo(const fopdg_config* cfg, const fopdg_guidance* g,
                               const char* dataset_csv, const char* stats_json, uint64_t n,
                               uint64_t seed, int with_oracle, const char* out_dir) {
  if (!cfg || !g || !dataset_csv || !out_dir)
    return fail(FOPDG_E_INVALID, "monte_carlo: null argument");
  if (with_oracle && !stats_json)
    return fail(FOPDG_E_INVALID, "monte_carlo: oracle mode needs the dataset stats file");
  return guarded([&] {
    namespace fs = std::filesystem;
    fopdg::validate(cfg->cfg);
    const auto rows = fopdg::read_dataset_csv(dataset_csv);
    std::map<std::uint32_t, fopdg::TrajectorySeed> seeds;
    if (with_oracle) seeds = fopdg::read_trajectory_seeds(stats_json);
    const auto agg = fopdg::monte_carlo(static_cast<std::size_t>(n), rows, seeds, g->models,
                                        cfg->cfg, with_oracle != 0, seed);
    const fs::path dir(out_dir);
    fopdg::write_text_file((dir / "mc_report.json").string(),
                           fopdg::aggregate_to_json(agg).dump(2) + "\n");
    fopdg::write_text_file((dir / "hist_vf.csv").string(), fopdg::histogram_csv(agg.h_vf));
    fopdg::write_text_file((dir / "hist_theta.csv").string(), fopdg::histogram_csv(agg.h_theta));
    fopdg::write_text_file((dir / "hist_ep.csv").string(), fopdg::histogram_csv(agg.h_ep));
    fopdg::write_text_file((dir / "hist_penalty.csv").string(),
                           fopdg::histogram_csv(agg.h_penalty));
    return FOPDG_OK;
  });
}

fopdg_status fopdg_oracle_seed_cold(const fopdg_config* cfg, const double x0_si[5],
                                    double z0[6]) {
  if (!cfg || !x0_si || !z0) return fail(FOPDG_E_INVALID, "oracle_seed_cold: null argument");
  return guarded([&] {
    const auto scal = fopdg::make_scaling(cfg->cfg.phys);
    const auto eng = fopdg::make_engine(cfg->cfg.phys);
    unknowns_to(fopdg::cold_start(fopdg::scale_state(state_from(x0_si), scal), eng), z0);
    return FOPDG_OK;
  });
}

fopdg_status fopdg_oracle_seed_bank(const fopdg_config* cfg, const double x0_si[5], uint64_t seed,
                                    double z0[6]) {
  if (!cfg || !x0_si || !z0) return fail(FOPDG_E_INVALID, "oracle_seed_bank: null argument");
  return guarded([&] {
    fopdg::validate(cfg->cfg);
    const auto scal = fopdg::make_scaling(cfg->cfg.phys);
    unknowns_to(fopdg::seed_from_bank(fopdg::scale_state(state_from(x0_si), scal), cfg->cfg, seed),
                z0);
    return FOPDG_OK;
  });
}

fopdg_status fopdg_oracle_seed_models(const fopdg_config* cfg, const fopdg_guidance* g,
                                      const double x0_si[5], double z0[6]) {
  if (!cfg || !g || !x0_si || !z0)
    return fail(FOPDG_E_INVALID, "oracle_seed_models: null argument");
  return guarded([&] {
    const auto scal = fopdg::make_scaling(cfg->cfg.phys);
    const auto eng = fopdg::make_engine(cfg->cfg.phys);
    unknowns_to(fopdg::seed_from_models(fopdg::scale_state(state_from(x0_si), scal), g->models,
                                        eng, cfg->cfg.gen.alpha),
                z0);
    return FOPDG_OK;
  });
}

fopdg_status fopdg_oracle_solve(const fopdg_config* cfg, const double x0_si[5], const double z0[6],
                                const char* solution_json_path, const char* trace_csv_path) {
  if (!cfg || !x0_si || !solution_json_path)
    return fail(FOPDG_E_INVALID, "oracle_solve: null argument");
  return guarded([&] {
    fopdg::validate(cfg->cfg);
    const auto scal = fopdg::make_scaling(cfg->cfg.phys);
    const auto eng = fopdg::make_engine(cfg->cfg.phys);
    const auto x0 = fopdg::scale_state(state_from(x0_si), scal);
    const auto z = z0 ? unknowns_from(z0) : fopdg::cold_start(x0, eng);
    const auto sol = fopdg::solve_shooting(x0, z, eng, cfg->cfg.oracle);
    fopdg::write_text_file(solution_json_path, solution_to_json(sol, scal).dump(2) + "\n");
    if (trace_csv_path && sol.converged)
      fopdg::write_text_file(trace_csv_path, fopdg::trace_csv(reconstruction_trace(sol, scal)));
    if (!sol.converged)
      return fail(FOPDG_E_NOCONV, "shooting solver did not converge (stage log written)");
    return FOPDG_OK;
  });
}

}  // extern "C"
