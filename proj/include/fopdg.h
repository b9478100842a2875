#ifndef FOPDG_H
#define FOPDG_H

/*
 * C interface to the fuel-optimal powered-descent guidance toolkit.
 *
 * All functions return fopdg_status; on failure fopdg_last_error()
 * holds a human-readable diagnostic for the calling thread. Handles
 * are opaque and freed with their matching *_free function.
 *
 * States cross this boundary in SI base units as double[5]:
 *   { radius m, radial velocity m/s, downrange angle rad,
 *     angular velocity rad/s, mass kg }.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FOPDG_API __declspec(dllexport)
#else
#define FOPDG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fopdg_status {
  FOPDG_OK = 0,
  FOPDG_E_INVALID = 1,    /* bad argument or precondition */
  FOPDG_E_IO = 2,         /* file not found / unreadable / unwritable */
  FOPDG_E_PARSE = 3,      /* malformed config, CSV, or JSON */
  FOPDG_E_SINGULAR = 4,   /* singular steering costates */
  FOPDG_E_NONFINITE = 5,  /* NaN or infinity encountered */
  FOPDG_E_INTEGRATOR = 6, /* adaptive integration failed */
  FOPDG_E_SAMPLING = 7,   /* costate sampling kept rejecting */
  FOPDG_E_TRAINING = 8,   /* optimizer diverged */
  FOPDG_E_NOCONV = 9,     /* shooting solver did not converge */
  FOPDG_E_UNKNOWN = 10
} fopdg_status;

typedef struct fopdg_config fopdg_config;
typedef struct fopdg_guidance fopdg_guidance;

/* Library version string, e.g. "0.1.0". */
FOPDG_API const char* fopdg_version(void);

/* Stable name for a status code, e.g. "ok", "io". */
FOPDG_API const char* fopdg_status_string(fopdg_status s);

/* Last error message on this thread; empty string if none. The pointer
 * stays valid until the next failing call on the same thread. */
FOPDG_API const char* fopdg_last_error(void);

/* Frees strings returned through char** out-parameters. */
FOPDG_API void fopdg_string_free(char* s);

/*
 * Configuration. Keys and values use the same "key = value" vocabulary
 * as the config file; fopdg_config_to_json emits the fully resolved
 * configuration and fopdg_config_from_json accepts that JSON back.
 */
FOPDG_API fopdg_status fopdg_config_create(fopdg_config** out);
FOPDG_API fopdg_status fopdg_config_load(const char* path, fopdg_config** out);
FOPDG_API fopdg_status fopdg_config_from_json(const char* json_text, fopdg_config** out);
FOPDG_API fopdg_status fopdg_config_set(fopdg_config* cfg, const char* key, const char* value);
FOPDG_API fopdg_status fopdg_config_to_json(const fopdg_config* cfg, char** out_json);
FOPDG_API fopdg_status fopdg_config_validate(const fopdg_config* cfg);
FOPDG_API void fopdg_config_free(fopdg_config* cfg);

/* SHA-256 as 64 hex chars plus NUL. */
FOPDG_API fopdg_status fopdg_sha256_file(const char* path, char out_hex[65]);
FOPDG_API fopdg_status fopdg_sha256_bytes(const void* data, size_t n, char out_hex[65]);

/*
 * Dataset generation: backward-propagates n_traj accepted extremals and
 * writes the training table to csv_path and the generation statistics
 * (counters, switch census, per-trajectory seeds) to stats_json_path.
 */
FOPDG_API fopdg_status fopdg_generate_dataset(const fopdg_config* cfg, uint64_t n_traj,
                                              uint64_t seed, const char* csv_path,
                                              const char* stats_json_path);

/*
 * Training. target is one of "tau", "psi", "sreg", "s". Writes the model
 * JSON; history_csv_path and report_json_path may be NULL to skip those
 * artifacts.
 */
FOPDG_API fopdg_status fopdg_train(const fopdg_config* cfg, const char* dataset_csv,
                                   const char* target, uint64_t seed,
                                   const char* model_json_path, const char* history_csv_path,
                                   const char* report_json_path);

/*
 * Guidance model bundle: models_dir must hold n_tau.json, n_psi.json,
 * and n_sreg.json. A missing file fails with FOPDG_E_IO and an error
 * message listing every missing artifact.
 */
FOPDG_API fopdg_status fopdg_guidance_load(const char* models_dir, fopdg_guidance** out);
FOPDG_API void fopdg_guidance_free(fopdg_guidance* g);

/* One guidance evaluation at an SI state: throttle (0 or 1) and thrust angle. */
FOPDG_API fopdg_status fopdg_guidance_command(const fopdg_guidance* g, const fopdg_config* cfg,
                                              const double x_si[5], double* u, double* psi_rad);

/* Predicted time of flight in seconds at an SI state. */
FOPDG_API fopdg_status fopdg_guidance_time_of_flight(const fopdg_guidance* g,
                                                     const fopdg_config* cfg,
                                                     const double x_si[5], double* tof_s);

/*
 * Closed-loop descent simulation under zero-order-hold neural guidance.
 * Writes the landing report JSON; trace_csv_path may be NULL.
 */
FOPDG_API fopdg_status fopdg_simulate(const fopdg_config* cfg, const fopdg_guidance* g,
                                      const double x0_si[5], const char* report_json_path,
                                      const char* trace_csv_path);

/*
 * Monte-Carlo campaign over initial conditions drawn from dataset rows.
 * stats_json is required when with_oracle is nonzero (it carries the
 * warm-start seeds) and may be NULL otherwise. Writes into out_dir:
 * mc_report.json, hist_vf.csv, hist_theta.csv, hist_ep.csv,
 * hist_penalty.csv. The directory must already exist.
 */
FOPDG_API fopdg_status fopdg_monte_carlo(const fopdg_config* cfg, const fopdg_guidance* g,
                                         const char* dataset_csv, const char* stats_json,
                                         uint64_t n, uint64_t seed, int with_oracle,
                                         const char* out_dir);

/*
 * Indirect shooting oracle. Unknowns z = { p_r, p_v, p_theta, p_omega,
 * p_m, tf_bar } in dimensionless units. The seed_* helpers fill z from
 * a fixed heuristic, from a freshly generated extremal bank, or from
 * the neural models' predictions.
 *
 * fopdg_oracle_solve writes the solution JSON (stage log included even
 * on failure) and, when trace_csv_path is non-NULL and the solve
 * converged, the reconstructed bang-bang trajectory. Non-convergence
 * returns FOPDG_E_NOCONV after writing the report.
 */
FOPDG_API fopdg_status fopdg_oracle_seed_cold(const fopdg_config* cfg, const double x0_si[5],
                                              double z0[6]);
FOPDG_API fopdg_status fopdg_oracle_seed_bank(const fopdg_config* cfg, const double x0_si[5],
                                              uint64_t seed, double z0[6]);
FOPDG_API fopdg_status fopdg_oracle_seed_models(const fopdg_config* cfg, const fopdg_guidance* g,
                                                const double x0_si[5], double z0[6]);
FOPDG_API fopdg_status fopdg_oracle_solve(const fopdg_config* cfg, const double x0_si[5],
                                          const double z0[6], const char* solution_json_path,
                                          const char* trace_csv_path);

#ifdef __cplusplus
}
#endif

#endif /* FOPDG_H */
