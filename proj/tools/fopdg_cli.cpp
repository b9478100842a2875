// Command-line front end: dataset generation, training, simulation,
// Monte-Carlo analysis, and the shooting oracle, each stamped with a
// replayable run manifest.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fopdg.h"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNoConvergence = 4;

constexpr double kPi = 3.14159265358979323846;

struct CliError {
  int code;
  std::string message;
};

[[noreturn]] void die(int code, const std::string& msg) { throw CliError{code, msg}; }

// Map a failing C-API status to an exit; NOCONV keeps its own code so
// callers can tell an unconverged solve from an I/O failure.
void check(fopdg_status s, int code_on_error = kExitRuntime) {
  if (s == FOPDG_OK) return;
  const std::string msg = std::string(fopdg_status_string(s)) + ": " + fopdg_last_error();
  die(s == FOPDG_E_NOCONV ? kExitNoConvergence : code_on_error, msg);
}

struct ConfigHandle {
  fopdg_config* h = nullptr;
  ConfigHandle() = default;
  ConfigHandle(const ConfigHandle&) = delete;
  ConfigHandle& operator=(const ConfigHandle&) = delete;
  ConfigHandle(ConfigHandle&& o) noexcept : h(o.h) { o.h = nullptr; }
  ~ConfigHandle() { fopdg_config_free(h); }
};

struct GuidanceHandle {
  fopdg_guidance* h = nullptr;
  GuidanceHandle() = default;
  GuidanceHandle(const GuidanceHandle&) = delete;
  GuidanceHandle& operator=(const GuidanceHandle&) = delete;
  GuidanceHandle(GuidanceHandle&& o) noexcept : h(o.h) { o.h = nullptr; }
  ~GuidanceHandle() { fopdg_guidance_free(h); }
};

// Resolved configuration: live handle plus the JSON embedded in manifests.
struct Resolved {
  ConfigHandle handle;
  ordered_json json;
  std::string path;  // as given on the command line; may be empty
};

Resolved resolve_config(const std::string& path) {
  Resolved r;
  r.path = path;
  if (!path.empty() && fs::exists(path)) {
    check(fopdg_config_load(path.c_str(), &r.handle.h), kExitUsage);
  } else {
    if (!path.empty())
      std::fprintf(stderr, "warning: config file '%s' not found, using defaults\n", path.c_str());
    check(fopdg_config_create(&r.handle.h), kExitUsage);
  }
  check(fopdg_config_validate(r.handle.h), kExitUsage);
  char* js = nullptr;
  check(fopdg_config_to_json(r.handle.h, &js), kExitUsage);
  r.json = ordered_json::parse(js);
  fopdg_string_free(js);
  return r;
}

Resolved config_from_embedded(const ordered_json& cfg_json, const std::string& path) {
  Resolved r;
  r.path = path;
  r.json = cfg_json;
  check(fopdg_config_from_json(cfg_json.dump().c_str(), &r.handle.h), kExitUsage);
  check(fopdg_config_validate(r.handle.h), kExitUsage);
  return r;
}

//
// small file helpers
//

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) die(kExitRuntime, "cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) die(kExitRuntime, "cannot write '" + p.string() + "'");
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!f) die(kExitRuntime, "cannot write '" + p.string() + "'");
}

std::string sha_file(const fs::path& p) {
  char hex[65];
  check(fopdg_sha256_file(p.string().c_str(), hex));
  return hex;
}

std::string sha_bytes(const std::string& s) {
  char hex[65];
  check(fopdg_sha256_bytes(s.data(), s.size(), hex));
  return hex;
}

ordered_json parse_json_file(const fs::path& p) {
  try {
    return ordered_json::parse(read_file(p));
  } catch (const nlohmann::json::exception& e) {
    die(kExitRuntime, "malformed JSON in '" + p.string() + "': " + e.what());
  }
}

//
// manifests
//

using InputList = std::vector<std::pair<std::string, std::string>>;

ordered_json make_manifest(const std::string& subcommand, std::uint64_t seed, const Resolved& cfg,
                           const ordered_json& params, const InputList& inputs,
                           const std::vector<std::string>& outputs) {
  ordered_json m;
  m["subcommand"] = subcommand;
  m["version"] = fopdg_version();
  m["seed"] = seed;
  m["config_path"] = cfg.path;
  m["config"] = cfg.json;
  m["params"] = params;
  ordered_json in = ordered_json::object();
  ordered_json hashes = ordered_json::object();
  for (const auto& [name, p] : inputs) {
    in[name] = p;
    hashes[name] = sha_file(p);
  }
  m["inputs"] = std::move(in);
  m["input_hashes"] = std::move(hashes);
  m["outputs"] = outputs;
  m["manifest_hash"] = sha_bytes(m.dump(2));
  return m;
}

// Stamp an artifact with the hash of the manifest that produced it.
void embed_hash(const fs::path& artifact, const std::string& hash, bool into_metadata) {
  auto j = parse_json_file(artifact);
  if (into_metadata)
    j["metadata"]["manifest_hash"] = hash;
  else
    j["manifest_hash"] = hash;
  write_file(artifact, j.dump(2) + "\n");
}

//
// argument parsing helpers
//

// "--x0 r_km,v_mps,theta_deg,omega_radps,m_kg" -> SI base units.
std::array<double, 5> parse_x0(const std::string& s) {
  std::array<double, 5> v{};
  std::istringstream is(s);
  std::string tok;
  int i = 0;
  while (std::getline(is, tok, ',')) {
    if (i >= 5) break;
    try {
      std::size_t used = 0;
      v[i] = std::stod(tok, &used);
      while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      die(kExitUsage, "--x0: bad number '" + tok + "'");
    }
    ++i;
  }
  if (i != 5 || std::getline(is, tok, ','))
    die(kExitUsage, "--x0 expects \"r_km,v_mps,theta_deg,omega_radps,m_kg\"");
  return {v[0] * 1000.0, v[1], v[2] * kPi / 180.0, v[3], v[4]};
}

void validate_x0(const std::array<double, 5>& x0_si, const Resolved& cfg) {
  for (double c : x0_si)
    if (!std::isfinite(c)) die(kExitUsage, "--x0: values must be finite");
  if (!(x0_si[0] > 0)) die(kExitUsage, "--x0: radius must be positive");
  const double m_dry = cfg.json.at("m_dry").get<double>();
  if (!(x0_si[4] > m_dry))
    die(kExitUsage, "--x0: mass must exceed the dry mass (" + std::to_string(m_dry) + " kg)");
}

InputList model_inputs(const std::string& models_dir) {
  InputList in;
  for (const char* name : {"n_tau.json", "n_psi.json", "n_sreg.json"})
    in.emplace_back(name, (fs::path(models_dir) / name).string());
  return in;
}

//
// subcommand runners (shared by the direct path and rerun)
//

int run_gen(const Resolved& cfg, std::uint64_t n_traj, std::uint64_t seed, const fs::path& out) {
  fs::create_directories(out);
  const fs::path csv = out / "dataset.csv";
  const fs::path stats = out / "stats.json";
  check(fopdg_generate_dataset(cfg.handle.h, n_traj, seed, csv.string().c_str(),
                               stats.string().c_str()));

  ordered_json params;
  params["n_traj"] = n_traj;
  const auto m = make_manifest("gen-dataset", seed, cfg, params, {}, {"dataset.csv", "stats.json"});
  write_file(out / "manifest.json", m.dump(2) + "\n");
  embed_hash(stats, m["manifest_hash"].get<std::string>(), false);

  const auto sj = parse_json_file(stats);
  std::printf("accepted %llu trajectories, %llu rows (%llu switch rows)\n",
              static_cast<unsigned long long>(sj.at("n_accepted").get<std::uint64_t>()),
              static_cast<unsigned long long>(sj.at("n_rows").get<std::uint64_t>()),
              static_cast<unsigned long long>(sj.at("n_switch_rows").get<std::uint64_t>()));
  std::printf("acceptance rate: %.4f\n", sj.at("acceptance_rate").get<double>());
  std::printf("switch census:\n");
  for (const auto& [label, count] : sj.at("census").items())
    std::printf("  %-12s %llu\n", label.c_str(),
                static_cast<unsigned long long>(count.get<std::uint64_t>()));
  std::printf("wrote %s\n", csv.string().c_str());
  return kExitOk;
}

int run_train(const Resolved& cfg, const std::string& dataset, const std::string& target,
              std::uint64_t seed, const fs::path& out) {
  if (!fs::exists(dataset)) die(kExitRuntime, "dataset '" + dataset + "' not found");
  fs::create_directories(out);
  const std::string base = "n_" + target;
  const fs::path model = out / (base + ".json");
  const fs::path history = out / (base + ".history.csv");
  const fs::path report = out / (base + ".report.json");
  check(fopdg_train(cfg.handle.h, dataset.c_str(), target.c_str(), seed, model.string().c_str(),
                    history.string().c_str(), report.string().c_str()));

  ordered_json params;
  params["target"] = target;
  const auto m = make_manifest(
      "train", seed, cfg, params, {{"dataset", dataset}},
      {base + ".json", base + ".history.csv", base + ".report.json"});
  write_file(out / (base + ".manifest.json"), m.dump(2) + "\n");
  const std::string hash = m["manifest_hash"].get<std::string>();
  embed_hash(model, hash, true);
  embed_hash(report, hash, false);

  const auto rj = parse_json_file(report);
  std::printf("target %s: %d epochs, stop reason %s\n", target.c_str(),
              rj.at("epochs").get<int>(), rj.at("stop_reason").get<std::string>().c_str());
  std::printf("mse train %.6e  val %.6e  test %.6e\n", rj.at("train_mse").get<double>(),
              rj.at("val_mse").get<double>(), rj.at("test_mse").get<double>());
  std::printf("wrote %s\n", model.string().c_str());
  return kExitOk;
}

int run_simulate(const Resolved& cfg, const std::string& models_dir, const std::string& x0_str,
                 const fs::path& out) {
  const auto x0 = parse_x0(x0_str);
  validate_x0(x0, cfg);
  GuidanceHandle g;
  check(fopdg_guidance_load(models_dir.c_str(), &g.h));
  fs::create_directories(out);
  const fs::path report = out / "report.json";
  const fs::path trace = out / "trace.csv";
  check(fopdg_simulate(cfg.handle.h, g.h, x0.data(), report.string().c_str(),
                       trace.string().c_str()));

  ordered_json params;
  params["x0"] = x0_str;
  params["models_dir"] = models_dir;
  const auto m = make_manifest("simulate", 0, cfg, params, model_inputs(models_dir),
                               {"report.json", "trace.csv"});
  write_file(out / "manifest.json", m.dump(2) + "\n");
  embed_hash(report, m["manifest_hash"].get<std::string>(), false);

  const auto rj = parse_json_file(report);
  std::printf("%s (%s)\n", rj.at("success").get<bool>() ? "success" : "failure",
              rj.at("reason").get<std::string>().c_str());
  std::printf("V_f %.4f m/s  e_p %.2f m  fuel %.3f kg\n", rj.at("vf_mps").get<double>(),
              rj.at("e_p_m").get<double>(), rj.at("fuel_kg").get<double>());
  std::printf("flight time %.2f s (predicted %.2f s)\n", rj.at("flight_time_s").get<double>(),
              rj.at("tof_pred_s").get<double>());
  if (!rj.at("in_distribution").get<bool>())
    std::printf("note: initial condition lies outside the training hull\n");
  return kExitOk;
}

int run_montecarlo(const Resolved& cfg, const std::string& models_dir, const std::string& dataset,
                   const std::string& stats, std::uint64_t n, bool oracle_on, std::uint64_t seed,
                   const fs::path& out) {
  if (!fs::exists(dataset)) die(kExitRuntime, "dataset '" + dataset + "' not found");
  if (oracle_on && !fs::exists(stats))
    die(kExitRuntime, "stats file '" + stats + "' not found (required by --oracle on)");
  GuidanceHandle g;
  check(fopdg_guidance_load(models_dir.c_str(), &g.h));
  fs::create_directories(out);
  check(fopdg_monte_carlo(cfg.handle.h, g.h, dataset.c_str(),
                          oracle_on ? stats.c_str() : nullptr, n, seed, oracle_on ? 1 : 0,
                          out.string().c_str()));

  ordered_json params;
  params["n"] = n;
  params["oracle"] = oracle_on ? "on" : "off";
  params["models_dir"] = models_dir;
  InputList inputs{{"dataset", dataset}};
  if (oracle_on) inputs.emplace_back("stats", stats);
  for (auto& mi : model_inputs(models_dir)) inputs.push_back(std::move(mi));
  const auto m = make_manifest("montecarlo", seed, cfg, params, inputs,
                               {"mc_report.json", "hist_vf.csv", "hist_theta.csv", "hist_ep.csv",
                                "hist_penalty.csv"});
  write_file(out / "manifest.json", m.dump(2) + "\n");
  embed_hash(out / "mc_report.json", m["manifest_hash"].get<std::string>(), false);

  const auto rj = parse_json_file(out / "mc_report.json");
  std::printf("%llu runs, %llu successes (rate %.3f)\n",
              static_cast<unsigned long long>(rj.at("n").get<std::uint64_t>()),
              static_cast<unsigned long long>(rj.at("n_success").get<std::uint64_t>()),
              rj.at("success_rate").get<double>());
  if (oracle_on)
    std::printf("oracle converged on %llu of %llu attempts\n",
                static_cast<unsigned long long>(rj.at("oracle_converged").get<std::uint64_t>()),
                static_cast<unsigned long long>(rj.at("oracle_attempts").get<std::uint64_t>()));
  std::printf("wrote %s\n", (out / "mc_report.json").string().c_str());
  return kExitOk;
}

int run_oracle(const Resolved& cfg, const std::string& x0_str, const std::string& seed_from,
               const std::string& models_dir, std::uint64_t seed, const fs::path& out) {
  const auto x0 = parse_x0(x0_str);
  validate_x0(x0, cfg);

  double z0[6];
  InputList inputs;
  if (seed_from == "cold") {
    check(fopdg_oracle_seed_cold(cfg.handle.h, x0.data(), z0));
  } else if (seed_from == "trajectory") {
    check(fopdg_oracle_seed_bank(cfg.handle.h, x0.data(), seed, z0));
  } else {  // models
    if (models_dir.empty()) die(kExitUsage, "--seed-from models requires --models");
    GuidanceHandle g;
    check(fopdg_guidance_load(models_dir.c_str(), &g.h));
    check(fopdg_oracle_seed_models(cfg.handle.h, g.h, x0.data(), z0));
    inputs = model_inputs(models_dir);
  }

  fs::create_directories(out);
  const fs::path solution = out / "solution.json";
  const fs::path trace = out / "trace.csv";
  const fopdg_status st = fopdg_oracle_solve(cfg.handle.h, x0.data(), z0,
                                             solution.string().c_str(), trace.string().c_str());
  if (st != FOPDG_OK && st != FOPDG_E_NOCONV) check(st);
  const bool converged = st == FOPDG_OK;

  ordered_json params;
  params["x0"] = x0_str;
  params["seed_from"] = seed_from;
  if (!models_dir.empty()) params["models_dir"] = models_dir;
  std::vector<std::string> outputs{"solution.json"};
  if (converged) outputs.push_back("trace.csv");
  const auto m = make_manifest("oracle", seed, cfg, params, inputs, outputs);
  write_file(out / "manifest.json", m.dump(2) + "\n");
  embed_hash(solution, m["manifest_hash"].get<std::string>(), false);

  const auto sj = parse_json_file(solution);
  if (converged) {
    std::printf("converged: tf %.4f s, fuel %.4f kg, residual %.3e\n",
                sj.at("z").at("tf_s").get<double>(), sj.at("fuel_kg").get<double>(),
                sj.at("res_norm").get<double>());
  } else {
    std::printf("did not converge (%zu stages, last residual %.3e)\n", sj.at("stages").size(),
                sj.at("res_norm").get<double>());
    return kExitNoConvergence;
  }
  return kExitOk;
}

int run_rerun(const fs::path& manifest_path, const fs::path& out) {
  const auto m = parse_json_file(manifest_path);
  for (const char* field : {"subcommand", "seed", "config_path", "config", "params", "inputs",
                            "input_hashes", "outputs"})
    if (!m.contains(field)) die(kExitUsage, std::string("manifest: missing field '") + field + "'");

  // Inputs must be bit-for-bit what the original run saw.
  for (const auto& [name, path] : m.at("inputs").items()) {
    const std::string p = path.get<std::string>();
    if (!fs::exists(p)) die(kExitRuntime, "manifest input '" + name + "' missing: " + p);
    const std::string want = m.at("input_hashes").at(name).get<std::string>();
    if (sha_file(p) != want)
      die(kExitRuntime, "manifest input '" + name + "' changed since the manifest was written: " + p);
  }

  const auto cfg = config_from_embedded(m.at("config"), m.at("config_path").get<std::string>());
  const std::string sub = m.at("subcommand").get<std::string>();
  const auto seed = m.at("seed").get<std::uint64_t>();
  const auto& params = m.at("params");

  if (sub == "gen-dataset")
    return run_gen(cfg, params.at("n_traj").get<std::uint64_t>(), seed, out);
  if (sub == "train")
    return run_train(cfg, m.at("inputs").at("dataset").get<std::string>(),
                     params.at("target").get<std::string>(), seed, out);
  if (sub == "simulate")
    return run_simulate(cfg, params.at("models_dir").get<std::string>(),
                        params.at("x0").get<std::string>(), out);
  if (sub == "montecarlo") {
    const bool oracle_on = params.at("oracle").get<std::string>() == "on";
    const std::string stats =
        oracle_on ? m.at("inputs").at("stats").get<std::string>() : std::string();
    return run_montecarlo(cfg, params.at("models_dir").get<std::string>(),
                          m.at("inputs").at("dataset").get<std::string>(), stats,
                          params.at("n").get<std::uint64_t>(), oracle_on, seed, out);
  }
  if (sub == "oracle")
    return run_oracle(cfg, params.at("x0").get<std::string>(),
                      params.at("seed_from").get<std::string>(),
                      params.value("models_dir", std::string()), seed, out);
  die(kExitUsage, "manifest: unknown subcommand '" + sub + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fuel-optimal powered-descent guidance toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", fopdg_version());

  std::string config_path, out_dir, dataset, stats_path, target, models_dir, x0_str;
  std::string seed_from = "cold", oracle_mode = "off", manifest_path;
  std::uint64_t n_traj = 100, n_runs = 100, seed = 0;

  auto* gen = app.add_subcommand("gen-dataset", "Generate an optimal-trajectory dataset");
  gen->add_option("--n-traj", n_traj, "Accepted trajectories to generate")->required();
  gen->add_option("--seed", seed, "RNG seed (default 0)");
  gen->add_option("--out", out_dir, "Output directory")->required();
  gen->add_option("--config", config_path, "Config file (key = value)");

  auto* train = app.add_subcommand("train", "Train one guidance network");
  train->add_option("--dataset", dataset, "Dataset CSV")->required();
  train->add_option("--target", target, "Network target")
      ->required()
      ->check(CLI::IsMember({"tau", "psi", "sreg", "s"}));
  train->add_option("--seed", seed, "RNG seed (default 0)");
  train->add_option("--out", out_dir, "Output directory")->required();
  train->add_option("--config", config_path, "Config file (key = value)");

  auto* sim = app.add_subcommand("simulate", "Closed-loop descent under neural guidance");
  sim->add_option("--models", models_dir, "Directory with n_tau.json, n_psi.json, n_sreg.json")
      ->required();
  sim->add_option("--x0", x0_str, "Initial state \"r_km,v_mps,theta_deg,omega_radps,m_kg\"")
      ->required();
  sim->add_option("--out", out_dir, "Output directory")->required();
  sim->add_option("--config", config_path, "Config file (key = value)");

  auto* mc = app.add_subcommand("montecarlo", "Monte-Carlo campaign over dataset states");
  mc->add_option("--models", models_dir, "Directory with the three model files")->required();
  mc->add_option("--dataset", dataset, "Dataset CSV supplying initial conditions")->required();
  mc->add_option("--stats", stats_path, "Stats JSON (default: stats.json beside the dataset)");
  mc->add_option("--n", n_runs, "Number of runs")->required();
  mc->add_option("--seed", seed, "RNG seed (default 0)");
  mc->add_option("--oracle", oracle_mode, "Run the shooting oracle per case")
      ->check(CLI::IsMember({"on", "off"}));
  mc->add_option("--out", out_dir, "Output directory")->required();
  mc->add_option("--config", config_path, "Config file (key = value)");

  auto* orc = app.add_subcommand("oracle", "Indirect shooting solve for one initial state");
  orc->add_option("--x0", x0_str, "Initial state \"r_km,v_mps,theta_deg,omega_radps,m_kg\"")
      ->required();
  orc->add_option("--seed-from", seed_from, "Warm-start strategy")
      ->check(CLI::IsMember({"cold", "trajectory", "models"}));
  orc->add_option("--models", models_dir, "Model directory (for --seed-from models)");
  orc->add_option("--seed", seed, "RNG seed for --seed-from trajectory (default 0)");
  orc->add_option("--out", out_dir, "Output directory")->required();
  orc->add_option("--config", config_path, "Config file (key = value)");

  auto* rerun = app.add_subcommand("rerun", "Replay a run manifest byte-identically");
  rerun->add_option("--manifest", manifest_path, "Manifest JSON from a previous run")->required();
  rerun->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return run_gen(resolve_config(config_path), n_traj, seed, out_dir);
    if (train->parsed())
      return run_train(resolve_config(config_path), dataset, target, seed, out_dir);
    if (sim->parsed()) return run_simulate(resolve_config(config_path), models_dir, x0_str, out_dir);
    if (mc->parsed()) {
      if (stats_path.empty())
        stats_path = (fs::path(dataset).parent_path() / "stats.json").string();
      return run_montecarlo(resolve_config(config_path), models_dir, dataset, stats_path, n_runs,
                            oracle_mode == "on", seed, out_dir);
    }
    if (orc->parsed())
      return run_oracle(resolve_config(config_path), x0_str, seed_from, models_dir, seed, out_dir);
    if (rerun->parsed()) return run_rerun(manifest_path, out_dir);
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.message.c_str());
    return e.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
