#include "core/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "core/error.hpp"

namespace fopdg {

namespace {

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw Error(ErrorCode::parse, "config key '" + key + "': bad numeric value '" + v + "'");
  return out;
}

int parse_int(const std::string& key, const std::string& v) {
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw Error(ErrorCode::parse, "config key '" + key + "': bad integer value '" + v + "'");
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::string item;
  std::istringstream is(v);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (item.empty())
      throw Error(ErrorCode::parse, "config key '" + key + "': empty list entry");
    out.push_back(parse_int(key, item));
  }
  if (out.empty())
    throw Error(ErrorCode::parse, "config key '" + key + "': empty list");
  return out;
}

using Setter = std::function<void(Config&, const std::string&, const std::string&)>;

#define NUM_KEY(field) \
  [](Config& c, const std::string& k, const std::string& v) { c.field = parse_double(k, v); }
#define INT_KEY(field) \
  [](Config& c, const std::string& k, const std::string& v) { c.field = parse_int(k, v); }
#define LIST_KEY(field) \
  [](Config& c, const std::string& k, const std::string& v) { c.field = parse_int_list(k, v); }

const std::map<std::string, Setter>& key_table() {
  static const std::map<std::string, Setter> table = {
      {"R0", NUM_KEY(phys.R0)},
      {"mu", NUM_KEY(phys.mu)},
      {"Isp", NUM_KEY(phys.Isp)},
      {"ge", NUM_KEY(phys.ge)},
      {"Tm", NUM_KEY(phys.Tm)},
      {"m0", NUM_KEY(phys.m0)},
      {"m_dry", NUM_KEY(phys.m_dry)},

      {"sample_pr_min", NUM_KEY(sampling.pr_min)},
      {"sample_pr_max", NUM_KEY(sampling.pr_max)},
      {"sample_pv_min", NUM_KEY(sampling.pv_min)},
      {"sample_pv_max", NUM_KEY(sampling.pv_max)},
      {"sample_ptheta_min", NUM_KEY(sampling.ptheta_min)},
      {"sample_ptheta_max", NUM_KEY(sampling.ptheta_max)},
      {"sample_pomega_min", NUM_KEY(sampling.pomega_min)},
      {"sample_pomega_max", NUM_KEY(sampling.pomega_max)},

      {"tau_max", NUM_KEY(gen.tau_max)},
      {"grid_dt", NUM_KEY(gen.grid_dt)},
      {"r_escape", NUM_KEY(gen.r_escape)},
      {"switch_tol", NUM_KEY(gen.switch_tol)},
      {"ode_abs_tol", NUM_KEY(gen.abs_tol)},
      {"ode_rel_tol", NUM_KEY(gen.rel_tol)},
      {"alpha", NUM_KEY(gen.alpha)},

      {"train_max_epochs", INT_KEY(train.max_epochs)},
      {"train_loss_goal", NUM_KEY(train.loss_goal)},
      {"train_patience", INT_KEY(train.patience)},
      {"train_optimizer",
       [](Config& c, const std::string& k, const std::string& v) {
         if (v != "lm" && v != "adam")
           throw Error(ErrorCode::parse, "config key '" + k + "': expected 'lm' or 'adam'");
         c.train.optimizer = v;
       }},
      {"train_max_rows", INT_KEY(train.max_rows)},
      {"split_train", NUM_KEY(train.split_train)},
      {"split_val", NUM_KEY(train.split_val)},
      {"train_lambda0", NUM_KEY(train.lambda0)},
      {"adam_lr", NUM_KEY(train.adam_lr)},
      {"tau_hidden", LIST_KEY(train.tau_hidden)},
      {"angle_hidden", LIST_KEY(train.angle_hidden)},
      {"switch_hidden", LIST_KEY(train.switch_hidden)},

      {"sim_update_period_s", NUM_KEY(sim.update_period_s)},
      {"sim_stop_altitude_m", NUM_KEY(sim.stop_altitude_m)},
      {"sim_handoff_altitude_m", NUM_KEY(sim.handoff_altitude_m)},
      {"sim_success_vf_mps", NUM_KEY(sim.success_vf_mps)},
      {"sim_horizon_factor", NUM_KEY(sim.horizon_factor)},
      {"sim_min_horizon_s", NUM_KEY(sim.min_horizon_s)},
      {"sim_deadband", NUM_KEY(sim.deadband)},
      {"sim_abs_tol", NUM_KEY(sim.abs_tol)},
      {"sim_rel_tol", NUM_KEY(sim.rel_tol)},

      {"delta_start", NUM_KEY(oracle.delta_start)},
      {"delta_end", NUM_KEY(oracle.delta_end)},
      {"oracle_tol", NUM_KEY(oracle.tol)},
      {"oracle_max_iter", INT_KEY(oracle.max_iter)},
      {"oracle_fd_step", NUM_KEY(oracle.fd_step)},
  };
  return table;
}

#undef NUM_KEY
#undef INT_KEY
#undef LIST_KEY

}  // namespace

void config_set(Config& cfg, const std::string& key, const std::string& value) {
  auto it = key_table().find(key);
  if (it == key_table().end())
    throw Error(ErrorCode::parse, "unknown config key '" + key + "'");
  it->second(cfg, key, trim(value));
}

Config parse_config(const std::string& text, const Config& base) {
  Config cfg = base;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::parse,
                  "config line " + std::to_string(lineno) + ": expected key=value, got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw Error(ErrorCode::parse, "config line " + std::to_string(lineno) + ": empty key");
    config_set(cfg, key, value);
  }
  return cfg;
}

Config load_config(const std::string& path, const Config& base) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::io, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), base);
}

void validate(const Config& cfg) {
  auto req = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::invalid_argument, "invalid config: " + what);
  };
  const auto& p = cfg.phys;
  req(p.R0 > 0, "R0 must be positive");
  req(p.mu > 0, "mu must be positive");
  req(p.Isp > 0, "Isp must be positive");
  req(p.ge > 0, "ge must be positive");
  req(p.Tm > 0, "Tm must be positive");
  req(p.m0 > 0, "m0 must be positive");
  req(p.m_dry > 0 && p.m_dry < p.m0, "m_dry must lie in (0, m0)");
  const auto& s = cfg.sampling;
  req(s.pr_min <= s.pr_max, "sample_pr interval is empty");
  req(s.pv_min <= s.pv_max, "sample_pv interval is empty");
  req(s.ptheta_min <= s.ptheta_max, "sample_ptheta interval is empty");
  req(s.pomega_min <= s.pomega_max, "sample_pomega interval is empty");
  req(s.pv_max < 1.0, "sample_pv interval must stay below 1");
  const auto& g = cfg.gen;
  req(g.tau_max > 0, "tau_max must be positive");
  req(g.grid_dt > 0 && g.grid_dt < g.tau_max, "grid_dt must lie in (0, tau_max)");
  req(g.r_escape > 1.0, "r_escape must exceed 1");
  req(g.switch_tol > 0, "switch_tol must be positive");
  req(g.abs_tol > 0 && g.rel_tol > 0, "ode tolerances must be positive");
  req(g.alpha > 0, "alpha must be positive");
  const auto& t = cfg.train;
  req(t.max_epochs > 0, "train_max_epochs must be positive");
  req(t.loss_goal > 0, "train_loss_goal must be positive");
  req(t.patience > 0, "train_patience must be positive");
  req(t.max_rows >= 0, "train_max_rows must be non-negative");
  req(t.split_train > 0 && t.split_val > 0 && t.split_train + t.split_val < 1.0,
      "train/val splits must be positive and sum below 1");
  req(t.lambda0 > 0, "train_lambda0 must be positive");
  req(t.adam_lr > 0, "adam_lr must be positive");
  for (const auto* h : {&t.tau_hidden, &t.angle_hidden, &t.switch_hidden})
    for (int n : *h) req(n > 0, "hidden layer sizes must be positive");
  const auto& m = cfg.sim;
  req(m.update_period_s > 0, "sim_update_period_s must be positive");
  req(m.stop_altitude_m >= 0, "sim_stop_altitude_m must be non-negative");
  req(m.success_vf_mps > 0, "sim_success_vf_mps must be positive");
  req(m.horizon_factor >= 1.0, "sim_horizon_factor must be at least 1");
  req(m.min_horizon_s > 0, "sim_min_horizon_s must be positive");
  req(m.deadband >= 0 && m.deadband < 1, "sim_deadband must lie in [0, 1)");
  req(m.abs_tol > 0 && m.rel_tol > 0, "sim tolerances must be positive");
  const auto& o = cfg.oracle;
  req(o.delta_end > 0 && o.delta_start >= o.delta_end, "delta schedule must satisfy start >= end > 0");
  req(o.tol > 0, "oracle_tol must be positive");
  req(o.max_iter > 0, "oracle_max_iter must be positive");
  req(o.fd_step > 0, "oracle_fd_step must be positive");
}

nlohmann::json config_to_json(const Config& cfg) {
  nlohmann::ordered_json j;
  j["R0"] = cfg.phys.R0;
  j["mu"] = cfg.phys.mu;
  j["Isp"] = cfg.phys.Isp;
  j["ge"] = cfg.phys.ge;
  j["Tm"] = cfg.phys.Tm;
  j["m0"] = cfg.phys.m0;
  j["m_dry"] = cfg.phys.m_dry;
  j["sample_pr_min"] = cfg.sampling.pr_min;
  j["sample_pr_max"] = cfg.sampling.pr_max;
  j["sample_pv_min"] = cfg.sampling.pv_min;
  j["sample_pv_max"] = cfg.sampling.pv_max;
  j["sample_ptheta_min"] = cfg.sampling.ptheta_min;
  j["sample_ptheta_max"] = cfg.sampling.ptheta_max;
  j["sample_pomega_min"] = cfg.sampling.pomega_min;
  j["sample_pomega_max"] = cfg.sampling.pomega_max;
  j["tau_max"] = cfg.gen.tau_max;
  j["grid_dt"] = cfg.gen.grid_dt;
  j["r_escape"] = cfg.gen.r_escape;
  j["switch_tol"] = cfg.gen.switch_tol;
  j["ode_abs_tol"] = cfg.gen.abs_tol;
  j["ode_rel_tol"] = cfg.gen.rel_tol;
  j["alpha"] = cfg.gen.alpha;
  j["train_max_epochs"] = cfg.train.max_epochs;
  j["train_loss_goal"] = cfg.train.loss_goal;
  j["train_patience"] = cfg.train.patience;
  j["train_optimizer"] = cfg.train.optimizer;
  j["train_max_rows"] = cfg.train.max_rows;
  j["split_train"] = cfg.train.split_train;
  j["split_val"] = cfg.train.split_val;
  j["train_lambda0"] = cfg.train.lambda0;
  j["adam_lr"] = cfg.train.adam_lr;
  j["tau_hidden"] = cfg.train.tau_hidden;
  j["angle_hidden"] = cfg.train.angle_hidden;
  j["switch_hidden"] = cfg.train.switch_hidden;
  j["sim_update_period_s"] = cfg.sim.update_period_s;
  j["sim_stop_altitude_m"] = cfg.sim.stop_altitude_m;
  j["sim_success_vf_mps"] = cfg.sim.success_vf_mps;
  j["sim_horizon_factor"] = cfg.sim.horizon_factor;
  j["sim_min_horizon_s"] = cfg.sim.min_horizon_s;
  j["sim_deadband"] = cfg.sim.deadband;
  j["sim_abs_tol"] = cfg.sim.abs_tol;
  j["sim_rel_tol"] = cfg.sim.rel_tol;
  j["delta_start"] = cfg.oracle.delta_start;
  j["delta_end"] = cfg.oracle.delta_end;
  j["oracle_tol"] = cfg.oracle.tol;
  j["oracle_max_iter"] = cfg.oracle.max_iter;
  j["oracle_fd_step"] = cfg.oracle.fd_step;
  return j;
}

Config config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::parse, "config json: expected an object");
  Config cfg;
  for (const auto& [key, val] : j.items()) {
    std::string s;
    if (val.is_string()) {
      s = val.get<std::string>();
    } else if (val.is_array()) {
      for (std::size_t i = 0; i < val.size(); ++i) {
        if (i) s += ',';
        s += val[i].dump();
      }
    } else {
      s = val.dump();
    }
    config_set(cfg, key, s);
  }
  return cfg;
}

}  // namespace fopdg
