#include "core/dataset.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "core/error.hpp"
#include "core/io_util.hpp"
#include "core/rng.hpp"
#include "core/scaling.hpp"

namespace fopdg {

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::io, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
  f << content;
  if (!f) throw Error(ErrorCode::io, "write failed for '" + path + "'");
}

GeneratedDataset build_dataset(const Config& cfg, std::size_t n_traj, std::uint64_t seed) {
  const EngineParams eng = make_engine(cfg.phys);
  PropagateOptions popt;
  popt.gen = cfg.gen;

  Rng rng(seed);
  GeneratedDataset ds;
  DatasetStats& st = ds.stats;
  st.n_requested = n_traj;

  while (st.n_accepted < n_traj) {
    Quadruple q;
    q.p_r0 = rng.uniform(cfg.sampling.pr_min, cfg.sampling.pr_max);
    q.p_v0 = rng.uniform(cfg.sampling.pv_min, cfg.sampling.pv_max);
    q.p_theta0 = rng.uniform(cfg.sampling.ptheta_min, cfg.sampling.ptheta_max);
    q.p_omega0 = rng.uniform(cfg.sampling.pomega_min, cfg.sampling.pomega_max);
    ++st.n_drawn;

    const double m0 = m_bar0_from(q.p_v0, q.p_omega0, eng.tm);
    if (m0 < eng.m_dry || m0 > 1.0) {
      ++st.n_mass0_filtered;
      continue;
    }

    ++st.n_propagated;
    PropagationResult res = propagate_extremal(q, eng, popt);
    if (!res.accepted()) {
      if (res.reason == RejectReason::subsurface)
        ++st.n_rejected_subsurface;
      else
        ++st.n_rejected_mass;
      if (st.n_propagated >= 10000 &&
          static_cast<double>(st.n_accepted) < 0.01 * static_cast<double>(st.n_propagated))
        throw Error(ErrorCode::sampling_exhausted,
                    "dataset generation: acceptance rate below 1% after 10000 candidates");
      continue;
    }

    const ExtremalTrajectory& tr = *res.trajectory;
    const auto id = static_cast<std::uint32_t>(st.n_accepted);
    ++st.n_accepted;
    ++st.census[tr.label()];

    TrajectoryMeta meta;
    meta.traj_id = id;
    meta.quadruple = tr.quadruple;
    meta.m_bar0 = tr.m_bar0;
    meta.tau_end = tr.tau_end;
    meta.end_reason = tr.end_reason;
    meta.switch_taus = tr.switch_taus;
    ds.trajectories.push_back(std::move(meta));

    for (const ExtremalRecord& rec : tr.records) {
      DatasetRow row;
      row.r = rec.x.r;
      row.v = rec.x.v;
      row.theta = rec.x.theta;
      row.omega = rec.x.omega;
      row.m = rec.x.m;
      row.tau = rec.tau;
      row.psi = rec.psi;
      row.S = rec.S;
      row.S_reg = rec.S_reg;
      row.u = rec.u;
      row.traj_id = id;
      row.is_switch = rec.is_switch ? 1 : 0;
      if (rec.is_switch) ++st.n_switch_rows;
      ds.rows.push_back(row);
    }
  }

  st.n_rows = ds.rows.size();
  st.acceptance_rate = st.n_propagated == 0
                           ? 0.0
                           : static_cast<double>(st.n_accepted) / static_cast<double>(st.n_propagated);
  return ds;
}

const char* const kDatasetHeader = "r,v,theta,omega,m,tau,psi,S,S_reg,u,traj_id,is_switch";

void write_dataset_csv(const std::string& path, const std::vector<DatasetRow>& rows) {
  std::string out;
  out.reserve(rows.size() * 140 + 64);
  out += kDatasetHeader;
  out += '\n';
  for (const DatasetRow& r : rows) {
    out += fmt(r.r);
    out += ',';
    out += fmt(r.v);
    out += ',';
    out += fmt(r.theta);
    out += ',';
    out += fmt(r.omega);
    out += ',';
    out += fmt(r.m);
    out += ',';
    out += fmt(r.tau);
    out += ',';
    out += fmt(r.psi);
    out += ',';
    out += fmt(r.S);
    out += ',';
    out += fmt(r.S_reg);
    out += ',';
    out += fmt(r.u);
    out += ',';
    out += fmt(static_cast<std::uint64_t>(r.traj_id));
    out += ',';
    out += (r.is_switch ? '1' : '0');
    out += '\n';
  }
  write_text_file(path, out);
}

std::vector<DatasetRow> read_dataset_csv(const std::string& path) {
  const std::string text = read_text_file(path);
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::parse, "dataset csv: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kDatasetHeader)
    throw Error(ErrorCode::parse, "dataset csv: unexpected header '" + line + "'");

  std::vector<DatasetRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<std::string_view, 12> tok;
    std::string_view sv = line;
    std::size_t n = 0, pos = 0;
    while (n < 12) {
      const std::size_t c = sv.find(',', pos);
      if (c == std::string_view::npos) {
        tok[n++] = sv.substr(pos);
        break;
      }
      tok[n++] = sv.substr(pos, c - pos);
      pos = c + 1;
    }
    if (n != 12)
      throw Error(ErrorCode::parse,
                  "dataset csv line " + std::to_string(lineno) + ": expected 12 fields");
    DatasetRow r;
    r.r = parse_double_token(tok[0], "dataset csv");
    r.v = parse_double_token(tok[1], "dataset csv");
    r.theta = parse_double_token(tok[2], "dataset csv");
    r.omega = parse_double_token(tok[3], "dataset csv");
    r.m = parse_double_token(tok[4], "dataset csv");
    r.tau = parse_double_token(tok[5], "dataset csv");
    r.psi = parse_double_token(tok[6], "dataset csv");
    r.S = parse_double_token(tok[7], "dataset csv");
    r.S_reg = parse_double_token(tok[8], "dataset csv");
    r.u = parse_double_token(tok[9], "dataset csv");
    r.traj_id = static_cast<std::uint32_t>(parse_double_token(tok[10], "dataset csv"));
    r.is_switch = tok[11] == "1" ? 1 : 0;
    rows.push_back(r);
  }
  return rows;
}

nlohmann::json stats_to_json(const GeneratedDataset& ds) {
  const DatasetStats& st = ds.stats;
  nlohmann::ordered_json j;
  j["n_requested"] = st.n_requested;
  j["n_drawn"] = st.n_drawn;
  j["n_mass0_filtered"] = st.n_mass0_filtered;
  j["n_propagated"] = st.n_propagated;
  j["n_rejected_subsurface"] = st.n_rejected_subsurface;
  j["n_rejected_mass"] = st.n_rejected_mass;
  j["n_accepted"] = st.n_accepted;
  j["acceptance_rate"] = st.acceptance_rate;
  j["n_rows"] = st.n_rows;
  j["n_switch_rows"] = st.n_switch_rows;
  nlohmann::ordered_json census = nlohmann::ordered_json::object();
  for (const auto& [label, count] : st.census) census[label] = count;
  j["census"] = census;

  nlohmann::ordered_json trajs = nlohmann::ordered_json::array();
  for (const TrajectoryMeta& m : ds.trajectories) {
    nlohmann::ordered_json t;
    t["traj_id"] = m.traj_id;
    t["quadruple"] = {m.quadruple.p_r0, m.quadruple.p_v0, m.quadruple.p_theta0,
                      m.quadruple.p_omega0};
    t["m_bar0"] = m.m_bar0;
    t["tau_end"] = m.tau_end;
    t["end_reason"] = m.end_reason == EndReason::escape ? "escape" : "horizon";
    t["n_switches"] = m.switch_taus.size();
    t["switch_taus"] = m.switch_taus;
    t["label"] = classify_label(m.switch_taus.size());
    trajs.push_back(std::move(t));
  }
  j["trajectories"] = std::move(trajs);
  return j;
}

std::map<std::uint32_t, TrajectorySeed> read_trajectory_seeds(const std::string& stats_json_path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(stats_json_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, std::string("stats json: ") + e.what());
  }
  if (!j.contains("trajectories"))
    throw Error(ErrorCode::parse, "stats json: missing 'trajectories'");
  std::map<std::uint32_t, TrajectorySeed> out;
  for (const auto& t : j["trajectories"]) {
    TrajectorySeed s;
    const auto& q = t.at("quadruple");
    s.quadruple = {q.at(0).get<double>(), q.at(1).get<double>(), q.at(2).get<double>(),
                   q.at(3).get<double>()};
    s.m_bar0 = t.at("m_bar0").get<double>();
    s.tau_end = t.at("tau_end").get<double>();
    out[t.at("traj_id").get<std::uint32_t>()] = s;
  }
  return out;
}

}  // namespace fopdg
