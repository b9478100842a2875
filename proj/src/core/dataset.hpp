#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "core/config.hpp"
#include "core/extremal.hpp"

namespace fopdg {

// One training sample: flight state (inputs) and guidance targets, all
// dimensionless. tau is the remaining time of flight to touchdown.
struct DatasetRow {
  double r = 0, v = 0, theta = 0, omega = 0, m = 0;
  double tau = 0;
  double psi = 0;
  double S = 0;
  double S_reg = 0;
  double u = 0;
  std::uint32_t traj_id = 0;
  std::uint8_t is_switch = 0;
};

struct TrajectoryMeta {
  std::uint32_t traj_id = 0;
  Quadruple quadruple;
  double m_bar0 = 0;
  double tau_end = 0;
  EndReason end_reason = EndReason::horizon;
  std::vector<double> switch_taus;
};

struct DatasetStats {
  std::size_t n_requested = 0;
  std::size_t n_drawn = 0;            // raw box draws
  std::size_t n_mass0_filtered = 0;   // failed the touchdown-mass window
  std::size_t n_propagated = 0;
  std::size_t n_rejected_subsurface = 0;
  std::size_t n_rejected_mass = 0;
  std::size_t n_accepted = 0;
  std::size_t n_rows = 0;
  std::size_t n_switch_rows = 0;
  std::map<std::string, std::size_t> census;  // thrust-sequence label -> count
  double acceptance_rate = 0.0;               // accepted / propagated
};

struct GeneratedDataset {
  std::vector<DatasetRow> rows;
  std::vector<TrajectoryMeta> trajectories;
  DatasetStats stats;
};

// Generate n_traj accepted extremals and grid them into training rows.
// Raises Error{sampling_exhausted} if acceptance stays under 1% after
// 10000 propagated candidates.
GeneratedDataset build_dataset(const Config& cfg, std::size_t n_traj, std::uint64_t seed);

extern const char* const kDatasetHeader;

void write_dataset_csv(const std::string& path, const std::vector<DatasetRow>& rows);
std::vector<DatasetRow> read_dataset_csv(const std::string& path);

// Stats block (counters, census, and per-trajectory seed quadruples).
nlohmann::json stats_to_json(const GeneratedDataset& ds);

// Seed data needed to warm-start the shooting solver for a dataset row.
struct TrajectorySeed {
  Quadruple quadruple;
  double m_bar0 = 0;
  double tau_end = 0;
};

std::map<std::uint32_t, TrajectorySeed> read_trajectory_seeds(const std::string& stats_json_path);

}  // namespace fopdg
