#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "core/config.hpp"
#include "core/dataset.hpp"
#include "core/dynamics.hpp"

namespace fopdg {

// Feature-wise min-max map onto [0,1], fit on training rows only.
struct MinMax {
  Eigen::VectorXd lo, hi;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::VectorXd invert(const Eigen::VectorXd& y) const;
  // Throws Error{invalid_argument} when any feature range is degenerate.
  static MinMax fit(const Eigen::MatrixXd& rows);
};

struct MlpModel {
  std::vector<int> layer_sizes;    // input, hidden..., output
  std::vector<Eigen::MatrixXd> W;  // W[l] has shape sizes[l+1] x sizes[l]
  std::vector<Eigen::VectorXd> b;
  std::string hidden_activation = "sigmoid";
  std::string output_activation = "linear";
  MinMax in_norm;
  MinMax out_norm;

  std::string target;  // "tau", "psi", "s", or "sreg"
  std::string dataset_sha256;
  std::uint64_t seed = 0;
  double train_mse = 0, val_mse = 0, test_mse = 0;  // on normalized targets
  int epochs = 0;
  std::string stop_reason;

  int n_params() const;
  void validate() const;

  // Normalized input vector -> raw (still normalized) network output.
  double forward_normalized(const Eigen::VectorXd& xn) const;
  // Dimensionless flight state -> denormalized scalar prediction.
  double predict(const LanderState& x) const;
  // True when the state lies inside the training input hull.
  bool in_training_hull(const LanderState& x) const;
};

nlohmann::json model_to_json(const MlpModel& m);
MlpModel model_from_json(const nlohmann::json& j);
void save_model(const std::string& path, const MlpModel& m);
MlpModel load_model(const std::string& path);

struct TrainReport {
  double train_mse = 0, val_mse = 0, test_mse = 0;
  int epochs = 0;
  std::string stop_reason;
  std::vector<std::array<double, 2>> history;  // per epoch: train, val MSE
};

struct TrainResult {
  MlpModel model;
  TrainReport report;
};

// Train one scalar-output MLP. X holds one sample per row (raw units),
// y the raw targets; the 70/15/15 split, normalizers, initialization,
// and optimizer are all derived deterministically from seed.
TrainResult train_mlp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const std::vector<int>& hidden, const TrainParams& tp,
                      std::uint64_t seed);

// Parameter vector layout: for each layer, W row-major then b.
Eigen::VectorXd flatten_params(const MlpModel& m);
void unflatten_params(MlpModel& m, const Eigen::VectorXd& theta);

// Mean squared error over normalized samples (columns of Xn) and, when
// grad != nullptr, its gradient in flattened-parameter order.
double mse_and_gradient(const MlpModel& m, const Eigen::MatrixXd& Xn,
                        const Eigen::VectorXd& yn, Eigen::VectorXd* grad);

// Dataset plumbing for the four guidance targets.
void dataset_matrix(const std::vector<DatasetRow>& rows, const std::string& target,
                    Eigen::MatrixXd& X, Eigen::VectorXd& y);
std::vector<int> arch_for_target(const TrainParams& tp, const std::string& target);

nlohmann::json report_to_json(const TrainReport& r);
std::string history_csv(const TrainReport& r);

}  // namespace fopdg
