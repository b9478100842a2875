#include "core/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "core/error.hpp"
#include "core/io_util.hpp"
#include "core/rng.hpp"

namespace fopdg {

//
// normalization
//

Eigen::VectorXd MinMax::apply(const Eigen::VectorXd& x) const {
  return (x - lo).cwiseQuotient(hi - lo);
}

Eigen::VectorXd MinMax::invert(const Eigen::VectorXd& y) const {
  return lo + y.cwiseProduct(hi - lo);
}

MinMax MinMax::fit(const Eigen::MatrixXd& rows) {
  if (rows.rows() == 0) throw Error(ErrorCode::invalid_argument, "normalizer fit: no rows");
  MinMax n;
  n.lo = rows.colwise().minCoeff();
  n.hi = rows.colwise().maxCoeff();
  for (Eigen::Index i = 0; i < n.lo.size(); ++i)
    if (!(n.hi[i] > n.lo[i]))
      throw Error(ErrorCode::invalid_argument,
                  "normalizer fit: degenerate range for feature " + std::to_string(i));
  return n;
}

//
// model basics
//

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Activations per layer; Z[0] is the input block (features x samples).
void forward_batch(const MlpModel& m, const Eigen::MatrixXd& Xn,
                   std::vector<Eigen::MatrixXd>& Z) {
  const std::size_t L = m.W.size();
  Z.resize(L + 1);
  Z[0] = Xn;
  for (std::size_t l = 0; l < L; ++l) {
    Eigen::MatrixXd A = m.W[l] * Z[l];
    A.colwise() += m.b[l];
    if (l + 1 < L)
      Z[l + 1] = A.unaryExpr([](double v) { return sigmoid(v); });
    else
      Z[l + 1] = std::move(A);
  }
}

// dOut/dPreactivation per layer, output layer first set to ones.
void backward_deltas(const MlpModel& m, const std::vector<Eigen::MatrixXd>& Z,
                     std::vector<Eigen::MatrixXd>& D) {
  const std::size_t L = m.W.size();
  const Eigen::Index B = Z[0].cols();
  D.resize(L);
  D[L - 1] = Eigen::MatrixXd::Ones(1, B);
  for (std::size_t l = L - 1; l-- > 0;) {
    Eigen::MatrixXd back = m.W[l + 1].transpose() * D[l + 1];
    D[l] = back.cwiseProduct(
        Z[l + 1].cwiseProduct((1.0 - Z[l + 1].array()).matrix()));
  }
}

}  // namespace

int MlpModel::n_params() const {
  int p = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
    p += layer_sizes[l + 1] * (layer_sizes[l] + 1);
  return p;
}

void MlpModel::validate() const {
  if (layer_sizes.size() < 2)
    throw Error(ErrorCode::invalid_argument, "model: needs input and output layers");
  const std::size_t L = layer_sizes.size() - 1;
  if (W.size() != L || b.size() != L)
    throw Error(ErrorCode::invalid_argument, "model: layer count mismatch");
  for (std::size_t l = 0; l < L; ++l) {
    if (W[l].rows() != layer_sizes[l + 1] || W[l].cols() != layer_sizes[l] ||
        b[l].size() != layer_sizes[l + 1])
      throw Error(ErrorCode::invalid_argument, "model: weight shape mismatch at layer " +
                                                   std::to_string(l));
  }
  if (hidden_activation != "sigmoid" || output_activation != "linear")
    throw Error(ErrorCode::invalid_argument, "model: unsupported activation");
  if (in_norm.lo.size() != layer_sizes.front() || out_norm.lo.size() != layer_sizes.back())
    throw Error(ErrorCode::invalid_argument, "model: normalizer dimension mismatch");
  for (Eigen::Index i = 0; i < in_norm.lo.size(); ++i)
    if (!(in_norm.hi[i] > in_norm.lo[i]))
      throw Error(ErrorCode::invalid_argument, "model: degenerate input normalizer");
  for (Eigen::Index i = 0; i < out_norm.lo.size(); ++i)
    if (!(out_norm.hi[i] > out_norm.lo[i]))
      throw Error(ErrorCode::invalid_argument, "model: degenerate output normalizer");
}

double MlpModel::forward_normalized(const Eigen::VectorXd& xn) const {
  std::vector<Eigen::MatrixXd> Z;
  forward_batch(*this, xn, Z);
  return Z.back()(0, 0);
}

double MlpModel::predict(const LanderState& x) const {
  require_finite(x);
  if (layer_sizes.front() != 5)
    throw Error(ErrorCode::invalid_argument, "model: predict expects a 5-input network");
  Eigen::VectorXd v(5);
  v << x.r, x.v, x.theta, x.omega, x.m;
  const double yn = forward_normalized(in_norm.apply(v));
  Eigen::VectorXd out(1);
  out << yn;
  return out_norm.invert(out)(0);
}

bool MlpModel::in_training_hull(const LanderState& x) const {
  Eigen::VectorXd v(5);
  v << x.r, x.v, x.theta, x.omega, x.m;
  for (int i = 0; i < 5; ++i)
    if (v[i] < in_norm.lo[i] || v[i] > in_norm.hi[i]) return false;
  return true;
}

//
// parameter flattening
//

Eigen::VectorXd flatten_params(const MlpModel& m) {
  Eigen::VectorXd theta(m.n_params());
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < m.W.size(); ++l) {
    for (Eigen::Index r = 0; r < m.W[l].rows(); ++r)
      for (Eigen::Index c = 0; c < m.W[l].cols(); ++c) theta[k++] = m.W[l](r, c);
    for (Eigen::Index r = 0; r < m.b[l].size(); ++r) theta[k++] = m.b[l][r];
  }
  return theta;
}

void unflatten_params(MlpModel& m, const Eigen::VectorXd& theta) {
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < m.W.size(); ++l) {
    for (Eigen::Index r = 0; r < m.W[l].rows(); ++r)
      for (Eigen::Index c = 0; c < m.W[l].cols(); ++c) m.W[l](r, c) = theta[k++];
    for (Eigen::Index r = 0; r < m.b[l].size(); ++r) m.b[l][r] = theta[k++];
  }
}

//
// loss and derivatives
//

namespace {

constexpr Eigen::Index kBlock = 512;

double batch_mse(const MlpModel& m, const Eigen::MatrixXd& Xn, const Eigen::VectorXd& yn) {
  double sum = 0;
  for (Eigen::Index start = 0; start < Xn.cols(); start += kBlock) {
    const Eigen::Index B = std::min(kBlock, Xn.cols() - start);
    std::vector<Eigen::MatrixXd> Z;
    forward_batch(m, Xn.middleCols(start, B), Z);
    sum += (Z.back().row(0).transpose() - yn.segment(start, B)).squaredNorm();
  }
  return sum / static_cast<double>(Xn.cols());
}

// Jacobian rows d(out_j)/d(theta) for one block, flattened layer by layer.
void jacobian_block(const MlpModel& m, const std::vector<Eigen::MatrixXd>& Z,
                    const std::vector<Eigen::MatrixXd>& D, Eigen::MatrixXd& J) {
  const Eigen::Index B = Z[0].cols();
  J.resize(B, m.n_params());
  for (Eigen::Index j = 0; j < B; ++j) {
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < m.W.size(); ++l) {
      const auto& d = D[l];
      const auto& z = Z[l];
      for (Eigen::Index r = 0; r < d.rows(); ++r) {
        const double dr = d(r, j);
        for (Eigen::Index c = 0; c < z.rows(); ++c) J(j, k++) = dr * z(c, j);
      }
      for (Eigen::Index r = 0; r < d.rows(); ++r) J(j, k++) = d(r, j);
    }
  }
}

}  // namespace

double mse_and_gradient(const MlpModel& m, const Eigen::MatrixXd& Xn,
                        const Eigen::VectorXd& yn, Eigen::VectorXd* grad) {
  const Eigen::Index n = Xn.cols();
  if (n == 0) throw Error(ErrorCode::invalid_argument, "mse: no samples");
  if (grad) grad->setZero(m.n_params());
  double sum = 0;
  for (Eigen::Index start = 0; start < n; start += kBlock) {
    const Eigen::Index B = std::min(kBlock, n - start);
    std::vector<Eigen::MatrixXd> Z;
    forward_batch(m, Xn.middleCols(start, B), Z);
    Eigen::VectorXd e = Z.back().row(0).transpose() - yn.segment(start, B);
    sum += e.squaredNorm();
    if (!grad) continue;
    std::vector<Eigen::MatrixXd> D;
    backward_deltas(m, Z, D);
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < m.W.size(); ++l) {
      const Eigen::MatrixXd de = D[l] * e.asDiagonal();  // rows x B
      const Eigen::MatrixXd gW = de * Z[l].transpose();
      const Eigen::VectorXd gb = de.rowwise().sum();
      for (Eigen::Index r = 0; r < gW.rows(); ++r)
        for (Eigen::Index c = 0; c < gW.cols(); ++c) (*grad)[k++] += gW(r, c);
      for (Eigen::Index r = 0; r < gb.size(); ++r) (*grad)[k++] += gb[r];
    }
  }
  if (grad) *grad *= 2.0 / static_cast<double>(n);
  return sum / static_cast<double>(n);
}

//
// training
//

namespace {

void init_weights(MlpModel& m, Rng& rng) {
  const std::size_t L = m.layer_sizes.size() - 1;
  m.W.resize(L);
  m.b.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    const int fan_in = m.layer_sizes[l];
    const int fan_out = m.layer_sizes[l + 1];
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    m.W[l].resize(fan_out, fan_in);
    for (Eigen::Index r = 0; r < m.W[l].rows(); ++r)
      for (Eigen::Index c = 0; c < m.W[l].cols(); ++c) m.W[l](r, c) = rng.uniform(-a, a);
    m.b[l] = Eigen::VectorXd::Zero(fan_out);
  }
}

struct Splits {
  Eigen::MatrixXd Xtr, Xva, Xte;  // features x samples, normalized
  Eigen::VectorXd ytr, yva, yte;
};

// One Levenberg-Marquardt epoch: build normal equations once, then grow
// the damping until a step reduces the training MSE. Returns false when
// damping is exhausted (stalled).
bool lm_epoch(MlpModel& m, const Splits& sp, double& mse, double& lambda) {
  const Eigen::Index P = m.n_params();
  const Eigen::Index n = sp.Xtr.cols();
  Eigen::MatrixXd JtJ = Eigen::MatrixXd::Zero(P, P);
  Eigen::VectorXd Jte = Eigen::VectorXd::Zero(P);

  for (Eigen::Index start = 0; start < n; start += kBlock) {
    const Eigen::Index B = std::min(kBlock, n - start);
    std::vector<Eigen::MatrixXd> Z, D;
    forward_batch(m, sp.Xtr.middleCols(start, B), Z);
    backward_deltas(m, Z, D);
    Eigen::MatrixXd J;
    jacobian_block(m, Z, D, J);
    const Eigen::VectorXd e = Z.back().row(0).transpose() - sp.ytr.segment(start, B);
    JtJ.selfadjointView<Eigen::Lower>().rankUpdate(J.transpose(), 1.0);
    Jte.noalias() += J.transpose() * e;
  }

  const Eigen::VectorXd theta0 = flatten_params(m);
  for (int tries = 0; tries < 40; ++tries) {
    Eigen::MatrixXd A = JtJ;
    A.diagonal().array() += lambda;
    const Eigen::VectorXd step =
        Eigen::LDLT<Eigen::MatrixXd, Eigen::Lower>(A).solve(-Jte);
    unflatten_params(m, theta0 + step);
    const double cand = batch_mse(m, sp.Xtr, sp.ytr);
    if (std::isfinite(cand) && cand < mse) {
      mse = cand;
      lambda = std::max(lambda * 0.1, 1e-15);
      return true;
    }
    lambda *= 10.0;
    if (lambda > 1e12) break;
  }
  unflatten_params(m, theta0);
  return false;
}

void adam_epoch(MlpModel& m, const Splits& sp, const TrainParams& tp, Rng& rng,
                Eigen::VectorXd& am, Eigen::VectorXd& av, long& step_count) {
  const Eigen::Index n = sp.Xtr.cols();
  constexpr Eigen::Index kBatch = 256;
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (Eigen::Index i = n - 1; i > 0; --i)
    std::swap(order[i], order[rng.integer(static_cast<std::uint64_t>(i) + 1)]);

  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  for (Eigen::Index start = 0; start < n; start += kBatch) {
    const Eigen::Index B = std::min(kBatch, n - start);
    Eigen::MatrixXd Xb(sp.Xtr.rows(), B);
    Eigen::VectorXd yb(B);
    for (Eigen::Index j = 0; j < B; ++j) {
      Xb.col(j) = sp.Xtr.col(order[start + j]);
      yb[j] = sp.ytr[order[start + j]];
    }
    Eigen::VectorXd g;
    mse_and_gradient(m, Xb, yb, &g);
    ++step_count;
    am = b1 * am + (1 - b1) * g;
    av = b2 * av + (1 - b2) * g.cwiseProduct(g);
    const double c1 = 1 - std::pow(b1, static_cast<double>(step_count));
    const double c2 = 1 - std::pow(b2, static_cast<double>(step_count));
    const Eigen::VectorXd mh = am / c1;
    const Eigen::VectorXd vh = av / c2;
    Eigen::VectorXd theta = flatten_params(m);
    theta.array() -= tp.adam_lr * mh.array() / (vh.array().sqrt() + eps);
    unflatten_params(m, theta);
  }
}

}  // namespace

TrainResult train_mlp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const std::vector<int>& hidden, const TrainParams& tp,
                      std::uint64_t seed) {
  const Eigen::Index N = X.rows();
  if (N == 0) throw Error(ErrorCode::invalid_argument, "train: empty dataset");
  if (X.rows() != y.size())
    throw Error(ErrorCode::invalid_argument, "train: input/target row mismatch");

  Rng rng(seed);

  // shuffled split
  std::vector<Eigen::Index> idx(N);
  std::iota(idx.begin(), idx.end(), 0);
  for (Eigen::Index i = N - 1; i > 0; --i)
    std::swap(idx[i], idx[rng.integer(static_cast<std::uint64_t>(i) + 1)]);

  Eigen::Index n_train = std::llround(tp.split_train * static_cast<double>(N));
  Eigen::Index n_val = std::llround(tp.split_val * static_cast<double>(N));
  n_train = std::max<Eigen::Index>(n_train, 1);
  n_val = std::max<Eigen::Index>(n_val, 1);
  if (n_train + n_val >= N)
    throw Error(ErrorCode::invalid_argument, "train: splits leave no test rows");
  const Eigen::Index n_test = N - n_train - n_val;

  Eigen::Index n_used = n_train;
  if (tp.max_rows > 0 && n_used > tp.max_rows) n_used = tp.max_rows;

  auto gather = [&](Eigen::Index begin, Eigen::Index count, Eigen::MatrixXd& Xo,
                    Eigen::VectorXd& yo) {
    Xo.resize(count, X.cols());
    yo.resize(count);
    for (Eigen::Index j = 0; j < count; ++j) {
      Xo.row(j) = X.row(idx[begin + j]);
      yo[j] = y[idx[begin + j]];
    }
  };
  Eigen::MatrixXd Xtr_raw, Xva_raw, Xte_raw;
  Eigen::VectorXd ytr_raw, yva_raw, yte_raw;
  gather(0, n_used, Xtr_raw, ytr_raw);
  gather(n_train, n_val, Xva_raw, yva_raw);
  gather(n_train + n_val, n_test, Xte_raw, yte_raw);

  MlpModel m;
  m.layer_sizes.push_back(static_cast<int>(X.cols()));
  for (int h : hidden) m.layer_sizes.push_back(h);
  m.layer_sizes.push_back(1);
  m.seed = seed;

  m.in_norm = MinMax::fit(Xtr_raw);
  m.out_norm = MinMax::fit(ytr_raw);

  auto norm_block = [&](const Eigen::MatrixXd& Xr, const Eigen::VectorXd& yr,
                        Eigen::MatrixXd& Xn, Eigen::VectorXd& yn) {
    Xn.resize(Xr.cols(), Xr.rows());
    for (Eigen::Index j = 0; j < Xr.rows(); ++j)
      Xn.col(j) = m.in_norm.apply(Xr.row(j).transpose());
    yn.resize(yr.size());
    for (Eigen::Index j = 0; j < yr.size(); ++j)
      yn[j] = (yr[j] - m.out_norm.lo[0]) / (m.out_norm.hi[0] - m.out_norm.lo[0]);
  };
  Splits sp;
  norm_block(Xtr_raw, ytr_raw, sp.Xtr, sp.ytr);
  norm_block(Xva_raw, yva_raw, sp.Xva, sp.yva);
  norm_block(Xte_raw, yte_raw, sp.Xte, sp.yte);

  init_weights(m, rng);

  TrainReport rep;
  double train_mse = batch_mse(m, sp.Xtr, sp.ytr);
  double best_val = batch_mse(m, sp.Xva, sp.yva);
  Eigen::VectorXd best_theta = flatten_params(m);
  int bad_epochs = 0;
  double lambda = tp.lambda0;
  Eigen::VectorXd am, av;
  long adam_steps = 0;
  if (tp.optimizer == "adam") {
    am = Eigen::VectorXd::Zero(m.n_params());
    av = Eigen::VectorXd::Zero(m.n_params());
  }

  for (int epoch = 1; epoch <= tp.max_epochs; ++epoch) {
    if (tp.optimizer == "lm") {
      if (!lm_epoch(m, sp, train_mse, lambda)) {
        rep.stop_reason = "stalled";
        rep.epochs = epoch - 1;
        break;
      }
    } else {
      adam_epoch(m, sp, tp, rng, am, av, adam_steps);
      train_mse = batch_mse(m, sp.Xtr, sp.ytr);
    }
    if (!std::isfinite(train_mse))
      throw Error(ErrorCode::training_failure,
                  "training diverged at epoch " + std::to_string(epoch));

    const double val_mse = batch_mse(m, sp.Xva, sp.yva);
    rep.history.push_back({train_mse, val_mse});
    rep.epochs = epoch;

    if (val_mse < best_val) {
      best_val = val_mse;
      best_theta = flatten_params(m);
      bad_epochs = 0;
    } else {
      ++bad_epochs;
    }

    if (train_mse <= tp.loss_goal) {
      rep.stop_reason = "loss_goal";
      break;
    }
    if (bad_epochs >= tp.patience) {
      rep.stop_reason = "patience";
      break;
    }
    if (epoch == tp.max_epochs) rep.stop_reason = "max_epochs";
  }
  if (rep.stop_reason.empty()) rep.stop_reason = "max_epochs";

  unflatten_params(m, best_theta);
  rep.train_mse = batch_mse(m, sp.Xtr, sp.ytr);
  rep.val_mse = batch_mse(m, sp.Xva, sp.yva);
  rep.test_mse = batch_mse(m, sp.Xte, sp.yte);

  m.train_mse = rep.train_mse;
  m.val_mse = rep.val_mse;
  m.test_mse = rep.test_mse;
  m.epochs = rep.epochs;
  m.stop_reason = rep.stop_reason;
  return {std::move(m), std::move(rep)};
}

//
// persistence
//

nlohmann::json model_to_json(const MlpModel& m) {
  nlohmann::ordered_json j;
  j["layer_sizes"] = m.layer_sizes;
  nlohmann::ordered_json weights = nlohmann::ordered_json::array();
  nlohmann::ordered_json biases = nlohmann::ordered_json::array();
  for (std::size_t l = 0; l < m.W.size(); ++l) {
    std::vector<double> w;
    w.reserve(m.W[l].size());
    for (Eigen::Index r = 0; r < m.W[l].rows(); ++r)
      for (Eigen::Index c = 0; c < m.W[l].cols(); ++c) w.push_back(m.W[l](r, c));
    weights.push_back(w);
    biases.push_back(std::vector<double>(m.b[l].data(), m.b[l].data() + m.b[l].size()));
  }
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
  nlohmann::ordered_json acts = nlohmann::ordered_json::array();
  for (std::size_t l = 0; l + 2 < m.layer_sizes.size(); ++l) acts.push_back(m.hidden_activation);
  acts.push_back(m.output_activation);
  j["activations"] = std::move(acts);
  j["in_norm"] = {{"min", std::vector<double>(m.in_norm.lo.data(),
                                              m.in_norm.lo.data() + m.in_norm.lo.size())},
                  {"max", std::vector<double>(m.in_norm.hi.data(),
                                              m.in_norm.hi.data() + m.in_norm.hi.size())}};
  j["out_norm"] = {{"min", std::vector<double>(m.out_norm.lo.data(),
                                               m.out_norm.lo.data() + m.out_norm.lo.size())},
                   {"max", std::vector<double>(m.out_norm.hi.data(),
                                               m.out_norm.hi.data() + m.out_norm.hi.size())}};
  nlohmann::ordered_json meta;
  meta["target"] = m.target;
  meta["dataset_sha256"] = m.dataset_sha256;
  meta["seed"] = m.seed;
  meta["train_mse"] = m.train_mse;
  meta["val_mse"] = m.val_mse;
  meta["test_mse"] = m.test_mse;
  meta["epochs"] = m.epochs;
  meta["stop_reason"] = m.stop_reason;
  j["metadata"] = std::move(meta);
  return j;
}

MlpModel model_from_json(const nlohmann::json& j) {
  MlpModel m;
  try {
    m.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    const std::size_t L = m.layer_sizes.size() - 1;
    if (weights.size() != L || biases.size() != L)
      throw Error(ErrorCode::parse, "model json: layer count mismatch");
    m.W.resize(L);
    m.b.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
      const auto w = weights.at(l).get<std::vector<double>>();
      const auto bv = biases.at(l).get<std::vector<double>>();
      const int rows = m.layer_sizes[l + 1], cols = m.layer_sizes[l];
      if (static_cast<int>(w.size()) != rows * cols || static_cast<int>(bv.size()) != rows)
        throw Error(ErrorCode::parse, "model json: weight size mismatch");
      m.W[l].resize(rows, cols);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m.W[l](r, c) = w[r * cols + c];
      m.b[l] = Eigen::Map<const Eigen::VectorXd>(bv.data(), rows);
    }
    const auto acts = j.at("activations").get<std::vector<std::string>>();
    if (!acts.empty()) {
      m.output_activation = acts.back();
      if (acts.size() > 1) m.hidden_activation = acts.front();
    }
    auto load_norm = [](const nlohmann::json& n, MinMax& out) {
      const auto lo = n.at("min").get<std::vector<double>>();
      const auto hi = n.at("max").get<std::vector<double>>();
      out.lo = Eigen::Map<const Eigen::VectorXd>(lo.data(), lo.size());
      out.hi = Eigen::Map<const Eigen::VectorXd>(hi.data(), hi.size());
    };
    load_norm(j.at("in_norm"), m.in_norm);
    load_norm(j.at("out_norm"), m.out_norm);
    if (j.contains("metadata")) {
      const auto& meta = j["metadata"];
      m.target = meta.value("target", "");
      m.dataset_sha256 = meta.value("dataset_sha256", "");
      m.seed = meta.value("seed", std::uint64_t{0});
      m.train_mse = meta.value("train_mse", 0.0);
      m.val_mse = meta.value("val_mse", 0.0);
      m.test_mse = meta.value("test_mse", 0.0);
      m.epochs = meta.value("epochs", 0);
      m.stop_reason = meta.value("stop_reason", "");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, std::string("model json: ") + e.what());
  }
  m.validate();
  return m;
}

void save_model(const std::string& path, const MlpModel& m) {
  write_text_file(path, model_to_json(m).dump(2) + "\n");
}

MlpModel load_model(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, "model json '" + path + "': " + e.what());
  }
  return model_from_json(j);
}

//
// dataset plumbing
//

void dataset_matrix(const std::vector<DatasetRow>& rows, const std::string& target,
                    Eigen::MatrixXd& X, Eigen::VectorXd& y) {
  if (rows.empty()) throw Error(ErrorCode::invalid_argument, "dataset has no rows");
  X.resize(static_cast<Eigen::Index>(rows.size()), 5);
  y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const DatasetRow& r = rows[i];
    X.row(static_cast<Eigen::Index>(i)) << r.r, r.v, r.theta, r.omega, r.m;
    double t = 0;
    if (target == "tau")
      t = r.tau;
    else if (target == "psi")
      t = r.psi;
    else if (target == "s")
      t = r.S;
    else if (target == "sreg")
      t = r.S_reg;
    else
      throw Error(ErrorCode::invalid_argument, "unknown training target '" + target + "'");
    y[static_cast<Eigen::Index>(i)] = t;
  }
}

std::vector<int> arch_for_target(const TrainParams& tp, const std::string& target) {
  if (target == "tau") return tp.tau_hidden;
  if (target == "psi") return tp.angle_hidden;
  if (target == "s" || target == "sreg") return tp.switch_hidden;
  throw Error(ErrorCode::invalid_argument, "unknown training target '" + target + "'");
}

nlohmann::json report_to_json(const TrainReport& r) {
  nlohmann::ordered_json j;
  j["train_mse"] = r.train_mse;
  j["val_mse"] = r.val_mse;
  j["test_mse"] = r.test_mse;
  j["epochs"] = r.epochs;
  j["stop_reason"] = r.stop_reason;
  return j;
}

std::string history_csv(const TrainReport& r) {
  std::string out = "epoch,train_mse,val_mse\n";
  for (std::size_t i = 0; i < r.history.size(); ++i) {
    out += fmt(static_cast<std::uint64_t>(i + 1));
    out += ',';
    out += fmt(r.history[i][0]);
    out += ',';
    out += fmt(r.history[i][1]);
    out += '\n';
  }
  return out;
}

}  // namespace fopdg
