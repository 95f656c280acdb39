#include "phishgraph/gcn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "phishgraph/error.hpp"
#include "phishgraph/rng.hpp"

namespace phishgraph {
namespace {

void softmax_rows(Matrix& z) {
  for (std::size_t i = 0; i < z.rows; ++i) {
    auto r = z.row(i);
    const double m = *std::max_element(r.begin(), r.end());
    double s = 0.0;
    for (double& v : r) s += (v = std::exp(v - m));
    for (double& v : r) v /= s;
  }
}

void add_bias(Matrix& z, const std::vector<double>& b) {
  for (std::size_t i = 0; i < z.rows; ++i)
    for (std::size_t j = 0; j < z.cols; ++j) z(i, j) += b[j];
}

constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kDropoutStream = 1;

}  // namespace

const char* to_string(WeightMode mode) noexcept {
  switch (mode) {
    case WeightMode::Uniform: return "uniform";
    case WeightMode::InverseFrequency: return "inverse_frequency";
    case WeightMode::Manual: return "manual";
  }
  return "unknown";
}

const char* to_string(OptimizerKind kind) noexcept {
  return kind == OptimizerKind::Adam ? "adam" : "gd";
}

void validate(const GcnConfig& cfg) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(Errc::InvalidConfig, std::string("gcn config: ") + what);
  };
  require(!cfg.hidden_dims.empty(), "hidden_dims must be non-empty");
  require(std::all_of(cfg.hidden_dims.begin(), cfg.hidden_dims.end(), [](auto d) { return d > 0; }),
          "hidden_dims must be positive");
  require(cfg.dropout_rate >= 0.0 && cfg.dropout_rate < 1.0, "dropout_rate must lie in [0,1)");
  require(cfg.learning_rate > 0.0, "learning_rate must be > 0");
  require(cfg.epochs >= 1, "epochs must be >= 1");
  require(cfg.threshold > 0.0 && cfg.threshold < 1.0, "threshold must lie in (0,1)");
  require(cfg.manual_weights[0] >= 0.0 && cfg.manual_weights[1] >= 0.0, "manual weights must be >= 0");
}

GcnModel init_model(std::size_t input_dim, const GcnConfig& cfg) {
  if (input_dim == 0) throw Error(Errc::ShapeMismatch, "input dimension must be positive");
  Rng rng(derive_seed(cfg.seed, kInitStream));
  GcnModel m;
  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), cfg.hidden_dims.begin(), cfg.hidden_dims.end());
  dims.push_back(2);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Matrix w(dims[l], dims[l + 1]);
    const double bound = std::sqrt(6.0 / static_cast<double>(dims[l] + dims[l + 1]));
    for (double& v : w.data) v = rng.uniform(-bound, bound);
    m.weights.push_back(std::move(w));
    if (cfg.use_bias) m.biases.emplace_back(dims[l + 1], 0.0);
  }
  return m;
}

ForwardResult forward(const GcnModel& model, const SparseMatrix& adj, const Matrix& x, bool training,
                      double dropout_rate, std::uint64_t dropout_seed) {
  if (x.cols != model.input_dim())
    throw Error(Errc::ShapeMismatch, "feature width " + std::to_string(x.cols) + " != model input " +
                                         std::to_string(model.input_dim()));
  if (adj.n_cols != x.rows || adj.n_rows != x.rows)
    throw Error(Errc::ShapeMismatch, "adjacency does not match feature rows");

  ForwardResult out;
  const bool drop = training && dropout_rate > 0.0;
  Rng rng(dropout_seed);
  const double keep_scale = 1.0 / (1.0 - dropout_rate);

  Matrix h = x;
  const std::size_t last = model.layer_count() - 1;
  for (std::size_t l = 0; l <= last; ++l) {
    Matrix agg = kernels::parallel::spmm(adj, h);
    Matrix z = kernels::parallel::gemm(agg, model.weights[l]);
    if (!model.biases.empty()) add_bias(z, model.biases[l]);
    out.cache.aggregated.push_back(std::move(agg));
    if (l == last) {
      softmax_rows(z);
      out.probs = std::move(z);
      break;
    }
    h = z;
    for (double& v : h.data) v = v > 0.0 ? v : 0.0;
    Matrix scale;
    if (drop) {
      scale = Matrix(h.rows, h.cols);
      for (std::size_t k = 0; k < h.data.size(); ++k) {
        scale.data[k] = rng.uniform() < dropout_rate ? 0.0 : keep_scale;
        h.data[k] *= scale.data[k];
      }
    }
    out.cache.pre_activation.push_back(std::move(z));
    out.cache.dropout_scale.push_back(std::move(scale));
  }
  return out;
}

std::array<double, 2> class_weights(const std::vector<Label>& labels, const std::vector<bool>& mask,
                                    WeightMode mode, std::array<double, 2> manual) {
  switch (mode) {
    case WeightMode::Uniform: return {1.0, 1.0};
    case WeightMode::Manual: return manual;
    case WeightMode::InverseFrequency: break;
  }
  if (mask.size() != labels.size()) throw Error(Errc::ShapeMismatch, "mask length != labels length");
  std::array<double, 2> count{};
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (mask[i]) count[static_cast<int>(labels[i])] += 1.0;
  if (count[0] == 0.0 || count[1] == 0.0)
    throw Error(Errc::ClassAbsent, "inverse-frequency weights need both classes in the training mask");
  const double n = count[0] + count[1];
  return {n / (2.0 * count[0]), n / (2.0 * count[1])};
}

double weighted_ce_loss(const Matrix& probs, const std::vector<Label>& labels,
                        const std::array<double, 2>& weights, const std::vector<bool>& mask) {
  double loss = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!mask[i]) continue;
    const int y = static_cast<int>(labels[i]);
    loss -= weights[y] * std::log(std::max(probs(i, y), kLogClamp));
  }
  return loss;
}

double weighted_ce_loss_mean(const Matrix& probs, const std::vector<Label>& labels,
                             const std::array<double, 2>& weights, const std::vector<bool>& mask) {
  double total_w = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (mask[i]) total_w += weights[static_cast<int>(labels[i])];
  return total_w == 0.0 ? 0.0 : weighted_ce_loss(probs, labels, weights, mask) / total_w;
}

Gradients compute_gradients(const GcnModel& model, const ForwardResult& fwd, const SparseMatrix& adj_t,
                            const std::vector<Label>& labels, const std::array<double, 2>& weights,
                            const std::vector<bool>& mask) {
  const Matrix& p = fwd.probs;
  // Fused softmax + cross-entropy: dL/dz = w_y (p - onehot(y)). Where the log
  // clamp is active the loss is flat and the gradient is zero.
  Matrix dz(p.rows, p.cols);
  for (std::size_t i = 0; i < p.rows; ++i) {
    if (!mask[i]) continue;
    const int y = static_cast<int>(labels[i]);
    if (p(i, y) < kLogClamp) continue;
    for (std::size_t c = 0; c < p.cols; ++c)
      dz(i, c) = weights[y] * (p(i, c) - (static_cast<int>(c) == y ? 1.0 : 0.0));
  }

  Gradients g;
  const std::size_t layers = model.layer_count();
  g.weights.resize(layers);
  if (!model.biases.empty()) g.biases.resize(layers);
  for (std::size_t l = layers; l-- > 0;) {
    g.weights[l] = kernels::parallel::gemm_tn(fwd.cache.aggregated[l], dz);
    if (!model.biases.empty()) {
      g.biases[l].assign(dz.cols, 0.0);
      for (std::size_t i = 0; i < dz.rows; ++i)
        for (std::size_t j = 0; j < dz.cols; ++j) g.biases[l][j] += dz(i, j);
    }
    if (l == 0) break;
    Matrix dh = kernels::parallel::spmm(adj_t, kernels::parallel::gemm_nt(dz, model.weights[l]));
    const Matrix& z = fwd.cache.pre_activation[l - 1];
    const Matrix& scale = fwd.cache.dropout_scale[l - 1];
    for (std::size_t k = 0; k < dh.data.size(); ++k) {
      double v = z.data[k] > 0.0 ? dh.data[k] : 0.0;
      if (!scale.data.empty()) v *= scale.data[k];
      dh.data[k] = v;
    }
    dz = std::move(dh);
  }
  return g;
}

Optimizer::Optimizer(const GcnConfig& cfg)
    : kind_(cfg.optimizer),
      lr_(cfg.learning_rate),
      beta1_(cfg.adam_beta1),
      beta2_(cfg.adam_beta2),
      eps_(cfg.adam_epsilon) {}

void Optimizer::update(std::vector<double>& param, const std::vector<double>& grad, std::vector<double>& m,
                       std::vector<double>& v) {
  if (kind_ == OptimizerKind::GradientDescent) {
    for (std::size_t k = 0; k < param.size(); ++k) param[k] -= lr_ * grad[k];
    return;
  }
  if (m.empty()) {
    m.assign(param.size(), 0.0);
    v.assign(param.size(), 0.0);
  }
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < param.size(); ++k) {
    m[k] = beta1_ * m[k] + (1.0 - beta1_) * grad[k];
    v[k] = beta2_ * v[k] + (1.0 - beta2_) * grad[k] * grad[k];
    param[k] -= lr_ * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps_);
  }
}

void Optimizer::step(GcnModel& model, const Gradients& grads) {
  ++t_;
  const std::size_t slots = model.weights.size() + model.biases.size();
  if (m_.size() != slots) {
    m_.assign(slots, {});
    v_.assign(slots, {});
  }
  for (std::size_t l = 0; l < model.weights.size(); ++l)
    update(model.weights[l].data, grads.weights[l].data, m_[l], v_[l]);
  for (std::size_t l = 0; l < model.biases.size(); ++l) {
    const std::size_t s = model.weights.size() + l;
    update(model.biases[l], grads.biases[l], m_[s], v_[s]);
  }
}

void backward_and_step(GcnModel& model, const ForwardResult& fwd, const SparseMatrix& adj_t,
                       const std::vector<Label>& labels, const std::array<double, 2>& weights,
                       const std::vector<bool>& mask, Optimizer& optimizer) {
  optimizer.step(model, compute_gradients(model, fwd, adj_t, labels, weights, mask));
}

std::vector<Prediction> predict(const GcnModel& model, const SparseMatrix& adj, const Matrix& x,
                                double threshold) {
  const ForwardResult f = forward(model, adj, x, false, 0.0, 0);
  std::vector<Prediction> out(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    out[i].phishing_probability = f.probs(i, 1);
    out[i].label = f.probs(i, 1) >= threshold ? Label::Phishing : Label::Benign;
  }
  return out;
}

TrainResult train(const GraphBatch& batch, const GcnConfig& cfg) {
  validate(cfg);
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = batch.labels.size();
  if (batch.features.rows != n || batch.norm_adj.n_rows != n || batch.train_mask.size() != n ||
      batch.test_mask.size() != n)
    throw Error(Errc::ShapeMismatch, "graph batch components disagree on node count");
  if (std::none_of(batch.train_mask.begin(), batch.train_mask.end(), [](bool b) { return b; }))
    throw Error(Errc::EmptyMask, "training mask selects no nodes");

  TrainResult result;
  TrainReport& report = result.report;
  report.config = cfg;
  report.seed = cfg.seed;
  report.class_weights = class_weights(batch.labels, batch.train_mask, cfg.weight_mode, cfg.manual_weights);

  GcnModel model = init_model(batch.features.cols, cfg);
  const SparseMatrix adj_t = transpose(batch.norm_adj);
  Optimizer optimizer(cfg);
  const std::uint64_t dropout_base = derive_seed(cfg.seed, kDropoutStream);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const ForwardResult fwd = forward(model, batch.norm_adj, batch.features, true, cfg.dropout_rate,
                                      derive_seed(dropout_base, epoch));
    report.epoch_loss.push_back(weighted_ce_loss(fwd.probs, batch.labels, report.class_weights, batch.train_mask));
    report.epoch_loss_mean.push_back(
        weighted_ce_loss_mean(fwd.probs, batch.labels, report.class_weights, batch.train_mask));
    backward_and_step(model, fwd, adj_t, batch.labels, report.class_weights, batch.train_mask, optimizer);

    std::vector<Label> pred;
    pred.reserve(n);
    for (const auto& p : predict(model, batch.norm_adj, batch.features, cfg.threshold)) pred.push_back(p.label);
    const MetricsReport m = metrics(confusion(pred, batch.labels, batch.train_mask));
    report.epoch_train_accuracy.push_back(m.accuracy);
    report.epoch_train_weighted_f1.push_back(m.weighted.f1);
  }

  if (std::any_of(batch.test_mask.begin(), batch.test_mask.end(), [](bool b) { return b; })) {
    std::vector<Label> pred;
    for (const auto& p : predict(model, batch.norm_adj, batch.features, cfg.threshold)) pred.push_back(p.label);
    report.test_metrics = metrics(confusion(pred, batch.labels, batch.test_mask));
  }
  report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.model = std::move(model);
  return result;
}

}  // namespace phishgraph
