#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phishgraph/batch.hpp"
#include "phishgraph/eval.hpp"
#include "phishgraph/matrix.hpp"

namespace phishgraph {

enum class WeightMode { Uniform, InverseFrequency, Manual };
enum class OptimizerKind { Adam, GradientDescent };

const char* to_string(WeightMode mode) noexcept;
const char* to_string(OptimizerKind kind) noexcept;

struct GcnConfig {
  std::vector<std::size_t> hidden_dims{64, 32};
  double dropout_rate = 0.5;
  double learning_rate = 0.01;
  std::size_t epochs = 200;
  WeightMode weight_mode = WeightMode::InverseFrequency;
  std::array<double, 2> manual_weights{1.0, 1.0};  // {benign, phishing}
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double threshold = 0.5;  // on the phishing probability, inclusive
  bool use_bias = false;

  bool operator==(const GcnConfig&) const = default;
};

// Throws Error(InvalidConfig).
void validate(const GcnConfig& cfg);

// Layer l maps rows of width weights[l].rows to weights[l].cols; the last
// layer has 2 outputs (benign, phishing).
struct GcnModel {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;  // empty unless use_bias

  std::size_t layer_count() const noexcept { return weights.size(); }
  std::size_t input_dim() const noexcept { return weights.empty() ? 0 : weights.front().rows; }
  bool operator==(const GcnModel&) const = default;
};

// Glorot-uniform weights, bound sqrt(6 / (fan_in + fan_out)); zero biases.
GcnModel init_model(std::size_t input_dim, const GcnConfig& cfg);

struct ForwardCache {
  std::vector<Matrix> aggregated;     // A_hat * H_l, one per layer
  std::vector<Matrix> pre_activation; // A_hat * H_l * W_l, hidden layers only
  std::vector<Matrix> dropout_scale;  // per hidden layer; empty matrix = no dropout
};

struct ForwardResult {
  Matrix probs;  // n x 2, rows sum to 1
  ForwardCache cache;
};

// H0 = X; hidden H_{l+1} = dropout(ReLU(A_hat H_l W_l)); output softmax(A_hat H_L W_L).
// Inverted dropout on hidden activations only when training.
ForwardResult forward(const GcnModel& model, const SparseMatrix& adj, const Matrix& x, bool training,
                      double dropout_rate, std::uint64_t dropout_seed);

// {w_benign, w_phishing} over the masked labels. InverseFrequency gives
// N / (2 N_c) and throws Error(ClassAbsent) when a class is missing.
std::array<double, 2> class_weights(const std::vector<Label>& labels, const std::vector<bool>& mask,
                                    WeightMode mode, std::array<double, 2> manual = {1.0, 1.0});

inline constexpr double kLogClamp = 1e-12;

// -sum_{i in mask} w_{y_i} log max(p_i(y_i), 1e-12).
double weighted_ce_loss(const Matrix& probs, const std::vector<Label>& labels,
                        const std::array<double, 2>& weights, const std::vector<bool>& mask);

// Loss divided by the total weight of the masked rows.
double weighted_ce_loss_mean(const Matrix& probs, const std::vector<Label>& labels,
                             const std::array<double, 2>& weights, const std::vector<bool>& mask);

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
};

// Exact gradient of weighted_ce_loss through the cached forward pass.
// adj_t is the transpose of the operator used in forward.
Gradients compute_gradients(const GcnModel& model, const ForwardResult& fwd, const SparseMatrix& adj_t,
                            const std::vector<Label>& labels, const std::array<double, 2>& weights,
                            const std::vector<bool>& mask);

class Optimizer {
 public:
  explicit Optimizer(const GcnConfig& cfg);
  void step(GcnModel& model, const Gradients& grads);

 private:
  void update(std::vector<double>& param, const std::vector<double>& grad, std::vector<double>& m,
              std::vector<double>& v);

  OptimizerKind kind_;
  double lr_, beta1_, beta2_, eps_;
  std::uint64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

void backward_and_step(GcnModel& model, const ForwardResult& fwd, const SparseMatrix& adj_t,
                       const std::vector<Label>& labels, const std::array<double, 2>& weights,
                       const std::vector<bool>& mask, Optimizer& optimizer);

struct TrainReport {
  std::vector<double> epoch_loss;       // sum form
  std::vector<double> epoch_loss_mean;  // divided by masked weight
  std::vector<double> epoch_train_accuracy;
  std::vector<double> epoch_train_weighted_f1;
  std::optional<MetricsReport> test_metrics;
  std::array<double, 2> class_weights{1.0, 1.0};
  double wall_time_s = 0.0;
  GcnConfig config;
  std::uint64_t seed = 0;

  bool operator==(const TrainReport&) const = default;
};

struct TrainResult {
  GcnModel model;
  TrainReport report;
};

// Full-batch training on batch.train_mask; test metrics on batch.test_mask.
TrainResult train(const GraphBatch& batch, const GcnConfig& cfg);

struct Prediction {
  Label label = Label::Benign;
  double phishing_probability = 0.0;
};

// Phishing iff p(phishing) >= threshold.
std::vector<Prediction> predict(const GcnModel& model, const SparseMatrix& adj, const Matrix& x,
                                double threshold);

}  // namespace phishgraph
