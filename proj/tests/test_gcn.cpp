#include <doctest.h>

#include <cmath>

#include "phishgraph/batch.hpp"
#include "phishgraph/error.hpp"
#include "phishgraph/features.hpp"
#include "phishgraph/gcn.hpp"
#include "phishgraph/graph.hpp"
#include "phishgraph/synthetic.hpp"
#include "support.hpp"

using namespace phishgraph;
using testsupport::Dense;

namespace {

struct Instance {
  LabeledDataset ds;
  TxGraph g;
  SparseMatrix adj;
  Matrix x;
  std::vector<Label> labels;
};

Instance random_instance(Rng& rng, std::size_t nodes, std::size_t dim) {
  Instance in{testsupport::random_dataset(rng, nodes, nodes + 3, 0.4), {}, {}, {}, {}};
  in.g = build_graph(in.ds);
  in.adj = normalized_adjacency(in.g);
  in.x = testsupport::random_matrix(rng, in.g.nodes.size(), dim, 0.0, 1.0);
  for (const Address& a : in.g.nodes) in.labels.push_back(in.ds.label_of(a));
  return in;
}

double loss_of(const GcnModel& m, const Instance& in, const std::array<double, 2>& w, const std::vector<bool>& mask) {
  return weighted_ce_loss(forward(m, in.adj, in.x, false, 0.0, 0).probs, in.labels, w, mask);
}

GraphBatch synthetic_batch(std::uint64_t seed) {
  SyntheticConfig sc;
  sc.seed = seed;
  const LabeledDataset ds = generate_synthetic(sc);
  const TxGraph g = build_graph(ds);
  std::vector<Label> y;
  for (const Address& a : g.nodes) y.push_back(ds.label_of(a));
  const SplitMasks split = stratified_split(y, 0.8, seed);
  const FeatureMatrix x = fit_minmax(extract_implicit(ds, g), split.train_mask);
  return to_training_inputs(g, x, ds, split);
}

}  // namespace

TEST_CASE("class weights") {
  std::vector<Label> y(80, Label::Benign);
  y.insert(y.end(), 20, Label::Phishing);
  const std::vector<bool> all(y.size(), true);
  auto w = class_weights(y, all, WeightMode::InverseFrequency);
  CHECK(w[0] == 0.625);
  CHECK(w[1] == 2.5);
  CHECK(class_weights(y, all, WeightMode::Uniform) == std::array<double, 2>{1.0, 1.0});
  CHECK(class_weights(y, all, WeightMode::Manual, {0.3, 4.0}) == std::array<double, 2>{0.3, 4.0});

  std::vector<Label> even(10, Label::Benign);
  even.insert(even.end(), 10, Label::Phishing);
  CHECK(class_weights(even, std::vector<bool>(20, true), WeightMode::InverseFrequency) ==
        std::array<double, 2>{1.0, 1.0});

  // 7.63% phishing share.
  std::vector<Label> skew(9237, Label::Benign);
  skew.insert(skew.end(), 763, Label::Phishing);
  w = class_weights(skew, std::vector<bool>(skew.size(), true), WeightMode::InverseFrequency);
  CHECK(w[1] == doctest::Approx(6.55).epsilon(0.001));
  CHECK(w[0] == doctest::Approx(0.54).epsilon(0.003));

  try {
    class_weights(std::vector<Label>(5, Label::Benign), std::vector<bool>(5, true), WeightMode::InverseFrequency);
    FAIL("expected ClassAbsent");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ClassAbsent);
  }
}

TEST_CASE("weighted loss by hand") {
  Matrix p(1, 2);
  p.data = {0.0, 1.0};
  CHECK(weighted_ce_loss(p, {Label::Phishing}, {1.0, 1.0}, {true}) == 0.0);
  p.data = {0.5, 0.5};
  CHECK(weighted_ce_loss(p, {Label::Phishing}, {1.0, 2.0}, {true}) == doctest::Approx(1.386294).epsilon(1e-6));
  CHECK(weighted_ce_loss_mean(p, {Label::Phishing}, {1.0, 2.0}, {true}) == doctest::Approx(std::log(2.0)));
  p.data = {1.0, 0.0};
  CHECK(weighted_ce_loss(p, {Label::Phishing}, {1.0, 1.0}, {true}) == doctest::Approx(-std::log(1e-12)));

  Matrix q(2, 2);
  q.data = {0.9, 0.1, 0.2, 0.8};
  CHECK(weighted_ce_loss(q, {Label::Benign, Label::Phishing}, {1.0, 1.0}, {true, true}) ==
        doctest::Approx(0.328504).epsilon(1e-6));
  CHECK(weighted_ce_loss(q, {Label::Benign, Label::Phishing}, {1.0, 1.0}, {false, true}) ==
        doctest::Approx(-std::log(0.8)));
}

TEST_CASE("loss scales linearly in the class weights") {
  Rng rng(12);
  for (int round = 0; round < 30; ++round) {
    const std::size_t n = 2 + rng.below(20);
    Matrix p(n, 2);
    std::vector<Label> y(n);
    std::vector<bool> mask(n);
    for (std::size_t i = 0; i < n; ++i) {
      p(i, 1) = rng.uniform(0.01, 0.99);
      p(i, 0) = 1.0 - p(i, 1);
      y[i] = rng.bernoulli(0.5) ? Label::Phishing : Label::Benign;
      mask[i] = rng.bernoulli(0.7);
    }
    const std::array<double, 2> w{rng.uniform(0.1, 3.0), rng.uniform(0.1, 3.0)};
    const double c = rng.uniform(0.1, 10.0);
    const double base = weighted_ce_loss(p, y, w, mask);
    CHECK(std::abs(weighted_ce_loss(p, y, {c * w[0], c * w[1]}, mask) - c * base) <= 1e-9 * std::max(1.0, c * base));

    double plain = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask[i]) plain -= std::log(p(i, static_cast<std::size_t>(y[i])));
    CHECK(weighted_ce_loss(p, y, {1.0, 1.0}, mask) == doctest::Approx(plain).epsilon(1e-12));
  }
}

TEST_CASE("forward with symmetric logits gives one half") {
  GcnModel m;
  m.weights.push_back(Matrix(2, 3, 0.0));
  m.weights.push_back(Matrix(3, 2, 0.0));
  m.weights[0](0, 0) = 1.0;
  m.weights[1](0, 0) = 0.7;
  m.weights[1](0, 1) = 0.7;
  Matrix x(1, 2);
  x.data = {1.0, 0.0};
  const ForwardResult f = forward(m, identity_sparse(1), x, false, 0.0, 0);
  CHECK(f.probs(0, 0) == 0.5);
  CHECK(f.probs(0, 1) == 0.5);
  CHECK(predict(m, identity_sparse(1), x, 0.5)[0].label == Label::Phishing);
  CHECK(predict(m, identity_sparse(1), x, 0.999)[0].label == Label::Benign);

  try {
    forward(m, identity_sparse(1), Matrix(1, 3), false, 0.0, 0);
    FAIL("expected ShapeMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ShapeMismatch);
  }
}

TEST_CASE("forward matches the dense oracle") {
  Rng rng(2024);
  for (int round = 0; round < 25; ++round) {
    const Instance in = random_instance(rng, 6, 3);
    const bool bias = round % 2 == 1;
    const GcnModel m = testsupport::random_model(rng, 3, {4, 3}, bias);
    const ForwardResult f = forward(m, in.adj, in.x, false, 0.0, 0);
    const Dense want = testsupport::dense_forward(m, testsupport::dense_normalized_adjacency(in.ds, in.g.nodes),
                                                  testsupport::dense_of(in.x));
    const auto preds = predict(m, in.adj, in.x, 0.5);
    for (std::size_t i = 0; i < in.x.rows; ++i) {
      CHECK(std::abs(f.probs(i, 0) - want[i][0]) <= 1e-9);
      CHECK(std::abs(f.probs(i, 1) - want[i][1]) <= 1e-9);
      CHECK(std::abs(f.probs(i, 0) + f.probs(i, 1) - 1.0) <= 1e-9);
      if (want[i][0] != want[i][1])
        CHECK(preds[i].label == (want[i][1] > want[i][0] ? Label::Phishing : Label::Benign));
    }
    CHECK(forward(m, in.adj, in.x, false, 0.5, 1).probs == f.probs);
    CHECK(forward(m, in.adj, in.x, true, 0.0, 99).probs == f.probs);
  }
}

TEST_CASE("dropout in training mode is seeded and rescales survivors") {
  Rng rng(8);
  const Instance in = random_instance(rng, 12, 4);
  const GcnModel m = testsupport::random_model(rng, 4, {16}, false);
  const ForwardResult a = forward(m, in.adj, in.x, true, 0.5, 3);
  const ForwardResult b = forward(m, in.adj, in.x, true, 0.5, 3);
  CHECK(a.probs == b.probs);
  REQUIRE(a.cache.dropout_scale.size() == 1);
  for (double s : a.cache.dropout_scale[0].data) CHECK((s == 0.0 || s == 2.0));
}

TEST_CASE("analytic gradients match central differences") {
  Rng rng(31337);
  const double h = 1e-5;
  int checked = 0;
  for (int round = 0; round < 24; ++round) {
    const Instance in = random_instance(rng, 5, 3);
    const bool bias = round % 3 == 0;
    GcnModel m = testsupport::random_model(rng, 3, round % 2 ? std::vector<std::size_t>{4, 3} : std::vector<std::size_t>{5},
                                           bias);
    std::vector<bool> mask(in.labels.size());
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = rng.bernoulli(0.8);
    const std::array<double, 2> w{rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)};
    const ForwardResult f = forward(m, in.adj, in.x, false, 0.0, 0);
    const Gradients g = compute_gradients(m, f, transpose(in.adj), in.labels, w, mask);
    REQUIRE(g.weights.size() == m.weights.size());

    auto check_param = [&](double& p, double analytic) {
      const double keep = p;
      p = keep + h;
      const double up = loss_of(m, in, w, mask);
      p = keep - h;
      const double down = loss_of(m, in, w, mask);
      p = keep;
      const double numeric = (up - down) / (2 * h);
      CHECK(std::abs(analytic - numeric) <= 1e-4 * std::max(std::abs(analytic), std::abs(numeric)) + 1e-7);
      ++checked;
    };
    for (std::size_t l = 0; l < m.weights.size(); ++l)
      for (std::size_t k = 0; k < m.weights[l].data.size(); ++k) check_param(m.weights[l].data[k], g.weights[l].data[k]);
    for (std::size_t l = 0; l < m.biases.size(); ++l)
      for (std::size_t k = 0; k < m.biases[l].size(); ++k) check_param(m.biases[l][k], g.biases[l][k]);
  }
  CHECK(checked > 500);
}

TEST_CASE("optimizer steps") {
  Rng rng(5);
  const Instance in = random_instance(rng, 8, 3);
  std::vector<bool> mask(in.labels.size(), true);
  const std::array<double, 2> w{1.0, 1.0};

  for (OptimizerKind kind : {OptimizerKind::GradientDescent, OptimizerKind::Adam}) {
    GcnModel m = testsupport::random_model(rng, 3, {4}, false);
    const GcnModel before = m;
    GcnConfig cfg;
    cfg.optimizer = kind;
    cfg.learning_rate = 0.0;
    Optimizer frozen(cfg);
    backward_and_step(m, forward(m, in.adj, in.x, false, 0.0, 0), transpose(in.adj), in.labels, w, mask, frozen);
    CHECK(m == before);
  }

  // Single linear layer + softmax is convex in W.
  GcnModel lin;
  lin.weights.push_back(testsupport::random_matrix(rng, 3, 2));
  GcnConfig cfg;
  cfg.optimizer = OptimizerKind::GradientDescent;
  cfg.learning_rate = 0.05;
  Optimizer gd(cfg);
  const double before = loss_of(lin, in, w, mask);
  backward_and_step(lin, forward(lin, in.adj, in.x, false, 0.0, 0), transpose(in.adj), in.labels, w, mask, gd);
  CHECK(loss_of(lin, in, w, mask) < before);
}

TEST_CASE("config validation") {
  auto bad = [](auto mutate) {
    GcnConfig c;
    mutate(c);
    try {
      validate(c);
      return false;
    } catch (const Error& e) {
      return e.code() == Errc::InvalidConfig;
    }
  };
  CHECK(bad([](GcnConfig& c) { c.hidden_dims.clear(); }));
  CHECK(bad([](GcnConfig& c) { c.epochs = 0; }));
  CHECK(bad([](GcnConfig& c) { c.learning_rate = 0.0; }));
  CHECK(bad([](GcnConfig& c) { c.dropout_rate = 1.0; }));
  CHECK(bad([](GcnConfig& c) { c.threshold = 1.0; }));
  CHECK_NOTHROW(validate(GcnConfig{}));
}

TEST_CASE("glorot initialization respects the fan bound") {
  GcnConfig cfg;
  cfg.seed = 9;
  const GcnModel m = init_model(16, cfg);
  REQUIRE(m.layer_count() == 3);
  CHECK(m.weights[0].rows == 16);
  CHECK(m.weights[0].cols == 64);
  CHECK(m.weights[2].cols == 2);
  for (const Matrix& w : m.weights) {
    const double bound = std::sqrt(6.0 / static_cast<double>(w.rows + w.cols));
    for (double v : w.data) CHECK(std::abs(v) <= bound);
  }
  CHECK(init_model(16, cfg) == m);
  CHECK(m.biases.empty());
}

TEST_CASE("training is deterministic and reports one loss per epoch") {
  const GraphBatch batch = synthetic_batch(3);
  GcnConfig cfg;
  cfg.seed = 5;
  cfg.epochs = 1;
  CHECK(train(batch, cfg).report.epoch_loss.size() == 1);
  cfg.epochs = 30;
  const TrainResult a = train(batch, cfg);
  const TrainResult b = train(batch, cfg);
  CHECK(a.model == b.model);
  CHECK(a.report.epoch_loss == b.report.epoch_loss);
  CHECK(a.report.epoch_loss.size() == 30);
  CHECK(a.report.test_metrics.has_value());

  GraphBatch empty = batch;
  std::fill(empty.train_mask.begin(), empty.train_mask.end(), false);
  try {
    train(empty, cfg);
    FAIL("expected EmptyMask");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyMask);
  }
}

TEST_CASE("training fits the separable synthetic corpus") {
  for (std::uint64_t seed : {1, 2, 3}) {
    GcnConfig cfg;
    cfg.seed = seed;
    const TrainResult r = train(synthetic_batch(seed), cfg);
    CAPTURE(seed);
    CHECK(r.report.epoch_train_weighted_f1.back() >= 0.95);
    CHECK(r.report.epoch_loss.back() < r.report.epoch_loss.front());
  }
}
