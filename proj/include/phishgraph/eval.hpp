#pragma once

#include <cstdint>
#include <vector>

#include "phishgraph/txmodel.hpp"

namespace phishgraph {

struct SplitMasks {
  std::vector<bool> train_mask;
  std::vector<bool> test_mask;
  std::uint64_t seed = 0;
  double ratio = 0.8;
};

// Per class: shuffle node ids with the seeded RNG and send the first
// floor(ratio * n_c) to train, the remainder to test.
// Throws Error(InvalidConfig) unless 0 < ratio < 1.
SplitMasks stratified_split(const std::vector<Label>& labels, double ratio, std::uint64_t seed);

// Phishing is the positive class.
struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

// Counts over masked positions only. Throws Error(ShapeMismatch).
ConfusionMatrix confusion(const std::vector<Label>& predicted, const std::vector<Label>& truth,
                          const std::vector<bool>& mask);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;

  bool operator==(const ClassMetrics&) const = default;
};

struct MetricsReport {
  ClassMetrics benign;
  ClassMetrics phishing;
  ClassMetrics weighted;  // support-weighted averages; support = total
  double accuracy = 0.0;
  ConfusionMatrix confusion;

  bool operator==(const MetricsReport&) const = default;
};

// 0/0 -> 0 for every ratio.
MetricsReport metrics(const ConfusionMatrix& cm);

}  // namespace phishgraph
