#pragma once

#include <array>
#include <span>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "phishgraph/features.hpp"
#include "phishgraph/matrix.hpp"
#include "phishgraph/txmodel.hpp"

namespace phishgraph {

struct ForestConfig {
  std::size_t n_trees = 100;
  std::size_t max_depth = 12;
  std::size_t feature_subsample = 0;  // 0 selects ceil(sqrt(d))
  std::size_t min_leaf = 2;
  std::uint64_t seed = 0;
  bool class_weighting = false;  // inverse-frequency sample weights
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x <= threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::array<double, 2> class_counts{};  // weighted, indexed by Label code

  bool is_leaf() const noexcept { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::size_t max_depth = 0;
  // Weighted impurity decrease per feature, as a fraction of the root weight.
  std::vector<double> impurity_decrease;

  Label predict(std::span<const double> x) const;
  bool operator==(const DecisionTree&) const = default;
};

struct Forest {
  std::vector<DecisionTree> trees;
  std::size_t n_trees = 0;
  std::vector<std::uint64_t> tree_seeds;
  std::size_t feature_subsample = 0;
  std::vector<std::string> feature_names;

  // Majority vote; ties go to Benign.
  Label predict(std::span<const double> x) const;
  bool operator==(const Forest&) const = default;
};

// Bootstrap-aggregated Gini trees. Throws Error(SingleClass) when the labels
// hold one class and Error(InvalidConfig) for bad hyperparameters.
Forest train_forest(const FeatureMatrix& x, const std::vector<Label>& labels, const ForestConfig& cfg,
                    ExecPolicy policy = ExecPolicy::Parallel);

struct FeatureScore {
  std::string feature;
  double score = 0.0;
  std::size_t rank = 0;  // 1-based

  bool operator==(const FeatureScore&) const = default;
};

// Mean decrease in impurity averaged over trees, normalized to sum to 1,
// sorted descending with ties broken by name.
std::vector<FeatureScore> feature_importance(const Forest& forest);

}  // namespace phishgraph
