#pragma once

#include <vector>

#include "phishgraph/eval.hpp"
#include "phishgraph/features.hpp"
#include "phishgraph/graph.hpp"

namespace phishgraph {

// Packed inputs for one GCN run: X, the normalized operator, labels and masks.
struct GraphBatch {
  Matrix features;
  SparseMatrix norm_adj;
  std::vector<Label> labels;
  std::vector<bool> train_mask;
  std::vector<bool> test_mask;
};

// Throws Error(ShapeMismatch) if X rows or masks disagree with the node count.
GraphBatch to_training_inputs(const TxGraph& g, const FeatureMatrix& x, const LabeledDataset& ds,
                              const SplitMasks& split, AdjacencyOptions options = {});

}  // namespace phishgraph
