#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "phishgraph/batch.hpp"
#include "phishgraph/error.hpp"
#include "phishgraph/forest.hpp"
#include "phishgraph/gcn.hpp"
#include "phishgraph/report.hpp"

namespace phishgraph {

inline constexpr const char* kToolVersion = "0.1.0";

enum class FeatureChoice { Explicit, Implicit, Both };

const char* to_string(FeatureChoice choice) noexcept;
// Throws Error(InvalidConfig) for anything but explicit|implicit|both.
FeatureChoice parse_feature_choice(std::string_view text);

// Raw (unscaled) features for every graph node.
FeatureMatrix build_features(FeatureChoice choice, const LabeledDataset& ds, const TxGraph& g);

std::vector<Label> node_labels(const TxGraph& g, const LabeledDataset& ds);

struct RunOptions {
  FeatureChoice features = FeatureChoice::Implicit;
  double split_ratio = 0.8;
  std::uint64_t split_seed = 1;
  GcnConfig gcn;  // gcn.seed is the train seed
  bool fit_all = false;
  AdjacencyOptions adjacency;
  bool with_stats = false;
  bool with_importance = false;
  ForestConfig forest;

  bool operator==(const RunOptions&) const = default;
};

nlohmann::json to_json(const RunOptions& opt);
// Overlays keys present in j onto opt.
void merge_run_options(const nlohmann::json& j, RunOptions& opt);

// Raised when training cannot proceed (single-class split, empty mask,
// non-finite loss). Maps to exit code 3.
class TrainingFailure : public Error {
 public:
  using Error::Error;
};

struct ExperimentResult {
  TxGraph graph;
  FeatureMatrix features;  // scaled
  SplitMasks split;
  TrainResult trained;
  ReportBundle bundle;
};

// Graph, features, split, scaling, GCN training and test evaluation.
ExperimentResult run_experiment(const LabeledDataset& ds, const RunOptions& opt);

// Entry point for the phishgraph executable. Returns the process exit code:
// 0 success, 1 I/O, 2 usage or validation, 3 training failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace phishgraph
