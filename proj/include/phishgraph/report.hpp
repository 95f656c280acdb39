#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "phishgraph/eval.hpp"
#include "phishgraph/forest.hpp"
#include "phishgraph/gcn.hpp"
#include "phishgraph/stats.hpp"
#include "phishgraph/synthetic.hpp"

namespace phishgraph {

// JSON mappings. Wall time is deliberately not part of TrainReport JSON so
// that report files are byte-stable across reruns.
void to_json(nlohmann::json& j, const GcnConfig& c);
void from_json(const nlohmann::json& j, GcnConfig& c);
void to_json(nlohmann::json& j, const SyntheticConfig& c);
void from_json(const nlohmann::json& j, SyntheticConfig& c);
void to_json(nlohmann::json& j, const ForestConfig& c);
void from_json(const nlohmann::json& j, ForestConfig& c);
void to_json(nlohmann::json& j, const ClassMetrics& m);
void from_json(const nlohmann::json& j, ClassMetrics& m);
void to_json(nlohmann::json& j, const ConfusionMatrix& m);
void from_json(const nlohmann::json& j, ConfusionMatrix& m);
void to_json(nlohmann::json& j, const MetricsReport& m);
void from_json(const nlohmann::json& j, MetricsReport& m);
void to_json(nlohmann::json& j, const TrainReport& r);
void from_json(const nlohmann::json& j, TrainReport& r);
void to_json(nlohmann::json& j, const FeatureClassStats& s);
void from_json(const nlohmann::json& j, FeatureClassStats& s);
void to_json(nlohmann::json& j, const FeatureScore& s);
void from_json(const nlohmann::json& j, FeatureScore& s);

struct NodePrediction {
  std::string address;
  std::string split;  // "train" | "test"
  Label truth = Label::Benign;
  Label predicted = Label::Benign;
  double phishing_probability = 0.0;

  bool operator==(const NodePrediction&) const = default;
};

// Everything a run can report; absent parts are omitted from both outputs.
struct ReportBundle {
  std::optional<MetricsReport> metrics;
  std::optional<TrainReport> train;
  std::optional<ClassFeatureStats> stats;
  std::optional<std::vector<FeatureScore>> importance;
  std::optional<std::vector<NodePrediction>> predictions;
  std::string feature_set;

  bool operator==(const ReportBundle&) const;
};

inline constexpr int kReportSchemaVersion = 1;

nlohmann::json report_to_json(const ReportBundle& bundle);
ReportBundle report_from_json(const nlohmann::json& j);

// Precision/Recall/F1-Score rows by Benign/Phishing/Weighted Avg columns,
// two decimals, followed by whichever optional sections are present.
std::string format_report_table(const ReportBundle& bundle);

struct ReportPaths {
  std::filesystem::path json;
  std::filesystem::path text;
};

// Writes <dir>/metrics.json and <dir>/report.txt. Throws Error(IoError).
ReportPaths emit_report(const ReportBundle& bundle, const std::filesystem::path& dir);

// Canonical JSON text (2-space indent, trailing newline).
std::string dump_json(const nlohmann::json& j);

}  // namespace phishgraph
