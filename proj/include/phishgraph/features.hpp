#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phishgraph/graph.hpp"
#include "phishgraph/matrix.hpp"
#include "phishgraph/txmodel.hpp"

namespace phishgraph {

enum class FeatureSetKind { Explicit, Implicit };

const char* to_string(FeatureSetKind kind) noexcept;

struct MinMaxScaler {
  std::vector<double> min;
  std::vector<double> max;

  bool operator==(const MinMaxScaler&) const = default;
};

struct FeatureMatrix {
  std::vector<std::string> names;
  Matrix rows;  // one row per graph node, node order
  std::optional<MinMaxScaler> scaler;

  std::size_t column(std::string_view name) const;  // throws Error(ShapeMismatch) if absent

  bool operator==(const FeatureMatrix&) const = default;
};

const std::vector<std::string>& explicit_feature_names();
const std::vector<std::string>& implicit_feature_names();

enum class ExecPolicy { Serial, Parallel };

// Means over every transaction touching the node: timestamp, value, gas,
// gas price, gas used. A self-transfer counts once.
FeatureMatrix extract_explicit(const LabeledDataset& ds, const TxGraph& g,
                               ExecPolicy policy = ExecPolicy::Parallel);

// The 16 behavioural columns (counts, totals, hour and gap statistics,
// weekend ratios). Hours and weekdays are UTC; undefined cases yield 0.
FeatureMatrix extract_implicit(const LabeledDataset& ds, const TxGraph& g,
                               ExecPolicy policy = ExecPolicy::Parallel);

FeatureMatrix extract(FeatureSetKind kind, const LabeledDataset& ds, const TxGraph& g);

// Column-wise concatenation; row counts must agree.
FeatureMatrix concat(const FeatureMatrix& a, const FeatureMatrix& b);

// Fits min/max over the masked rows, maps x -> (x - min) / (max - min) with
// constant columns -> 0, and clamps every row to [0, 1]. Throws
// Error(EmptyMask) when no row is selected.
FeatureMatrix fit_minmax(const FeatureMatrix& x, const std::vector<bool>& fit_mask);

// Applies a previously fitted scaler (with clamping).
FeatureMatrix apply_minmax(const FeatureMatrix& x, const MinMaxScaler& scaler);

// Inverse map; constant columns come back as their fitted value.
Matrix denormalize(const Matrix& normalized, const MinMaxScaler& scaler);

}  // namespace phishgraph
