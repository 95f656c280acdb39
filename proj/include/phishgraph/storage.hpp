#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "phishgraph/features.hpp"
#include "phishgraph/gcn.hpp"
#include "phishgraph/txmodel.hpp"

namespace phishgraph {

// All binary formats are little-endian with a 4-byte magic and a u32
// version. Readers throw Error(FormatError) on any mismatch or truncation.

inline constexpr std::uint32_t kDatasetFormatVersion = 1;
inline constexpr std::uint32_t kFeatureFormatVersion = 1;
inline constexpr std::uint32_t kModelFormatVersion = 1;

void write_dataset(std::ostream& out, const LabeledDataset& ds);
LabeledDataset read_dataset(std::istream& in);

void write_features_binary(std::ostream& out, const FeatureMatrix& fm);
FeatureMatrix read_features_binary(std::istream& in);

// Header "address,<feature names>"; one row per node in graph order.
void write_features_csv(std::ostream& out, const FeatureMatrix& fm, const std::vector<Address>& nodes);

void write_model(std::ostream& out, const GcnModel& model);
GcnModel read_model(std::istream& in);

// Sidecar kept next to model.bin so a model is only applied to the feature
// layout it was trained on.
struct ModelSidecar {
  GcnConfig config;
  std::vector<std::string> feature_names;
  std::string feature_set;
  std::optional<MinMaxScaler> scaler;
  AdjacencyOptions adjacency;
};

nlohmann::json to_json(const ModelSidecar& sidecar);
ModelSidecar sidecar_from_json(const nlohmann::json& j);

// Throws Error(LayoutMismatch) unless names match the sidecar exactly.
void check_feature_layout(const ModelSidecar& sidecar, const std::vector<std::string>& names);

// File helpers. Throw Error(IoError).
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace phishgraph
