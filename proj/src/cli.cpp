#include "phishgraph/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "phishgraph/error.hpp"
#include "phishgraph/ingest.hpp"
#include "phishgraph/stats.hpp"
#include "phishgraph/storage.hpp"
#include "phishgraph/synthetic.hpp"
#ifdef PHISHGRAPH_WITH_FETCH
#include "phishgraph/fetch.hpp"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace phishgraph {

const char* to_string(FeatureChoice choice) noexcept {
  switch (choice) {
    case FeatureChoice::Explicit: return "explicit";
    case FeatureChoice::Implicit: return "implicit";
    case FeatureChoice::Both: return "both";
  }
  return "?";
}

FeatureChoice parse_feature_choice(std::string_view text) {
  if (text == "explicit") return FeatureChoice::Explicit;
  if (text == "implicit") return FeatureChoice::Implicit;
  if (text == "both") return FeatureChoice::Both;
  throw Error(Errc::InvalidConfig, "unknown feature set '" + std::string(text) + "' (explicit|implicit|both)");
}

FeatureMatrix build_features(FeatureChoice choice, const LabeledDataset& ds, const TxGraph& g) {
  switch (choice) {
    case FeatureChoice::Explicit: return extract_explicit(ds, g);
    case FeatureChoice::Implicit: return extract_implicit(ds, g);
    case FeatureChoice::Both: return concat(extract_explicit(ds, g), extract_implicit(ds, g));
  }
  throw Error(Errc::InvalidConfig, "bad feature choice");
}

std::vector<Label> node_labels(const TxGraph& g, const LabeledDataset& ds) {
  std::vector<Label> labels;
  labels.reserve(g.nodes.size());
  for (const Address& a : g.nodes) labels.push_back(ds.label_of(a));
  return labels;
}

json to_json(const RunOptions& opt) {
  return {
      {"features", to_string(opt.features)},
      {"split_ratio", opt.split_ratio},
      {"split_seed", opt.split_seed},
      {"gcn", opt.gcn},
      {"fit_all", opt.fit_all},
      {"adjacency", {{"self_loops", opt.adjacency.add_self_loops}, {"symmetrize", opt.adjacency.symmetrize}}},
      {"with_stats", opt.with_stats},
      {"with_importance", opt.with_importance},
      {"forest", opt.forest},
  };
}

void merge_run_options(const json& j, RunOptions& opt) {
  try {
    if (j.contains("features")) opt.features = parse_feature_choice(j.at("features").get<std::string>());
    if (j.contains("split_ratio")) j.at("split_ratio").get_to(opt.split_ratio);
    if (j.contains("split_seed")) j.at("split_seed").get_to(opt.split_seed);
    if (j.contains("gcn")) {
      json g = opt.gcn;
      g.merge_patch(j.at("gcn"));
      g.get_to(opt.gcn);
    }
    if (j.contains("fit_all")) j.at("fit_all").get_to(opt.fit_all);
    if (j.contains("adjacency")) {
      const json& a = j.at("adjacency");
      opt.adjacency.add_self_loops = a.value("self_loops", opt.adjacency.add_self_loops);
      opt.adjacency.symmetrize = a.value("symmetrize", opt.adjacency.symmetrize);
    }
    if (j.contains("with_stats")) j.at("with_stats").get_to(opt.with_stats);
    if (j.contains("with_importance")) j.at("with_importance").get_to(opt.with_importance);
    if (j.contains("forest")) {
      json f = opt.forest;
      f.merge_patch(j.at("forest"));
      f.get_to(opt.forest);
    }
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, std::string("config: ") + e.what());
  }
}

ExperimentResult run_experiment(const LabeledDataset& ds, const RunOptions& opt) {
  validate(opt.gcn);
  if (ds.transactions().empty()) throw Error(Errc::InvalidDataset, "dataset has no transactions");
  ExperimentResult r;
  r.graph = build_graph(ds);
  const std::vector<Label> labels = node_labels(r.graph, ds);
  const FeatureMatrix raw = build_features(opt.features, ds, r.graph);

  try {
    r.split = stratified_split(labels, opt.split_ratio, opt.split_seed);
    const std::vector<bool> fit_mask = opt.fit_all ? std::vector<bool>(labels.size(), true) : r.split.train_mask;
    r.features = fit_minmax(raw, fit_mask);
    const GraphBatch batch = to_training_inputs(r.graph, r.features, ds, r.split, opt.adjacency);
    r.trained = train(batch, opt.gcn);
    const auto& losses = r.trained.report.epoch_loss;
    if (!losses.empty() && !std::isfinite(losses.back()))
      throw TrainingFailure(Errc::InvalidConfig, "training diverged (non-finite loss)");

    const std::vector<Prediction> pred = predict(r.trained.model, batch.norm_adj, batch.features, opt.gcn.threshold);
    std::vector<Label> pred_labels;
    std::vector<NodePrediction> nodes;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      pred_labels.push_back(pred[i].label);
      nodes.push_back({r.graph.nodes[i].str(), r.split.train_mask[i] ? "train" : "test", labels[i], pred[i].label,
                       pred[i].phishing_probability});
    }
    r.bundle.metrics = metrics(confusion(pred_labels, labels, r.split.test_mask));
    r.bundle.train = r.trained.report;
    r.bundle.predictions = std::move(nodes);
  } catch (const TrainingFailure&) {
    throw;
  } catch (const Error& e) {
    switch (e.code()) {
      case Errc::SingleClass:
      case Errc::ClassAbsent:
      case Errc::EmptyMask: throw TrainingFailure(e.code(), e.what());
      default: throw;
    }
  }
  r.bundle.feature_set = to_string(opt.features);

  if (opt.with_stats) r.bundle.stats = class_feature_stats(raw, labels);
  if (opt.with_importance) {
    // Trained on the training nodes only so the test set stays unseen.
    FeatureMatrix train_x;
    train_x.names = raw.names;
    std::vector<Label> train_y;
    std::size_t n_train = 0;
    for (bool b : r.split.train_mask) n_train += b;
    train_x.rows = Matrix(n_train, raw.rows.cols);
    for (std::size_t i = 0, k = 0; i < labels.size(); ++i) {
      if (!r.split.train_mask[i]) continue;
      auto src = raw.rows.row(i);
      std::copy(src.begin(), src.end(), train_x.rows.row(k++).begin());
      train_y.push_back(labels[i]);
    }
    r.bundle.importance = feature_importance(train_forest(train_x, train_y, opt.forest));
  }
  return r;
}

namespace {

class UsageError : public Error {
 public:
  explicit UsageError(std::string message) : Error(Errc::InvalidConfig, std::move(message)) {}
};

int exit_code_for(const Error& e) {
  if (dynamic_cast<const TrainingFailure*>(&e)) return 3;
  switch (e.code()) {
    case Errc::IoError:
    case Errc::NetworkError:
    case Errc::RateLimited:
    case Errc::ApiError: return 1;
    default: return 2;
  }
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

class Manifest {
 public:
  Manifest(std::string subcommand, fs::path path) : path_(std::move(path)) {
    j_["tool"] = "phishgraph";
    j_["version"] = kToolVersion;
    j_["subcommand"] = std::move(subcommand);
    j_["inputs"] = json::object();
    j_["artifacts"] = json::array();
  }

  void config(json c) { j_["config"] = std::move(c); }
  void seed(const std::string& name, std::uint64_t v) { j_["seeds"][name] = v; }
  void input(const fs::path& p) { j_["inputs"][p.string()] = sha256_file(p); }
  void artifact(const fs::path& p) { j_["artifacts"].push_back(p.string()); }
  void write() const { write_file(path_, dump_json(j_)); }

 private:
  fs::path path_;
  json j_;
};

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + dir.string() + ": " + ec.message());
}

void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) ensure_dir(file.parent_path());
}

fs::path sibling(const fs::path& p, const std::string& suffix) { return fs::path(p.string() + suffix); }

LabeledDataset load_dataset(const fs::path& path) {
  std::istringstream in(read_file(path));
  return read_dataset(in);
}

std::string dataset_bytes(const LabeledDataset& ds) {
  std::ostringstream os;
  write_dataset(os, ds);
  return os.str();
}

json load_json_file(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::InvalidConfig, path.string() + ": " + e.what());
  }
}

json reject_json(const RowReject& r) {
  return {{"source", r.source}, {"line", r.line}, {"reason", to_string(r.reason)}, {"detail", r.detail}};
}

// Output location shared by ingest and synth: --out <file> or --out-dir <dir>.
struct DatasetOut {
  std::string out;
  std::string out_dir;

  void add(CLI::App* app) {
    auto* a = app->add_option("--out", out, "Dataset file to write");
    auto* b = app->add_option("--out-dir", out_dir, "Directory for dataset.bin and manifest.json");
    a->excludes(b);
  }
  fs::path dataset() const { return out.empty() ? fs::path(out_dir) / "dataset.bin" : fs::path(out); }
  fs::path manifest() const {
    return out.empty() ? fs::path(out_dir) / "manifest.json" : sibling(out, ".manifest.json");
  }
  void check() const {
    if (out.empty() && out_dir.empty()) throw UsageError("one of --out or --out-dir is required");
  }
};

// ---------------------------------------------------------------- ingest

struct IngestArgs {
  std::vector<std::string> tx;
  std::string phishing_list;
  std::string verified;
  bool require_verified = false;
  DatasetOut out;
};

int cmd_ingest(const IngestArgs& a, std::ostream& out, std::ostream& err) {
  a.out.check();
  std::vector<Transaction> txs;
  std::vector<RowReject> parse_rejects;
  for (const std::string& path : a.tx) {
    std::istringstream in(read_file(path));
    const bool is_json = fs::path(path).extension() == ".json";
    ParseResult pr = is_json ? parse_etherscan_json(in, path) : parse_etherscan_csv(in, path);
    txs.insert(txs.end(), std::make_move_iterator(pr.transactions.begin()),
               std::make_move_iterator(pr.transactions.end()));
    parse_rejects.insert(parse_rejects.end(), pr.rejects.begin(), pr.rejects.end());
  }
  std::set<Address> listed, verified;
  {
    std::istringstream in(read_file(a.phishing_list));
    listed = read_address_list(in, a.phishing_list);
  }
  if (!a.verified.empty()) {
    std::istringstream in(read_file(a.verified));
    verified = read_address_list(in, a.verified);
  }
  const PhishingList list = make_phishing_list(std::move(listed), std::move(verified));
  CleanResult cleaned = clean(std::move(txs));
  std::vector<std::string> warnings;
  const LabeledDataset ds = label_dataset(std::move(cleaned.transactions), list, a.require_verified, &warnings);

  const fs::path dataset_path = a.out.dataset();
  const fs::path report_path = sibling(dataset_path, ".clean.json");
  ensure_parent(dataset_path);
  Manifest m("ingest", a.out.manifest());
  m.config({{"tx", a.tx},
            {"phishing_list", a.phishing_list},
            {"verified", a.verified},
            {"require_verified", a.require_verified}});
  for (const auto& p : a.tx) m.input(p);
  m.input(a.phishing_list);
  if (!a.verified.empty()) m.input(a.verified);
  m.artifact(dataset_path);
  m.artifact(report_path);
  m.write();

  write_file(dataset_path, dataset_bytes(ds));
  json rep = {{"kept", cleaned.report.kept},
              {"dup_dropped", cleaned.report.dup_dropped},
              {"invalid_dropped", cleaned.report.invalid_dropped},
              {"parse_rejected", parse_rejects.size()},
              {"rejects", json::array()},
              {"warnings", warnings}};
  for (const auto& r : parse_rejects) rep["rejects"].push_back(reject_json(r));
  for (const auto& r : cleaned.report.rejects) rep["rejects"].push_back(reject_json(r));
  write_file(report_path, dump_json(rep));

  for (const auto& w : warnings) err << "warning: " << w << '\n';
  std::size_t phishing = 0;
  for (const auto& [addr, lab] : ds.labels()) phishing += lab.label == Label::Phishing;
  out << "ingested " << ds.transactions().size() << " transactions, " << ds.labels().size() << " addresses ("
      << phishing << " phishing); dropped " << cleaned.report.dup_dropped << " duplicate, "
      << cleaned.report.invalid_dropped + parse_rejects.size() << " invalid\n";
  return 0;
}

// ----------------------------------------------------------------- synth

struct SynthArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> benign;
  std::optional<std::size_t> phishing;
  std::optional<double> signal;
  DatasetOut out;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  a.out.check();
  SyntheticConfig cfg;
  if (!a.config.empty()) {
    json j = cfg;
    j.merge_patch(load_json_file(a.config));
    try {
      j.get_to(cfg);
    } catch (const json::exception& e) {
      throw Error(Errc::InvalidConfig, a.config + ": " + e.what());
    }
  }
  if (a.seed) cfg.seed = *a.seed;
  if (a.benign) cfg.n_benign_addresses = *a.benign;
  if (a.phishing) cfg.n_phishing_addresses = *a.phishing;
  if (a.signal) cfg.signal_strength = *a.signal;
  validate(cfg);
  const LabeledDataset ds = generate_synthetic(cfg);

  const fs::path dataset_path = a.out.dataset();
  ensure_parent(dataset_path);
  Manifest m("synth", a.out.manifest());
  m.config(cfg);
  if (!a.config.empty()) m.input(a.config);
  m.seed("synthetic", cfg.seed);
  m.artifact(dataset_path);
  m.write();
  write_file(dataset_path, dataset_bytes(ds));
  out << "generated " << ds.transactions().size() << " transactions over " << ds.labels().size()
      << " addresses\n";
  return 0;
}

// ------------------------------------------------------------------- run

struct RunArgs {
  std::string dataset;
  std::string config;
  std::string out_dir;
  std::string features;
  std::optional<std::uint64_t> split_seed;
  std::optional<std::uint64_t> train_seed;
  std::optional<double> split_ratio;
  std::optional<std::size_t> epochs;
  std::optional<double> lr;
  std::optional<double> dropout;
  std::vector<std::size_t> hidden;
  std::string weight_mode;
  std::vector<double> manual_weights;
  std::string optimizer;
  std::optional<double> threshold;
  bool bias = false;
  bool fit_all = false;
  bool no_symmetrize = false;
  bool no_self_loops = false;
  bool stats = false;
  bool importance = false;
  std::optional<std::size_t> trees;

  void add(CLI::App* app, bool with_features) {
    app->add_option("--dataset", dataset, "Dataset file")->required();
    app->add_option("--config", config, "JSON run configuration");
    app->add_option("--out-dir", out_dir, "Output directory")->required();
    if (with_features) app->add_option("--features", features, "explicit|implicit|both");
    app->add_option("--split-seed", split_seed, "Seed for the stratified split");
    app->add_option("--train-seed", train_seed, "Seed for initialization and dropout");
    app->add_option("--split-ratio", split_ratio, "Training fraction per class");
    app->add_option("--epochs", epochs);
    app->add_option("--lr", lr, "Learning rate");
    app->add_option("--dropout", dropout);
    app->add_option("--hidden", hidden, "Hidden layer widths, comma separated")->delimiter(',');
    app->add_option("--weight-mode", weight_mode, "uniform|inverse_frequency|manual");
    app->add_option("--manual-weights", manual_weights, "benign,phishing")->delimiter(',')->expected(2);
    app->add_option("--optimizer", optimizer, "adam|gd");
    app->add_option("--threshold", threshold, "Phishing probability threshold");
    app->add_flag("--bias", bias, "Add a bias term per layer");
    app->add_flag("--fit-all", fit_all, "Fit min-max scaling on all nodes instead of training nodes");
    app->add_flag("--no-symmetrize", no_symmetrize);
    app->add_flag("--no-self-loops", no_self_loops);
    app->add_flag("--stats", stats, "Include per-class feature statistics");
    app->add_flag("--importance", importance, "Include random forest feature importance");
    app->add_option("--trees", trees, "Forest size for --importance");
  }

  RunOptions resolve() const {
    RunOptions opt;
    if (!config.empty()) merge_run_options(load_json_file(config), opt);
    if (!features.empty()) opt.features = parse_feature_choice(features);
    if (split_seed) opt.split_seed = *split_seed;
    if (train_seed) opt.gcn.seed = *train_seed;
    if (split_ratio) opt.split_ratio = *split_ratio;
    if (epochs) opt.gcn.epochs = *epochs;
    if (lr) opt.gcn.learning_rate = *lr;
    if (dropout) opt.gcn.dropout_rate = *dropout;
    if (!hidden.empty()) opt.gcn.hidden_dims = hidden;
    if (!weight_mode.empty()) {
      static const std::map<std::string, WeightMode> modes{{"uniform", WeightMode::Uniform},
                                                           {"inverse_frequency", WeightMode::InverseFrequency},
                                                           {"manual", WeightMode::Manual}};
      auto it = modes.find(weight_mode);
      if (it == modes.end()) throw UsageError("unknown --weight-mode '" + weight_mode + "'");
      opt.gcn.weight_mode = it->second;
    }
    if (manual_weights.size() == 2) opt.gcn.manual_weights = {manual_weights[0], manual_weights[1]};
    if (!optimizer.empty()) {
      if (optimizer == "adam") opt.gcn.optimizer = OptimizerKind::Adam;
      else if (optimizer == "gd") opt.gcn.optimizer = OptimizerKind::GradientDescent;
      else throw UsageError("unknown --optimizer '" + optimizer + "'");
    }
    if (threshold) opt.gcn.threshold = *threshold;
    if (bias) opt.gcn.use_bias = true;
    if (fit_all) opt.fit_all = true;
    if (no_symmetrize) opt.adjacency.symmetrize = false;
    if (no_self_loops) opt.adjacency.add_self_loops = false;
    if (stats) opt.with_stats = true;
    if (importance) opt.with_importance = true;
    if (trees) opt.forest.n_trees = *trees;
    validate(opt.gcn);
    return opt;
  }
};

void write_run_artifacts(const ExperimentResult& r, const RunOptions& opt, const fs::path& dir) {
  std::ostringstream model;
  write_model(model, r.trained.model);
  write_file(dir / "model.bin", model.str());
  ModelSidecar side{opt.gcn, r.features.names, to_string(opt.features), r.features.scaler, opt.adjacency};
  write_file(dir / "model.json", dump_json(to_json(side)));
  emit_report(r.bundle, dir);
  write_file(dir / "timing.json", dump_json({{"wall_time_s", r.trained.report.wall_time_s}}));
}

std::vector<std::string> run_artifact_names() {
  return {"model.bin", "model.json", "metrics.json", "report.txt", "timing.json"};
}

ExperimentResult run_into(const std::string& subcommand, const fs::path& dataset_path, const RunOptions& opt,
                          const fs::path& dir, const std::string& config_path) {
  const LabeledDataset ds = load_dataset(dataset_path);
  ensure_dir(dir);
  Manifest m(subcommand, dir / "manifest.json");
  m.config(to_json(opt));
  m.input(dataset_path);
  if (!config_path.empty()) m.input(config_path);
  m.seed("split", opt.split_seed);
  m.seed("train", opt.gcn.seed);
  for (const auto& n : run_artifact_names()) m.artifact(dir / n);
  m.write();
  ExperimentResult r = run_experiment(ds, opt);
  write_run_artifacts(r, opt, dir);
  return r;
}

int cmd_run(const RunArgs& a, std::ostream& out) {
  const RunOptions opt = a.resolve();
  const ExperimentResult r = run_into("run", a.dataset, opt, a.out_dir, a.config);
  out << format_report_table(r.bundle);
  return 0;
}

// --------------------------------------------------------------- compare

json headline(const MetricsReport& m) {
  return {{"phishing_precision", m.phishing.precision},
          {"phishing_recall", m.phishing.recall},
          {"phishing_f1", m.phishing.f1},
          {"weighted_f1", m.weighted.f1},
          {"accuracy", m.accuracy}};
}

int cmd_compare(const RunArgs& a, std::ostream& out) {
  RunOptions opt = a.resolve();
  const fs::path dir = a.out_dir;
  ensure_dir(dir);
  Manifest m("compare", dir / "manifest.json");
  m.config(to_json(opt));
  m.input(a.dataset);
  if (!a.config.empty()) m.input(a.config);
  m.seed("split", opt.split_seed);
  m.seed("train", opt.gcn.seed);
  m.artifact(dir / "comparison.json");
  m.artifact(dir / "explicit");
  m.artifact(dir / "implicit");
  m.write();

  opt.features = FeatureChoice::Explicit;
  const ExperimentResult ex = run_into("run", a.dataset, opt, dir / "explicit", a.config);
  opt.features = FeatureChoice::Implicit;
  const ExperimentResult im = run_into("run", a.dataset, opt, dir / "implicit", a.config);

  const json je = headline(*ex.bundle.metrics), ji = headline(*im.bundle.metrics);
  json delta;
  for (const auto& [k, v] : ji.items()) delta[k] = v.get<double>() - je.at(k).get<double>();
  write_file(dir / "comparison.json", dump_json({{"explicit", je}, {"implicit", ji}, {"delta", delta}}));

  out << std::left << std::setw(20) << "" << std::right << std::setw(12) << "explicit" << std::setw(12)
      << "implicit" << std::setw(12) << "delta" << '\n';
  out << std::fixed << std::setprecision(4);
  for (const auto& [k, v] : ji.items())
    out << std::left << std::setw(20) << k << std::right << std::setw(12) << je.at(k).get<double>()
        << std::setw(12) << v.get<double>() << std::setw(12) << delta.at(k).get<double>() << '\n';
  return 0;
}

// ------------------------------------------------------------ importance

struct ImportanceArgs {
  std::string dataset;
  std::string out;
  std::string features = "implicit";
  ForestConfig forest;
  std::string config;
};

int cmd_importance(ImportanceArgs a, std::ostream& out) {
  if (!a.config.empty()) {
    ForestConfig defaults;
    json j = defaults;
    j.merge_patch(load_json_file(a.config));
    ForestConfig from_file;
    try {
      j.get_to(from_file);
    } catch (const json::exception& e) {
      throw Error(Errc::InvalidConfig, a.config + ": " + e.what());
    }
    // Flags left at their defaults defer to the file.
    if (a.forest.n_trees == defaults.n_trees) a.forest.n_trees = from_file.n_trees;
    if (a.forest.max_depth == defaults.max_depth) a.forest.max_depth = from_file.max_depth;
    if (a.forest.feature_subsample == defaults.feature_subsample)
      a.forest.feature_subsample = from_file.feature_subsample;
    if (a.forest.min_leaf == defaults.min_leaf) a.forest.min_leaf = from_file.min_leaf;
    if (a.forest.seed == defaults.seed) a.forest.seed = from_file.seed;
    if (!a.forest.class_weighting) a.forest.class_weighting = from_file.class_weighting;
  }
  const FeatureChoice choice = parse_feature_choice(a.features);
  const LabeledDataset ds = load_dataset(a.dataset);
  if (ds.transactions().empty()) throw Error(Errc::InvalidDataset, "dataset has no transactions");

  const fs::path out_path = a.out;
  ensure_parent(out_path);
  Manifest m("importance", sibling(out_path, ".manifest.json"));
  m.config({{"features", a.features}, {"forest", a.forest}});
  m.input(a.dataset);
  if (!a.config.empty()) m.input(a.config);
  m.seed("forest", a.forest.seed);
  m.artifact(out_path);
  m.write();

  const TxGraph g = build_graph(ds);
  const FeatureMatrix x = build_features(choice, ds, g);
  std::vector<FeatureScore> scores;
  try {
    scores = feature_importance(train_forest(x, node_labels(g, ds), a.forest));
  } catch (const Error& e) {
    if (e.code() == Errc::SingleClass) throw TrainingFailure(e.code(), e.what());
    throw;
  }
  write_file(out_path, dump_json({{"feature_set", a.features}, {"forest", a.forest}, {"importance", scores}}));
  const std::size_t top = std::min<std::size_t>(scores.size(), 10);
  for (std::size_t i = 0; i < top; ++i)
    out << std::setw(3) << scores[i].rank << "  " << std::left << std::setw(28) << scores[i].feature << std::right
        << std::fixed << std::setprecision(6) << scores[i].score << '\n';
  return 0;
}

// ----------------------------------------------------------------- stats

int cmd_stats(const std::string& dataset, const std::string& out_file, const std::string& features,
              std::ostream& out) {
  const FeatureChoice choice = parse_feature_choice(features);
  const LabeledDataset ds = load_dataset(dataset);
  if (ds.transactions().empty()) throw Error(Errc::InvalidDataset, "dataset has no transactions");
  const fs::path out_path = out_file;
  ensure_parent(out_path);
  Manifest m("stats", sibling(out_path, ".manifest.json"));
  m.config({{"features", features}});
  m.input(dataset);
  m.artifact(out_path);
  m.write();

  const TxGraph g = build_graph(ds);
  const ClassFeatureStats stats = class_feature_stats(build_features(choice, ds, g), node_labels(g, ds));
  std::ostringstream csv;
  write_stats_csv(csv, stats);
  write_file(out_path, csv.str());
  out << "wrote " << stats.size() << " feature rows to " << out_path.string() << '\n';
  return 0;
}

// --------------------------------------------------------------- predict

int cmd_predict(const std::string& model_dir, const std::string& dataset, const std::string& out_file,
                std::ostream& out) {
  const fs::path dir = model_dir;
  const ModelSidecar side = sidecar_from_json(load_json_file(dir / "model.json"));
  GcnModel model;
  {
    std::istringstream in(read_file(dir / "model.bin"));
    model = read_model(in);
  }
  const LabeledDataset ds = load_dataset(dataset);
  if (ds.transactions().empty()) throw Error(Errc::InvalidDataset, "dataset has no transactions");

  const fs::path out_path = out_file;
  ensure_parent(out_path);
  Manifest m("predict", sibling(out_path, ".manifest.json"));
  m.config({{"model_dir", model_dir}});
  m.input(dir / "model.bin");
  m.input(dir / "model.json");
  m.input(dataset);
  m.artifact(out_path);
  m.write();

  const TxGraph g = build_graph(ds);
  FeatureMatrix x = build_features(parse_feature_choice(side.feature_set), ds, g);
  check_feature_layout(side, x.names);
  if (side.scaler) x = apply_minmax(x, *side.scaler);
  const SparseMatrix adj = normalized_adjacency(g, side.adjacency);
  const std::vector<Prediction> pred = predict(model, adj, x.rows, side.config.threshold);
  json rows = json::array();
  std::size_t flagged = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    flagged += pred[i].label == Label::Phishing;
    rows.push_back({{"address", g.nodes[i].str()},
                    {"predicted", to_string(pred[i].label)},
                    {"phishing_probability", pred[i].phishing_probability}});
  }
  write_file(out_path, dump_json({{"predictions", rows}}));
  out << flagged << " of " << pred.size() << " addresses predicted phishing\n";
  return 0;
}

// -------------------------------------------------------- features/graph

int cmd_features(const std::string& dataset, const std::string& out_file, const std::string& features,
                 std::ostream& out) {
  const FeatureChoice choice = parse_feature_choice(features);
  const LabeledDataset ds = load_dataset(dataset);
  const fs::path out_path = out_file;
  ensure_parent(out_path);
  Manifest m("features", sibling(out_path, ".manifest.json"));
  m.config({{"features", features}});
  m.input(dataset);
  m.artifact(out_path);
  m.write();

  const TxGraph g = build_graph(ds);
  const FeatureMatrix x = build_features(choice, ds, g);
  std::ostringstream os;
  if (out_path.extension() == ".csv") write_features_csv(os, x, g.nodes);
  else write_features_binary(os, x);
  write_file(out_path, os.str());
  out << x.rows.rows << " x " << x.rows.cols << " feature matrix written\n";
  return 0;
}

int cmd_graph(const std::string& dataset, const std::string& out_file, std::ostream& out) {
  const LabeledDataset ds = load_dataset(dataset);
  const fs::path out_path = out_file;
  ensure_parent(out_path);
  Manifest m("graph", sibling(out_path, ".manifest.json"));
  m.config(json::object());
  m.input(dataset);
  m.artifact(out_path);
  m.write();

  const TxGraph g = build_graph(ds);
  std::ostringstream os;
  write_edge_list(os, g);
  write_file(out_path, os.str());
  const SparseMatrix adj = normalized_adjacency(g);
  out << g.nodes.size() << " nodes, " << g.edges.size() << " edges, spectral radius "
      << format_double(spectral_radius_estimate(adj)) << '\n';
  return 0;
}

// ----------------------------------------------------------------- fetch

#ifdef PHISHGRAPH_WITH_FETCH
int cmd_fetch(const std::string& address, const std::string& out_file, const std::string& endpoint,
              std::size_t pages, std::ostream& out) {
  const char* key = std::getenv("ETHERSCAN_API_KEY");
  if (!key || !*key) throw UsageError("ETHERSCAN_API_KEY is not set");
  const Address addr = Address::parse(address);
  FetchOptions fo;
  fo.api_key = key;
  if (!endpoint.empty()) fo.endpoint_url = endpoint;
  fo.page_limit = pages;
  EtherscanClient client(fo);
  const std::vector<Transaction> txs = client.fetch_address_history(addr);

  std::ostringstream csv;
  csv << "blockNumber,timeStamp,hash,from,to,value,gas,gasPrice,gasUsed\n";
  for (const Transaction& t : txs)
    csv << t.block_number << ',' << t.timestamp << ',' << t.tx_hash << ',' << t.sender.str() << ','
        << t.receiver.str() << ',' << to_decimal(t.value) << ',' << t.gas << ',' << t.gas_price << ','
        << t.gas_used << '\n';
  const fs::path out_path = out_file;
  ensure_parent(out_path);
  write_file(out_path, csv.str());
  out << "fetched " << txs.size() << " transactions in " << client.requests_made() << " requests ("
      << client.last_rejects() << " rejected)\n";
  return 0;
}
#endif

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Phishing address detection on Ethereum transaction graphs"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Parse, clean and label transaction exports");
  c_ingest->add_option("--tx", ingest.tx, "Etherscan CSV or JSON export")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--phishing-list", ingest.phishing_list, "Listed phishing addresses")->required();
  c_ingest->add_option("--verified", ingest.verified, "Verified phishing addresses");
  c_ingest->add_flag("--require-verified", ingest.require_verified, "Only verified addresses count as phishing");
  ingest.out.add(c_ingest);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a labeled synthetic dataset");
  c_synth->add_option("--config", synth.config, "JSON generator configuration");
  c_synth->add_option("--seed", synth.seed);
  c_synth->add_option("--benign", synth.benign, "Benign address count");
  c_synth->add_option("--phishing", synth.phishing, "Phishing address count");
  c_synth->add_option("--signal", synth.signal, "Fraction of phishing addresses with burst timing");
  synth.out.add(c_synth);

  RunArgs run;
  auto* c_run = app.add_subcommand("run", "Train and evaluate the GCN on one feature set");
  run.add(c_run, true);

  RunArgs compare;
  auto* c_compare = app.add_subcommand("compare", "Run explicit and implicit experiments and diff them");
  compare.add(c_compare, false);

  ImportanceArgs imp;
  auto* c_imp = app.add_subcommand("importance", "Random forest feature importance");
  c_imp->add_option("--dataset", imp.dataset)->required();
  c_imp->add_option("--out", imp.out, "Importance JSON")->required();
  c_imp->add_option("--features", imp.features, "explicit|implicit|both");
  c_imp->add_option("--config", imp.config, "JSON forest configuration");
  c_imp->add_option("--trees", imp.forest.n_trees);
  c_imp->add_option("--max-depth", imp.forest.max_depth);
  c_imp->add_option("--mtry", imp.forest.feature_subsample, "Features tried per split (0 = ceil sqrt d)");
  c_imp->add_option("--min-leaf", imp.forest.min_leaf);
  c_imp->add_option("--seed", imp.forest.seed);
  c_imp->add_flag("--class-weighting", imp.forest.class_weighting);

  std::string st_dataset, st_out, st_features = "implicit";
  auto* c_stats = app.add_subcommand("stats", "Per-class feature statistics as CSV");
  c_stats->add_option("--dataset", st_dataset)->required();
  c_stats->add_option("--out", st_out)->required();
  c_stats->add_option("--features", st_features, "explicit|implicit|both");

  std::string pr_model, pr_dataset, pr_out;
  auto* c_pred = app.add_subcommand("predict", "Apply a trained model to a dataset");
  c_pred->add_option("--model-dir", pr_model, "Directory holding model.bin and model.json")->required();
  c_pred->add_option("--dataset", pr_dataset)->required();
  c_pred->add_option("--out", pr_out)->required();

  std::string fe_dataset, fe_out, fe_features = "implicit";
  auto* c_feat = app.add_subcommand("features", "Export the node feature matrix (.csv or binary)");
  c_feat->add_option("--dataset", fe_dataset)->required();
  c_feat->add_option("--out", fe_out)->required();
  c_feat->add_option("--features", fe_features, "explicit|implicit|both");

  std::string gr_dataset, gr_out;
  auto* c_graph = app.add_subcommand("graph", "Export the transaction graph edge list");
  c_graph->add_option("--dataset", gr_dataset)->required();
  c_graph->add_option("--out", gr_out)->required();

#ifdef PHISHGRAPH_WITH_FETCH
  std::string fx_address, fx_out, fx_endpoint;
  std::size_t fx_pages = 10;
  auto* c_fetch = app.add_subcommand("fetch", "Download an address history (key from ETHERSCAN_API_KEY)");
  c_fetch->add_option("--address", fx_address)->required();
  c_fetch->add_option("--out", fx_out, "CSV file")->required();
  c_fetch->add_option("--endpoint", fx_endpoint);
  c_fetch->add_option("--pages", fx_pages, "Page limit");
#endif

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*c_ingest) return cmd_ingest(ingest, out, err);
    if (*c_synth) return cmd_synth(synth, out);
    if (*c_run) return cmd_run(run, out);
    if (*c_compare) return cmd_compare(compare, out);
    if (*c_imp) return cmd_importance(imp, out);
    if (*c_stats) return cmd_stats(st_dataset, st_out, st_features, out);
    if (*c_pred) return cmd_predict(pr_model, pr_dataset, pr_out, out);
    if (*c_feat) return cmd_features(fe_dataset, fe_out, fe_features, out);
    if (*c_graph) return cmd_graph(gr_dataset, gr_out, out);
#ifdef PHISHGRAPH_WITH_FETCH
    if (*c_fetch) return cmd_fetch(fx_address, fx_out, fx_endpoint, fx_pages, out);
#endif
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return 1;
  }
  return 2;
}

}  // namespace phishgraph
