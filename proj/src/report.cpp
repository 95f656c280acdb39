#include "phishgraph/report.hpp"

#include <cstdio>
#include <sstream>

#include "phishgraph/error.hpp"
#include "phishgraph/storage.hpp"

namespace phishgraph {

using nlohmann::json;

namespace {

template <typename T>
void get_if_present(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

WeightMode weight_mode_from(const std::string& s) {
  if (s == "uniform") return WeightMode::Uniform;
  if (s == "inverse_frequency") return WeightMode::InverseFrequency;
  if (s == "manual") return WeightMode::Manual;
  throw Error(Errc::InvalidConfig, "unknown weight_mode '" + s + "'");
}

OptimizerKind optimizer_from(const std::string& s) {
  if (s == "adam") return OptimizerKind::Adam;
  if (s == "gd") return OptimizerKind::GradientDescent;
  throw Error(Errc::InvalidConfig, "unknown optimizer '" + s + "'");
}

Label label_from(const std::string& s) {
  if (s == "phishing") return Label::Phishing;
  if (s == "benign") return Label::Benign;
  throw Error(Errc::FormatError, "unknown label '" + s + "'");
}

json summary_to_json(const SummaryStat& s) {
  if (s.absent) return json{{"absent", true}, {"support", 0}};
  return json{{"mean", s.mean}, {"max", s.max}, {"std", s.std}, {"support", s.support}};
}

SummaryStat summary_from_json(const json& j) {
  SummaryStat s;
  s.absent = j.value("absent", false);
  s.support = j.at("support").get<std::uint64_t>();
  if (!s.absent) {
    s.mean = j.at("mean").get<double>();
    s.max = j.at("max").get<double>();
    s.std = j.at("std").get<double>();
  }
  return s;
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

void to_json(json& j, const GcnConfig& c) {
  j = json{{"hidden_dims", c.hidden_dims},
           {"dropout_rate", c.dropout_rate},
           {"learning_rate", c.learning_rate},
           {"epochs", c.epochs},
           {"weight_mode", to_string(c.weight_mode)},
           {"manual_weights", c.manual_weights},
           {"seed", c.seed},
           {"optimizer", to_string(c.optimizer)},
           {"adam_beta1", c.adam_beta1},
           {"adam_beta2", c.adam_beta2},
           {"adam_epsilon", c.adam_epsilon},
           {"threshold", c.threshold},
           {"use_bias", c.use_bias}};
}

void from_json(const json& j, GcnConfig& c) {
  get_if_present(j, "hidden_dims", c.hidden_dims);
  get_if_present(j, "dropout_rate", c.dropout_rate);
  get_if_present(j, "learning_rate", c.learning_rate);
  get_if_present(j, "epochs", c.epochs);
  if (j.contains("weight_mode")) c.weight_mode = weight_mode_from(j.at("weight_mode").get<std::string>());
  get_if_present(j, "manual_weights", c.manual_weights);
  get_if_present(j, "seed", c.seed);
  if (j.contains("optimizer")) c.optimizer = optimizer_from(j.at("optimizer").get<std::string>());
  get_if_present(j, "adam_beta1", c.adam_beta1);
  get_if_present(j, "adam_beta2", c.adam_beta2);
  get_if_present(j, "adam_epsilon", c.adam_epsilon);
  get_if_present(j, "threshold", c.threshold);
  get_if_present(j, "use_bias", c.use_bias);
}

void to_json(json& j, const SyntheticConfig& c) {
  j = json{{"n_benign_addresses", c.n_benign_addresses},
           {"n_phishing_addresses", c.n_phishing_addresses},
           {"tx_per_address_range", {c.tx_per_address_min, c.tx_per_address_max}},
           {"phishing_tx_multiplier", c.phishing_tx_multiplier},
           {"phishing_burst_hour_range", {c.phishing_burst_hour_lo, c.phishing_burst_hour_hi}},
           {"phishing_dormancy_days", c.phishing_dormancy_days},
           {"phishing_fanout", c.phishing_fanout},
           {"phishing_sink_collusion", c.phishing_sink_collusion},
           {"benign_active_days_range", {c.benign_active_days_min, c.benign_active_days_max}},
           {"observation_days", c.observation_days},
           {"start_timestamp", c.start_timestamp},
           {"benign_value", {{"log10_mean", c.benign_value.log10_mean}, {"log10_sd", c.benign_value.log10_sd}}},
           {"phishing_value",
            {{"log10_mean", c.phishing_value.log10_mean}, {"log10_sd", c.phishing_value.log10_sd}}},
           {"signal_strength", c.signal_strength},
           {"victim_rate", c.victim_rate},
           {"seed", c.seed}};
}

void from_json(const json& j, SyntheticConfig& c) {
  get_if_present(j, "n_benign_addresses", c.n_benign_addresses);
  get_if_present(j, "n_phishing_addresses", c.n_phishing_addresses);
  if (j.contains("tx_per_address_range")) {
    const auto& r = j.at("tx_per_address_range");
    c.tx_per_address_min = r.at(0).get<std::uint64_t>();
    c.tx_per_address_max = r.at(1).get<std::uint64_t>();
  }
  get_if_present(j, "phishing_tx_multiplier", c.phishing_tx_multiplier);
  if (j.contains("phishing_burst_hour_range")) {
    const auto& r = j.at("phishing_burst_hour_range");
    c.phishing_burst_hour_lo = r.at(0).get<int>();
    c.phishing_burst_hour_hi = r.at(1).get<int>();
  }
  get_if_present(j, "phishing_dormancy_days", c.phishing_dormancy_days);
  get_if_present(j, "phishing_fanout", c.phishing_fanout);
  get_if_present(j, "phishing_sink_collusion", c.phishing_sink_collusion);
  if (j.contains("benign_active_days_range")) {
    const auto& r = j.at("benign_active_days_range");
    c.benign_active_days_min = r.at(0).get<std::uint64_t>();
    c.benign_active_days_max = r.at(1).get<std::uint64_t>();
  }
  get_if_present(j, "observation_days", c.observation_days);
  get_if_present(j, "start_timestamp", c.start_timestamp);
  for (auto [key, dist] : {std::pair{"benign_value", &c.benign_value}, std::pair{"phishing_value", &c.phishing_value}}) {
    if (!j.contains(key)) continue;
    get_if_present(j.at(key), "log10_mean", dist->log10_mean);
    get_if_present(j.at(key), "log10_sd", dist->log10_sd);
  }
  get_if_present(j, "signal_strength", c.signal_strength);
  get_if_present(j, "victim_rate", c.victim_rate);
  get_if_present(j, "seed", c.seed);
}

void to_json(json& j, const ForestConfig& c) {
  j = json{{"n_trees", c.n_trees},       {"max_depth", c.max_depth}, {"feature_subsample", c.feature_subsample},
           {"min_leaf", c.min_leaf},     {"seed", c.seed},           {"class_weighting", c.class_weighting}};
}

void from_json(const json& j, ForestConfig& c) {
  get_if_present(j, "n_trees", c.n_trees);
  get_if_present(j, "max_depth", c.max_depth);
  get_if_present(j, "feature_subsample", c.feature_subsample);
  get_if_present(j, "min_leaf", c.min_leaf);
  get_if_present(j, "seed", c.seed);
  get_if_present(j, "class_weighting", c.class_weighting);
}

void to_json(json& j, const ClassMetrics& m) {
  j = json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
}

void from_json(const json& j, ClassMetrics& m) {
  j.at("precision").get_to(m.precision);
  j.at("recall").get_to(m.recall);
  j.at("f1").get_to(m.f1);
  j.at("support").get_to(m.support);
}

void to_json(json& j, const ConfusionMatrix& m) {
  j = json{{"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn}};
}

void from_json(const json& j, ConfusionMatrix& m) {
  j.at("tp").get_to(m.tp);
  j.at("fp").get_to(m.fp);
  j.at("fn").get_to(m.fn);
  j.at("tn").get_to(m.tn);
}

void to_json(json& j, const MetricsReport& m) {
  j = json{{"accuracy", m.accuracy}, {"benign", m.benign},       {"phishing", m.phishing},
           {"weighted_avg", m.weighted}, {"confusion", m.confusion}};
}

void from_json(const json& j, MetricsReport& m) {
  j.at("accuracy").get_to(m.accuracy);
  j.at("benign").get_to(m.benign);
  j.at("phishing").get_to(m.phishing);
  j.at("weighted_avg").get_to(m.weighted);
  j.at("confusion").get_to(m.confusion);
}

void to_json(json& j, const TrainReport& r) {
  j = json{{"epochs", r.epoch_loss.size()},
           {"loss", r.epoch_loss},
           {"loss_mean", r.epoch_loss_mean},
           {"train_accuracy", r.epoch_train_accuracy},
           {"train_weighted_f1", r.epoch_train_weighted_f1},
           {"class_weights", {{"benign", r.class_weights[0]}, {"phishing", r.class_weights[1]}}},
           {"seed", r.seed},
           {"config", r.config}};
  if (r.test_metrics) j["test_metrics"] = *r.test_metrics;
}

void from_json(const json& j, TrainReport& r) {
  j.at("loss").get_to(r.epoch_loss);
  j.at("loss_mean").get_to(r.epoch_loss_mean);
  j.at("train_accuracy").get_to(r.epoch_train_accuracy);
  j.at("train_weighted_f1").get_to(r.epoch_train_weighted_f1);
  r.class_weights = {j.at("class_weights").at("benign").get<double>(),
                     j.at("class_weights").at("phishing").get<double>()};
  j.at("seed").get_to(r.seed);
  j.at("config").get_to(r.config);
  if (j.contains("test_metrics")) r.test_metrics = j.at("test_metrics").get<MetricsReport>();
  r.wall_time_s = 0.0;
}

void to_json(json& j, const FeatureClassStats& s) {
  j = json{{"feature", s.feature}, {"phishing", summary_to_json(s.phishing)}, {"benign", summary_to_json(s.benign)}};
}

void from_json(const json& j, FeatureClassStats& s) {
  j.at("feature").get_to(s.feature);
  s.phishing = summary_from_json(j.at("phishing"));
  s.benign = summary_from_json(j.at("benign"));
}

void to_json(json& j, const FeatureScore& s) {
  j = json{{"feature", s.feature}, {"score", s.score}, {"rank", s.rank}};
}

void from_json(const json& j, FeatureScore& s) {
  j.at("feature").get_to(s.feature);
  j.at("score").get_to(s.score);
  j.at("rank").get_to(s.rank);
}

bool ReportBundle::operator==(const ReportBundle& o) const {
  auto strip = [](std::optional<TrainReport> t) {
    if (t) t->wall_time_s = 0.0;
    return t;
  };
  return metrics == o.metrics && strip(train) == strip(o.train) && stats == o.stats &&
         importance == o.importance && predictions == o.predictions && feature_set == o.feature_set;
}

json report_to_json(const ReportBundle& b) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  if (!b.feature_set.empty()) j["feature_set"] = b.feature_set;
  if (b.metrics) j["metrics"] = *b.metrics;
  if (b.train) j["train"] = *b.train;
  if (b.stats) j["stats"] = *b.stats;
  if (b.importance) j["importance"] = *b.importance;
  if (b.predictions) {
    json arr = json::array();
    for (const auto& p : *b.predictions)
      arr.push_back({{"address", p.address},
                     {"split", p.split},
                     {"truth", to_string(p.truth)},
                     {"predicted", to_string(p.predicted)},
                     {"phishing_probability", p.phishing_probability}});
    j["predictions"] = std::move(arr);
  }
  return j;
}

ReportBundle report_from_json(const json& j) {
  if (j.value("schema_version", 0) != kReportSchemaVersion)
    throw Error(Errc::FormatError, "unsupported report schema version");
  ReportBundle b;
  b.feature_set = j.value("feature_set", std::string());
  if (j.contains("metrics")) b.metrics = j.at("metrics").get<MetricsReport>();
  if (j.contains("train")) b.train = j.at("train").get<TrainReport>();
  if (j.contains("stats")) b.stats = j.at("stats").get<ClassFeatureStats>();
  if (j.contains("importance")) b.importance = j.at("importance").get<std::vector<FeatureScore>>();
  if (j.contains("predictions")) {
    std::vector<NodePrediction> preds;
    for (const auto& p : j.at("predictions"))
      preds.push_back({p.at("address").get<std::string>(), p.at("split").get<std::string>(),
                       label_from(p.at("truth").get<std::string>()),
                       label_from(p.at("predicted").get<std::string>()),
                       p.at("phishing_probability").get<double>()});
    b.predictions = std::move(preds);
  }
  return b;
}

std::string format_report_table(const ReportBundle& b) {
  std::ostringstream out;
  if (!b.feature_set.empty()) out << "Feature set: " << b.feature_set << "\n\n";
  if (b.metrics) {
    const MetricsReport& m = *b.metrics;
    constexpr std::size_t kLabel = 12, kCol = 14;
    out << pad_right("", kLabel) << pad_left("Benign", kCol) << pad_left("Phishing", kCol)
        << pad_left("Weighted Avg", kCol) << '\n';
    auto row = [&](const char* name, double ClassMetrics::*field) {
      out << pad_right(name, kLabel) << pad_left(fixed2(m.benign.*field), kCol)
          << pad_left(fixed2(m.phishing.*field), kCol) << pad_left(fixed2(m.weighted.*field), kCol) << '\n';
    };
    row("Precision", &ClassMetrics::precision);
    row("Recall", &ClassMetrics::recall);
    row("F1-Score", &ClassMetrics::f1);
    out << pad_right("Support", kLabel) << pad_left(std::to_string(m.benign.support), kCol)
        << pad_left(std::to_string(m.phishing.support), kCol) << pad_left(std::to_string(m.weighted.support), kCol)
        << '\n';
    out << "Accuracy: " << fixed2(m.accuracy) << '\n';
  }
  if (b.train && !b.train->epoch_loss.empty()) {
    out << "\nEpochs: " << b.train->epoch_loss.size() << "  final loss (mean): "
        << fixed2(b.train->epoch_loss_mean.back()) << "  class weights: " << fixed2(b.train->class_weights[0])
        << " / " << fixed2(b.train->class_weights[1]) << '\n';
  }
  if (b.importance) {
    out << "\nFeature importance\n";
    for (const auto& s : *b.importance) {
      if (s.rank > 10) break;
      out << pad_left(std::to_string(s.rank), 4) << "  " << pad_right(s.feature, 20) << fixed2(s.score) << '\n';
    }
  }
  if (b.stats) {
    out << "\nClass statistics (mean / max / std)\n";
    for (const auto& fs : *b.stats) {
      out << pad_right(fs.feature, 20);
      for (const SummaryStat* s : {&fs.phishing, &fs.benign}) {
        char buf[96];
        if (s->absent)
          std::snprintf(buf, sizeof buf, "  %-33s", "absent");
        else
          std::snprintf(buf, sizeof buf, "  %10.3g / %10.3g / %10.3g", s->mean, s->max, s->std);
        out << buf;
      }
      out << '\n';
    }
  }
  return out.str();
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

ReportPaths emit_report(const ReportBundle& bundle, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + dir.string() + ": " + ec.message());
  ReportPaths paths{dir / "metrics.json", dir / "report.txt"};
  write_file(paths.json, dump_json(report_to_json(bundle)));
  write_file(paths.text, format_report_table(bundle));
  return paths;
}

}  // namespace phishgraph
