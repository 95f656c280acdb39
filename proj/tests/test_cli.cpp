#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "phishgraph/cli.hpp"
#include "phishgraph/storage.hpp"
#include "support.hpp"

using namespace phishgraph;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "phishgraph");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) { return (fs::path(PHISHGRAPH_FIXTURES) / name).string(); }

std::string small_synth(const fs::path& dir, const std::string& seed = "7") {
  const std::string path = (dir / ("synth_" + seed + ".bin")).string();
  const Outcome o = cli({"synth", "--seed", seed, "--benign", "60", "--phishing", "15", "--out", path});
  REQUIRE(o.code == 0);
  return path;
}

json load(const fs::path& p) { return json::parse(read_file(p)); }

}  // namespace

TEST_CASE("cli: help and usage errors") {
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({"--version"}).code == 0);
  CHECK(cli({}).code == 2);
  CHECK(cli({"nonsense"}).code == 2);
  CHECK(cli({"run", "--dataset", "x"}).code == 2);
}

TEST_CASE("cli: synth is deterministic per seed") {
  const auto dir = testsupport::fresh_dir("cli_synth");
  const std::string a = (dir / "a.bin").string(), b = (dir / "b.bin").string();
  REQUIRE(cli({"synth", "--seed", "7", "--out", a}).code == 0);
  REQUIRE(cli({"synth", "--seed", "7", "--out", b}).code == 0);
  CHECK(sha256_file(a) == sha256_file(b));
  const json ma = load(a + ".manifest.json");
  CHECK(ma.at("subcommand") == "synth");
  CHECK(ma.at("seeds").at("synthetic") == 7);
  CHECK(ma.at("config").at("n_benign_addresses") == 400);
  CHECK(ma.at("artifacts").at(0) == a);

  REQUIRE(cli({"synth", "--seed", "8", "--out", b}).code == 0);
  CHECK(sha256_file(a) != sha256_file(b));

  REQUIRE(cli({"synth", "--phishing", "0", "--benign", "20", "--out-dir", (dir / "benign").string()}).code == 0);
  std::istringstream in(read_file(dir / "benign" / "dataset.bin"));
  const LabeledDataset ds = read_dataset(in);
  for (const auto& [addr, lab] : ds.labels()) CHECK(lab.label == Label::Benign);
  CHECK(fs::exists(dir / "benign" / "manifest.json"));

  write_file(dir / "cfg.json", R"({"observation_days": 0})");
  CHECK(cli({"synth", "--config", (dir / "cfg.json").string(), "--out", a}).code == 2);
  CHECK(cli({"synth", "--seed", "1"}).code == 2);
}

TEST_CASE("cli: ingest fixtures") {
  const auto dir = testsupport::fresh_dir("cli_ingest");
  const std::string out = (dir / "ds.bin").string();
  const std::vector<std::string> args{"ingest",          "--tx", fixture("txlist.csv"), "--tx", fixture("sample.json"),
                                      "--phishing-list", fixture("phishing_list.txt"),  "--out", out};
  const Outcome o = cli(args);
  CAPTURE(o.err);
  REQUIRE(o.code == 0);
  CHECK(o.out.find("ingested") != std::string::npos);
  const json report = load(out + ".clean.json");
  CHECK(report.at("kept").get<int>() >= 1);
  CHECK(report.at("rejects").size() >= 1);
  const json manifest = load(out + ".manifest.json");
  CHECK(manifest.at("inputs").at(fixture("txlist.csv")) == sha256_file(fixture("txlist.csv")));
  const std::string digest = sha256_file(out);
  REQUIRE(cli(args).code == 0);
  CHECK(sha256_file(out) == digest);

  std::istringstream in(read_file(out));
  const LabeledDataset ds = read_dataset(in);
  CHECK(ds.label_of(Address::parse("0xab00000000000000000000000000000000000001")) == Label::Phishing);
  CHECK(ds.label_of(Address::parse("0xcd00000000000000000000000000000000000002")) == Label::Benign);

  CHECK(cli({"ingest", "--tx", fixture("sample.csv"), "--out", out}).code == 2);
  CHECK(cli({"ingest", "--tx", fixture("sample.csv"), "--phishing-list", fixture("bad_list.txt"), "--out", out}).code == 2);
  CHECK(cli({"ingest", "--tx", fixture("sample.csv"), "--phishing-list", fixture("nope.txt"), "--out", out}).code == 1);
  CHECK(cli({"ingest", "--tx", fixture("notok.json"), "--phishing-list", fixture("phishing_list.txt"), "--out", out})
            .code == 1);
}

TEST_CASE("cli: run, rerun and predict") {
  const auto dir = testsupport::fresh_dir("cli_run");
  const std::string ds = small_synth(dir);
  const std::vector<std::string> base{"run", "--dataset", ds, "--epochs", "15", "--train-seed", "4", "--stats"};
  auto with_out = [&](const std::string& sub) {
    auto v = base;
    v.insert(v.end(), {"--out-dir", (dir / sub).string()});
    return v;
  };
  const Outcome a = cli(with_out("a"));
  CAPTURE(a.err);
  REQUIRE(a.code == 0);
  CHECK(a.out.find("Weighted Avg") != std::string::npos);
  REQUIRE(cli(with_out("b")).code == 0);
  for (const char* f : {"model.bin", "model.json", "metrics.json", "report.txt"})
    CHECK(sha256_file(dir / "a" / f) == sha256_file(dir / "b" / f));
  CHECK(fs::exists(dir / "a" / "timing.json"));
  const json ma = load(dir / "a" / "manifest.json"), mb = load(dir / "b" / "manifest.json");
  CHECK(ma.at("config") == mb.at("config"));
  CHECK(ma.at("seeds").at("train") == 4);
  CHECK(ma.at("config").at("gcn").at("epochs") == 15);
  CHECK(ma.at("inputs").at(ds) == sha256_file(ds));
  CHECK(load(dir / "a" / "metrics.json").contains("stats"));

  const std::string pred = (dir / "pred.json").string();
  const Outcome p = cli({"predict", "--model-dir", (dir / "a").string(), "--dataset", ds, "--out", pred});
  CAPTURE(p.err);
  REQUIRE(p.code == 0);
  const json preds = load(pred).at("predictions");
  CHECK(preds.size() == 75);
  // Predictions on the training dataset reproduce the report's probabilities.
  const json reported = load(dir / "a" / "metrics.json").at("predictions");
  REQUIRE(reported.size() == preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    CHECK(preds[i].at("address") == reported[i].at("address"));
    CHECK(preds[i].at("phishing_probability").get<double>() ==
          doctest::Approx(reported[i].at("phishing_probability").get<double>()).epsilon(1e-12));
  }

  json side = load(dir / "a" / "model.json");
  side["feature_names"][0] = "renamed";
  write_file(dir / "a" / "model.json", dump_json(side));
  CHECK(cli({"predict", "--model-dir", (dir / "a").string(), "--dataset", ds, "--out", pred}).code == 2);
}

TEST_CASE("cli: run option errors and exit codes") {
  const auto dir = testsupport::fresh_dir("cli_errors");
  const std::string ds = small_synth(dir);
  const std::string out = (dir / "o").string();
  CHECK(cli({"run", "--dataset", ds, "--out-dir", out, "--features", "bogus"}).code == 2);
  CHECK(cli({"run", "--dataset", ds, "--out-dir", out, "--epochs", "0"}).code == 2);
  CHECK(cli({"run", "--dataset", ds, "--out-dir", out, "--optimizer", "sgd"}).code == 2);
  CHECK(cli({"run", "--dataset", (dir / "missing.bin").string(), "--out-dir", out}).code == 1);

  write_file(dir / "junk.bin", std::string("not a dataset"));
  CHECK(cli({"run", "--dataset", (dir / "junk.bin").string(), "--out-dir", out}).code == 2);

  const std::string benign = (dir / "benign.bin").string();
  REQUIRE(cli({"synth", "--phishing", "0", "--benign", "30", "--out", benign}).code == 0);
  CHECK(cli({"run", "--dataset", benign, "--out-dir", out, "--epochs", "2"}).code == 3);
  CHECK(cli({"importance", "--dataset", benign, "--out", (dir / "imp.json").string()}).code == 3);

  std::ostringstream empty;
  write_dataset(empty, testsupport::dataset_of({}));
  write_file(dir / "empty.bin", empty.str());
  CHECK(cli({"stats", "--dataset", (dir / "empty.bin").string(), "--out", (dir / "s.csv").string()}).code == 2);
}

TEST_CASE("cli: compare writes both runs and the delta") {
  const auto dir = testsupport::fresh_dir("cli_compare");
  const std::string ds = small_synth(dir);
  const Outcome o = cli({"compare", "--dataset", ds, "--epochs", "10", "--out-dir", (dir / "cmp").string()});
  CAPTURE(o.err);
  REQUIRE(o.code == 0);
  const json c = load(dir / "cmp" / "comparison.json");
  for (const char* k : {"phishing_precision", "phishing_recall", "phishing_f1", "weighted_f1", "accuracy"}) {
    CHECK(c.at("delta").at(k).get<double>() ==
          doctest::Approx(c.at("implicit").at(k).get<double>() - c.at("explicit").at(k).get<double>()));
  }
  CHECK(load(dir / "cmp" / "explicit" / "metrics.json").at("feature_set") == "explicit");
  CHECK(load(dir / "cmp" / "implicit" / "metrics.json").at("feature_set") == "implicit");
}

TEST_CASE("cli: stats, importance, features and graph exports") {
  const auto dir = testsupport::fresh_dir("cli_exports");
  const std::string ds = small_synth(dir);

  const std::string stats = (dir / "stats.csv").string();
  REQUIRE(cli({"stats", "--dataset", ds, "--out", stats}).code == 0);
  const std::string csv = read_file(stats);
  CHECK(csv.rfind("feature,class,mean,max,std,support\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 16);

  const std::string imp = (dir / "imp.json").string();
  REQUIRE(cli({"importance", "--dataset", ds, "--out", imp, "--trees", "20", "--seed", "3"}).code == 0);
  const json scores = load(imp).at("importance");
  CHECK(scores.size() == 16);
  double total = 0;
  for (const auto& s : scores) total += s.at("score").get<double>();
  CHECK(total == doctest::Approx(1.0));
  const std::string digest = sha256_file(imp);
  REQUIRE(cli({"importance", "--dataset", ds, "--out", imp, "--trees", "20", "--seed", "3"}).code == 0);
  CHECK(sha256_file(imp) == digest);
  CHECK(fs::exists(imp + ".manifest.json"));

  const std::string fcsv = (dir / "x.csv").string(), fbin = (dir / "x.bin").string();
  REQUIRE(cli({"features", "--dataset", ds, "--out", fcsv, "--features", "both"}).code == 0);
  CHECK(read_file(fcsv).rfind("address,mean_timestamp,", 0) == 0);
  REQUIRE(cli({"features", "--dataset", ds, "--out", fbin}).code == 0);
  std::istringstream in(read_file(fbin));
  CHECK(read_features_binary(in).names == implicit_feature_names());

  const Outcome g = cli({"graph", "--dataset", ds, "--out", (dir / "edges.txt").string()});
  REQUIRE(g.code == 0);
  CHECK(g.out.find("spectral radius") != std::string::npos);
}

#ifdef PHISHGRAPH_WITH_FETCH
TEST_CASE("cli: fetch needs an API key") {
  ::unsetenv("ETHERSCAN_API_KEY");
  CHECK(cli({"fetch", "--address", "0xab00000000000000000000000000000000000001", "--out", "/tmp/x.csv"}).code == 2);
}
#endif
