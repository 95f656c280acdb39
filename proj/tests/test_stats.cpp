#include <doctest.h>

#include <sstream>

#include "phishgraph/graph.hpp"
#include "phishgraph/stats.hpp"
#include "phishgraph/synthetic.hpp"
#include "support.hpp"

using namespace phishgraph;

TEST_CASE("population statistics by hand") {
  FeatureMatrix x;
  x.names = {"f"};
  x.rows = Matrix(2, 1);
  x.rows.data = {1.0, 3.0};
  const ClassFeatureStats s = class_feature_stats(x, {Label::Phishing, Label::Phishing});
  REQUIRE(s.size() == 1);
  CHECK(s[0].phishing.mean == 2.0);
  CHECK(s[0].phishing.max == 3.0);
  CHECK(s[0].phishing.std == 1.0);
  CHECK(s[0].phishing.support == 2);
  CHECK_FALSE(s[0].phishing.absent);
  CHECK(s[0].benign.absent);

  std::ostringstream csv;
  write_stats_csv(csv, s);
  CHECK(csv.str() == "feature,class,mean,max,std,support\nf,phishing,2,3,1,2\nf,benign,absent,absent,absent,0\n");
}

TEST_CASE("stats match brute-force recomputation on the synthetic corpus") {
  const LabeledDataset ds = generate_synthetic(SyntheticConfig{});
  const TxGraph g = build_graph(ds);
  const FeatureMatrix x = extract_implicit(ds, g);
  std::vector<Label> y;
  for (const Address& a : g.nodes) y.push_back(ds.label_of(a));
  const ClassFeatureStats s = class_feature_stats(x, y);
  REQUIRE(s.size() == x.names.size());
  for (std::size_t j = 0; j < x.names.size(); ++j) {
    CHECK(s[j].feature == x.names[j]);
    for (Label c : {Label::Phishing, Label::Benign}) {
      std::vector<double> v;
      for (std::size_t i = 0; i < y.size(); ++i)
        if (y[i] == c) v.push_back(x.rows(i, j));
      long double sum = 0, sq = 0;
      double mx = v.front();
      for (double d : v) {
        sum += d;
        mx = std::max(mx, d);
      }
      const long double mean = sum / v.size();
      for (double d : v) sq += (d - mean) * (d - mean);
      const SummaryStat& st = c == Label::Phishing ? s[j].phishing : s[j].benign;
      CHECK(st.support == v.size());
      CHECK(testsupport::close_rel(st.mean, static_cast<double>(mean), 1e-12));
      CHECK(st.max == mx);
      CHECK(testsupport::close_rel(st.std, static_cast<double>(std::sqrt(sq / v.size())), 1e-9));
    }
  }
  const std::size_t tv = x.column("total_val_sent");
  CHECK(s[tv].phishing.mean > s[tv].benign.mean);
}
