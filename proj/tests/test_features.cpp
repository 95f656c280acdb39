#include <doctest.h>

#include "phishgraph/error.hpp"
#include "phishgraph/features.hpp"
#include "phishgraph/graph.hpp"
#include "phishgraph/synthetic.hpp"
#include "support.hpp"

using namespace phishgraph;
using testsupport::addr;
using testsupport::tx;

namespace {

// 2023-01-07 was a Saturday.
constexpr std::int64_t kSaturdayNoon = 1673092800;

double feature(const FeatureMatrix& x, const TxGraph& g, const Address& a, const std::string& name) {
  return x.rows(g.node_index.at(a), x.column(name));
}

FeatureMatrix column_of(std::vector<double> v) {
  FeatureMatrix x;
  x.names = {"c"};
  x.rows = Matrix(v.size(), 1);
  x.rows.data = std::move(v);
  return x;
}

}  // namespace

TEST_CASE("explicit means") {
  const auto ds = testsupport::dataset_of(
      {tx(1, addr(1), addr(2), 1000, Wei("1000000000000000000"), 21000), tx(2, addr(3), addr(2), 3000, 0, 63000)});
  const TxGraph g = build_graph(ds);
  const FeatureMatrix x = extract_explicit(ds, g);
  CHECK(x.names == explicit_feature_names());
  CHECK(feature(x, g, addr(1), "mean_value") == 1e18);
  CHECK(feature(x, g, addr(2), "mean_gas_used") == 42000.0);
  CHECK(feature(x, g, addr(2), "mean_timestamp") == 2000.0);
}

TEST_CASE("explicit features match brute-force aggregation") {
  const auto ds = testsupport::dataset_of({tx(1, addr(1), addr(2), 100, 10, 21000), tx(2, addr(2), addr(3), 200, 20, 30000),
                                           tx(3, addr(3), addr(1), 400, 40, 50000), tx(4, addr(1), addr(1), 800, 80, 70000)});
  const TxGraph g = build_graph(ds);
  REQUIRE(g.nodes.size() == 3);
  const FeatureMatrix x = extract_explicit(ds, g);
  for (const Address& a : g.nodes) {
    double n = 0, ts = 0, val = 0, gas = 0, price = 0, used = 0;
    for (const auto& t : ds.transactions()) {
      if (t.sender != a && t.receiver != a) continue;
      n += 1;
      ts += static_cast<double>(t.timestamp);
      val += static_cast<double>(t.value.convert_to<std::uint64_t>());
      gas += static_cast<double>(t.gas);
      price += static_cast<double>(t.gas_price);
      used += static_cast<double>(t.gas_used);
    }
    CHECK(feature(x, g, a, "mean_timestamp") == doctest::Approx(ts / n).epsilon(1e-12));
    CHECK(feature(x, g, a, "mean_value") == doctest::Approx(val / n).epsilon(1e-12));
    CHECK(feature(x, g, a, "mean_gas") == doctest::Approx(gas / n).epsilon(1e-12));
    CHECK(feature(x, g, a, "mean_gas_price") == doctest::Approx(price / n).epsilon(1e-12));
    CHECK(feature(x, g, a, "mean_gas_used") == doctest::Approx(used / n).epsilon(1e-12));
  }
}

TEST_CASE("implicit two-point timing case") {
  const std::int64_t t = 1'700'000'000;
  const auto ds = testsupport::dataset_of({tx(1, addr(1), addr(2), t), tx(2, addr(1), addr(3), t + 3600)});
  const TxGraph g = build_graph(ds);
  const FeatureMatrix x = extract_implicit(ds, g);
  CHECK(feature(x, g, addr(1), "avg_time_bw_tx") == 3600.0);
  CHECK(feature(x, g, addr(1), "min_time_bw_tx") == 3600.0);
  CHECK(feature(x, g, addr(1), "max_time_bw_tx") == 3600.0);
  CHECK(feature(x, g, addr(1), "tx_duration") == 3600.0);
  CHECK(feature(x, g, addr(2), "avg_time_bw_tx") == 0.0);
  CHECK(feature(x, g, addr(2), "avg_gas_sent") == 0.0);
}

TEST_CASE("implicit weekend and hour statistics") {
  const auto sat = testsupport::dataset_of({tx(1, addr(1), addr(2), kSaturdayNoon)});
  const TxGraph gs = build_graph(sat);
  const FeatureMatrix xs = extract_implicit(sat, gs);
  CHECK(feature(xs, gs, addr(1), "wd_tx_ratio_sent") == 1.0);
  CHECK(feature(xs, gs, addr(2), "wd_tx_ratio_recd") == 1.0);
  CHECK(feature(xs, gs, addr(2), "wd_tx_ratio_sent") == 0.0);

  const std::int64_t midnight = 1672531200;  // 2023-01-01T00:00:00Z
  const auto hours = testsupport::dataset_of(
      {tx(1, addr(1), addr(2), midnight + 3600 + 59), tx(2, addr(1), addr(2), midnight + 3 * 3600 + 1800)});
  const TxGraph gh = build_graph(hours);
  const FeatureMatrix xh = extract_implicit(hours, gh);
  CHECK(feature(xh, gh, addr(1), "mean_hour_sent") == 2.0);
  CHECK(feature(xh, gh, addr(1), "std_hour_sent") == 1.0);
  CHECK(feature(xh, gh, addr(2), "from_tx_cnt") == 0.0);
  CHECK(feature(xh, gh, addr(2), "to_tx_cnt") == 2.0);
}

TEST_CASE("implicit features match brute force on random corpora") {
  Rng rng(99);
  for (int round = 0; round < 10; ++round) {
    const LabeledDataset ds = testsupport::random_dataset(rng, 3 + rng.below(30), 1 + rng.below(120));
    const TxGraph g = build_graph(ds);
    const FeatureMatrix x = extract_implicit(ds, g);
    for (const Address& a : g.nodes) {
      const auto row = testsupport::brute_implicit(ds, a);
      for (const auto& name : implicit_feature_names()) {
        INFO(name);
        CHECK(testsupport::close_rel(feature(x, g, a, name), row.f.at(name), 1e-12));
      }
    }
  }
}

TEST_CASE("implicit feature invariants") {
  const LabeledDataset ds = generate_synthetic(SyntheticConfig{});
  const TxGraph g = build_graph(ds);
  const FeatureMatrix x = extract_implicit(ds, g);
  for (std::size_t i = 0; i < x.rows.rows; ++i) {
    const double mn = x.rows(i, x.column("min_time_bw_tx")), avg = x.rows(i, x.column("avg_time_bw_tx")),
                 mx = x.rows(i, x.column("max_time_bw_tx"));
    CHECK(avg >= 0.0);
    if (x.rows(i, x.column("from_tx_cnt")) >= 2) {
      CHECK(mn <= avg);
      CHECK(avg <= mx);
    }
    for (const char* s : {"std_hour_sent", "std_hour_recd"}) {
      CHECK(x.rows(i, x.column(s)) >= 0.0);
      CHECK(x.rows(i, x.column(s)) <= 11.5);
    }
  }
}

TEST_CASE("serial and parallel extraction agree") {
  const LabeledDataset ds = generate_synthetic(SyntheticConfig{});
  const TxGraph g = build_graph(ds);
  CHECK(extract_implicit(ds, g, ExecPolicy::Serial) == extract_implicit(ds, g, ExecPolicy::Parallel));
  CHECK(extract_explicit(ds, g, ExecPolicy::Serial) == extract_explicit(ds, g, ExecPolicy::Parallel));
}

TEST_CASE("min-max examples") {
  const FeatureMatrix a = fit_minmax(column_of({2, 4, 6}), {true, true, true});
  CHECK(a.rows.data == std::vector<double>{0.0, 0.5, 1.0});
  const FeatureMatrix c = fit_minmax(column_of({5, 5, 5}), {true, true, true});
  CHECK(c.rows.data == std::vector<double>{0.0, 0.0, 0.0});
  const FeatureMatrix clamp = fit_minmax(column_of({0, 10, 20}), {true, true, false});
  CHECK(clamp.rows.data == std::vector<double>{0.0, 1.0, 1.0});
  try {
    fit_minmax(column_of({1, 2}), {false, false});
    FAIL("expected EmptyMask");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyMask);
  }
}

TEST_CASE("min-max range and round trip on random matrices") {
  Rng rng(31);
  for (int round = 0; round < 50; ++round) {
    const std::size_t n = 2 + rng.below(30), d = 1 + rng.below(6);
    FeatureMatrix x;
    for (std::size_t j = 0; j < d; ++j) x.names.push_back("f" + std::to_string(j));
    x.rows = testsupport::random_matrix(rng, n, d, -1e6, 1e6);
    if (rng.bernoulli(0.3))
      for (std::size_t i = 0; i < n; ++i) x.rows(i, 0) = 42.0;
    std::vector<bool> mask(n);
    for (std::size_t i = 0; i < n; ++i) mask[i] = rng.bernoulli(0.7);
    mask[0] = true;
    const FeatureMatrix s = fit_minmax(x, mask);
    REQUIRE(s.scaler.has_value());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        CHECK(s.rows(i, j) >= 0.0);
        CHECK(s.rows(i, j) <= 1.0);
      }
    const Matrix back = denormalize(s.rows, *s.scaler);
    for (std::size_t i = 0; i < n; ++i) {
      if (!mask[i]) continue;
      for (std::size_t j = 0; j < d; ++j) {
        if (s.scaler->max[j] == s.scaler->min[j]) {
          CHECK(s.rows(i, j) == 0.0);
          continue;
        }
        CHECK(testsupport::close_rel(back(i, j), x.rows(i, j), 1e-9));
      }
    }
  }
}

TEST_CASE("concat keeps names and rows aligned") {
  const LabeledDataset ds = generate_synthetic(SyntheticConfig{});
  const TxGraph g = build_graph(ds);
  const FeatureMatrix e = extract_explicit(ds, g), i = extract_implicit(ds, g);
  const FeatureMatrix both = concat(e, i);
  CHECK(both.names.size() == e.names.size() + i.names.size());
  CHECK(both.rows(3, both.column("total_val_sent")) == i.rows(3, i.column("total_val_sent")));
  CHECK(both.rows(3, both.column("mean_gas")) == e.rows(3, e.column("mean_gas")));
}
