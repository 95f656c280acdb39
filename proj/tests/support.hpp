#pragma once

// Generators and brute-force reference implementations shared by the unit
// and acceptance tests. Oracles use dense arithmetic and libc time routines
// only, never the library code they check.

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "phishgraph/eval.hpp"
#include "phishgraph/features.hpp"
#include "phishgraph/gcn.hpp"
#include "phishgraph/graph.hpp"
#include "phishgraph/rng.hpp"
#include "phishgraph/txmodel.hpp"

namespace testsupport {

using namespace phishgraph;

inline Address addr(std::uint64_t id) {
  std::array<std::uint8_t, 20> b{};
  for (int i = 0; i < 8; ++i) b[19 - i] = static_cast<std::uint8_t>(id >> (8 * i));
  b[0] = 0xa0;
  return Address::from_bytes(b);
}

inline std::string hash_for(std::uint64_t id) {
  char buf[67];
  std::snprintf(buf, sizeof buf, "0x%064llx", static_cast<unsigned long long>(id));
  return buf;
}

inline Transaction tx(std::uint64_t id, const Address& from, const Address& to, std::int64_t ts,
                      Wei value = 1, std::uint64_t gas_used = 21000) {
  Transaction t;
  t.block_number = 1000 + static_cast<std::uint64_t>(ts / 12);
  t.timestamp = ts;
  t.tx_hash = hash_for(id);
  t.sender = from;
  t.receiver = to;
  t.value = std::move(value);
  t.gas = gas_used + 5000;
  t.gas_price = 20'000'000'000ULL + id;
  t.gas_used = gas_used;
  return t;
}

inline LabeledDataset dataset_of(std::vector<Transaction> txs, const std::set<Address>& phishing = {}) {
  std::map<Address, AddressLabel> labels;
  for (const auto& t : txs)
    for (const Address& a : {t.sender, t.receiver})
      labels[a] = {phishing.contains(a) ? Label::Phishing : Label::Benign, Provenance::Synthetic};
  sort_transactions(txs);
  return LabeledDataset(std::move(txs), std::move(labels));
}

// Random multigraph on n addresses, self-transfers allowed.
inline LabeledDataset random_dataset(Rng& rng, std::size_t n_nodes, std::size_t n_tx, double p_phishing = 0.3) {
  std::vector<Transaction> txs;
  std::set<Address> phishing;
  for (std::size_t i = 0; i < n_nodes; ++i)
    if (rng.bernoulli(p_phishing)) phishing.insert(addr(i));
  for (std::size_t k = 0; k < n_tx; ++k) {
    const Address from = addr(rng.below(n_nodes));
    const Address to = addr(rng.below(n_nodes));
    const std::int64_t ts = 1'600'000'000 + rng.between(0, 400 * 86400);
    Wei value = Wei(rng.between(0, 1'000'000'000)) * Wei(rng.between(1, 1'000'000'000'000LL));
    txs.push_back(tx(k + 1, from, to, ts, value, static_cast<std::uint64_t>(rng.between(21000, 200000))));
  }
  return dataset_of(std::move(txs), phishing);
}

inline Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
  Matrix m(r, c);
  for (double& v : m.data) v = rng.uniform(lo, hi);
  return m;
}

inline GcnModel random_model(Rng& rng, std::size_t in, const std::vector<std::size_t>& hidden, bool bias) {
  GcnModel m;
  std::size_t prev = in;
  std::vector<std::size_t> dims = hidden;
  dims.push_back(2);
  for (std::size_t d : dims) {
    m.weights.push_back(random_matrix(rng, prev, d));
    if (bias) {
      std::vector<double> b(d);
      for (double& v : b) v = rng.uniform(-0.5, 0.5);
      m.biases.push_back(std::move(b));
    }
    prev = d;
  }
  return m;
}

using Dense = std::vector<std::vector<double>>;

inline Dense dense_of(const Matrix& m) {
  Dense d(m.rows, std::vector<double>(m.cols));
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) d[i][j] = m(i, j);
  return d;
}

// D^-1/2 (A + I) D^-1/2 built with dense loops from the transaction list.
inline Dense dense_normalized_adjacency(const LabeledDataset& ds, const std::vector<Address>& nodes,
                                        bool self_loops = true, bool symmetrize = true) {
  const std::size_t n = nodes.size();
  auto index = [&](const Address& a) {
    for (std::size_t i = 0; i < n; ++i)
      if (nodes[i] == a) return i;
    return n;
  };
  Dense a(n, std::vector<double>(n, 0.0));
  for (const auto& t : ds.transactions()) {
    const std::size_t i = index(t.sender), j = index(t.receiver);
    a[i][j] = 1.0;
    if (symmetrize) a[j][i] = 1.0;
  }
  if (self_loops)
    for (std::size_t i = 0; i < n; ++i) a[i][i] += 1.0;
  std::vector<double> deg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) deg[i] += a[i][j];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      a[i][j] = (deg[i] > 0 && deg[j] > 0) ? a[i][j] / (std::sqrt(deg[i]) * std::sqrt(deg[j])) : 0.0;
  return a;
}

inline Dense dense_mul(const Dense& a, const Dense& b) {
  const std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
  Dense c(n, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t j = 0; j < m; ++j) c[i][j] += a[i][p] * b[p][j];
  return c;
}

// Inference-mode forward with dense matrices: ReLU hidden, softmax output.
inline Dense dense_forward(const GcnModel& model, const Dense& adj, const Dense& x) {
  Dense h = x;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    Dense z = dense_mul(dense_mul(adj, h), dense_of(model.weights[l]));
    if (!model.biases.empty())
      for (auto& r : z)
        for (std::size_t j = 0; j < r.size(); ++j) r[j] += model.biases[l][j];
    const bool last = l + 1 == model.weights.size();
    for (auto& r : z) {
      if (!last) {
        for (double& v : r) v = std::max(v, 0.0);
      } else {
        const double mx = std::max(r[0], r[1]);
        const double e0 = std::exp(r[0] - mx), e1 = std::exp(r[1] - mx);
        r[0] = e0 / (e0 + e1);
        r[1] = e1 / (e0 + e1);
      }
    }
    h = std::move(z);
  }
  return h;
}

// Sum of u128 values rendered in decimal, then correctly rounded by strtod.
inline double u128_to_double(unsigned __int128 v) {
  if (v == 0) return 0.0;
  std::string s;
  while (v) {
    s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  return std::strtod(s.c_str(), nullptr);
}

inline unsigned __int128 to_u128(const Wei& w) {
  unsigned __int128 v = 0;
  for (char c : to_decimal(w)) v = v * 10 + static_cast<unsigned>(c - '0');
  return v;
}

struct BruteRow {
  std::map<std::string, double> f;
};

// Every implicit feature recomputed per address from the raw transaction
// list, with UTC calendar fields taken from gmtime_r.
inline BruteRow brute_implicit(const LabeledDataset& ds, const Address& a) {
  std::vector<const Transaction*> sent, recd, all;
  for (const auto& t : ds.transactions()) {
    if (t.sender == a) sent.push_back(&t);
    if (t.receiver == a) recd.push_back(&t);
    if (t.sender == a || t.receiver == a) all.push_back(&t);
  }
  auto hour = [](std::int64_t ts) {
    std::time_t tt = static_cast<std::time_t>(ts);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    return static_cast<double>(tm.tm_hour);
  };
  auto weekend = [](std::int64_t ts) {
    std::time_t tt = static_cast<std::time_t>(ts);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    return tm.tm_wday == 0 || tm.tm_wday == 6;
  };
  auto block = [&](const std::vector<const Transaction*>& v, const char* dir, BruteRow& r) {
    const std::string d = dir;
    unsigned __int128 total = 0;
    double gas = 0, hsum = 0, wd = 0;
    for (auto* t : v) {
      total += to_u128(t->value);
      gas += static_cast<double>(t->gas_used);
      hsum += hour(t->timestamp);
      wd += weekend(t->timestamp) ? 1 : 0;
    }
    const double n = static_cast<double>(v.size());
    const double mean_h = v.empty() ? 0.0 : hsum / n;
    double var = 0;
    for (auto* t : v) var += (hour(t->timestamp) - mean_h) * (hour(t->timestamp) - mean_h);
    r.f[d == "sent" ? "from_tx_cnt" : "to_tx_cnt"] = n;
    r.f[d == "sent" ? "total_val_sent" : "total_val_recd"] = u128_to_double(total);
    r.f["avg_gas_" + d] = v.empty() ? 0.0 : gas / n;
    r.f["mean_hour_" + d] = mean_h;
    r.f["std_hour_" + d] = v.size() < 2 ? 0.0 : std::sqrt(var / n);
    r.f["wd_tx_ratio_" + d] = v.empty() ? 0.0 : wd / n;
  };
  BruteRow r;
  block(sent, "sent", r);
  block(recd, "recd", r);
  std::vector<std::int64_t> ts;
  for (auto* t : sent) ts.push_back(t->timestamp);
  std::sort(ts.begin(), ts.end());
  double sum = 0, mn = 0, mx = 0;
  for (std::size_t i = 1; i < ts.size(); ++i) {
    const double d = static_cast<double>(ts[i] - ts[i - 1]);
    sum += d;
    mn = i == 1 ? d : std::min(mn, d);
    mx = i == 1 ? d : std::max(mx, d);
  }
  r.f["avg_time_bw_tx"] = ts.size() < 2 ? 0.0 : sum / static_cast<double>(ts.size() - 1);
  r.f["min_time_bw_tx"] = mn;
  r.f["max_time_bw_tx"] = mx;
  std::int64_t lo = all.front()->timestamp, hi = lo;
  for (auto* t : all) {
    lo = std::min(lo, t->timestamp);
    hi = std::max(hi, t->timestamp);
  }
  r.f["tx_duration"] = static_cast<double>(hi - lo);
  return r;
}

// Per-class precision/recall/F1 counted directly from the vectors.
struct BruteMetrics {
  double acc = 0;
  double p[2]{}, r[2]{}, f[2]{};
  double support[2]{};
  double wp = 0, wr = 0, wf = 0;
};

inline BruteMetrics brute_metrics(const std::vector<Label>& pred, const std::vector<Label>& truth,
                                  const std::vector<bool>& mask) {
  BruteMetrics m;
  double correct = 0, total = 0;
  for (int c = 0; c < 2; ++c) {
    double tp = 0, pp = 0, ap = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (!mask[i]) continue;
      const bool is_pred = static_cast<int>(pred[i]) == c, is_true = static_cast<int>(truth[i]) == c;
      tp += is_pred && is_true;
      pp += is_pred;
      ap += is_true;
    }
    m.p[c] = pp == 0 ? 0 : tp / pp;
    m.r[c] = ap == 0 ? 0 : tp / ap;
    m.f[c] = m.p[c] + m.r[c] == 0 ? 0 : 2 * m.p[c] * m.r[c] / (m.p[c] + m.r[c]);
    m.support[c] = ap;
  }
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (mask[i]) {
      total += 1;
      correct += pred[i] == truth[i];
    }
  m.acc = total == 0 ? 0 : correct / total;
  if (total > 0) {
    m.wp = (m.p[0] * m.support[0] + m.p[1] * m.support[1]) / total;
    m.wr = (m.r[0] * m.support[0] + m.r[1] * m.support[1]) / total;
    m.wf = (m.f[0] * m.support[0] + m.f[1] * m.support[1]) / total;
  }
  return m;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("phishgraph_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline bool close_rel(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace testsupport
