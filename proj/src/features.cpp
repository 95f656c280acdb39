#include "phishgraph/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "phishgraph/error.hpp"

namespace phishgraph {
namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

// 0 = Sunday; 1970-01-01 was a Thursday.
int weekday_utc(std::int64_t ts) { return static_cast<int>(((ts / kSecondsPerDay) + 4) % 7); }
int hour_utc(std::int64_t ts) { return static_cast<int>((ts % kSecondsPerDay) / 3600); }
bool is_weekend(std::int64_t ts) {
  const int d = weekday_utc(ts);
  return d == 0 || d == 6;
}

struct Incidence {
  std::vector<std::vector<std::size_t>> sent;
  std::vector<std::vector<std::size_t>> received;
};

Incidence incidence(const LabeledDataset& ds, const TxGraph& g) {
  Incidence inc;
  inc.sent.resize(g.node_count());
  inc.received.resize(g.node_count());
  const auto& txs = ds.transactions();
  for (std::size_t t = 0; t < txs.size(); ++t) {
    inc.sent[g.node_index.at(txs[t].sender)].push_back(t);
    inc.received[g.node_index.at(txs[t].receiver)].push_back(t);
  }
  return inc;
}

template <typename Fn>
void for_each_node(std::size_t n, ExecPolicy policy, Fn&& fn) {
  if (policy == ExecPolicy::Serial) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 32)
  for (std::ptrdiff_t i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
}

double mean_of(unsigned __int128 sum, std::size_t n) {
  return n == 0 ? 0.0 : static_cast<double>(sum) / static_cast<double>(n);
}

struct HourStats {
  double mean = 0.0;
  double std = 0.0;
};

HourStats hour_stats(const std::vector<Transaction>& txs, const std::vector<std::size_t>& idx) {
  HourStats s;
  if (idx.empty()) return s;
  double sum = 0.0;
  for (std::size_t t : idx) sum += hour_utc(txs[t].timestamp);
  s.mean = sum / static_cast<double>(idx.size());
  if (idx.size() < 2) return s;
  double ss = 0.0;
  for (std::size_t t : idx) {
    const double d = hour_utc(txs[t].timestamp) - s.mean;
    ss += d * d;
  }
  s.std = std::sqrt(ss / static_cast<double>(idx.size()));
  return s;
}

double weekend_ratio(const std::vector<Transaction>& txs, const std::vector<std::size_t>& idx) {
  if (idx.empty()) return 0.0;
  std::size_t w = 0;
  for (std::size_t t : idx) w += is_weekend(txs[t].timestamp) ? 1 : 0;
  return static_cast<double>(w) / static_cast<double>(idx.size());
}

double avg_gas_used(const std::vector<Transaction>& txs, const std::vector<std::size_t>& idx) {
  unsigned __int128 sum = 0;
  for (std::size_t t : idx) sum += txs[t].gas_used;
  return mean_of(sum, idx.size());
}

double total_value(const std::vector<Transaction>& txs, const std::vector<std::size_t>& idx) {
  Wei sum = 0;
  for (std::size_t t : idx) sum += txs[t].value;
  return wei_to_double(sum);
}

}  // namespace

const char* to_string(FeatureSetKind kind) noexcept {
  return kind == FeatureSetKind::Explicit ? "explicit" : "implicit";
}

std::size_t FeatureMatrix::column(std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw Error(Errc::ShapeMismatch, "no feature named " + std::string(name));
  return static_cast<std::size_t>(it - names.begin());
}

const std::vector<std::string>& explicit_feature_names() {
  static const std::vector<std::string> names = {"mean_timestamp", "mean_value", "mean_gas",
                                                 "mean_gas_price", "mean_gas_used"};
  return names;
}

const std::vector<std::string>& implicit_feature_names() {
  static const std::vector<std::string> names = {
      "from_tx_cnt",    "to_tx_cnt",      "total_val_sent",   "total_val_recd",
      "avg_gas_sent",   "avg_gas_recd",   "mean_hour_sent",   "mean_hour_recd",
      "std_hour_sent",  "std_hour_recd",  "avg_time_bw_tx",   "min_time_bw_tx",
      "max_time_bw_tx", "tx_duration",    "wd_tx_ratio_sent", "wd_tx_ratio_recd"};
  return names;
}

FeatureMatrix extract_explicit(const LabeledDataset& ds, const TxGraph& g, ExecPolicy policy) {
  const Incidence inc = incidence(ds, g);
  const auto& txs = ds.transactions();
  FeatureMatrix fm;
  fm.names = explicit_feature_names();
  fm.rows = Matrix(g.node_count(), fm.names.size());
  for_each_node(g.node_count(), policy, [&](std::size_t i) {
    // Union of sent and received; a self-transfer appears in both lists once each.
    std::vector<std::size_t> touching = inc.sent[i];
    for (std::size_t t : inc.received[i])
      if (txs[t].sender != txs[t].receiver) touching.push_back(t);
    unsigned __int128 ts = 0, gas = 0, price = 0, used = 0;
    Wei value = 0;
    for (std::size_t t : touching) {
      ts += static_cast<unsigned __int128>(txs[t].timestamp);
      gas += txs[t].gas;
      price += txs[t].gas_price;
      used += txs[t].gas_used;
      value += txs[t].value;
    }
    const std::size_t n = touching.size();
    auto row = fm.rows.row(i);
    row[0] = mean_of(ts, n);
    row[1] = n == 0 ? 0.0 : wei_to_double(value) / static_cast<double>(n);
    row[2] = mean_of(gas, n);
    row[3] = mean_of(price, n);
    row[4] = mean_of(used, n);
  });
  return fm;
}

FeatureMatrix extract_implicit(const LabeledDataset& ds, const TxGraph& g, ExecPolicy policy) {
  const Incidence inc = incidence(ds, g);
  const auto& txs = ds.transactions();
  FeatureMatrix fm;
  fm.names = implicit_feature_names();
  fm.rows = Matrix(g.node_count(), fm.names.size());
  for_each_node(g.node_count(), policy, [&](std::size_t i) {
    const auto& sent = inc.sent[i];
    const auto& recd = inc.received[i];
    auto row = fm.rows.row(i);
    row[0] = static_cast<double>(sent.size());
    row[1] = static_cast<double>(recd.size());
    row[2] = total_value(txs, sent);
    row[3] = total_value(txs, recd);
    row[4] = avg_gas_used(txs, sent);
    row[5] = avg_gas_used(txs, recd);
    const HourStats hs = hour_stats(txs, sent);
    const HourStats hr = hour_stats(txs, recd);
    row[6] = hs.mean;
    row[7] = hr.mean;
    row[8] = hs.std;
    row[9] = hr.std;

    if (sent.size() >= 2) {
      std::vector<std::int64_t> times;
      times.reserve(sent.size());
      for (std::size_t t : sent) times.push_back(txs[t].timestamp);
      std::sort(times.begin(), times.end());
      std::int64_t lo = std::numeric_limits<std::int64_t>::max(), hi = 0, total = 0;
      for (std::size_t k = 1; k < times.size(); ++k) {
        const std::int64_t gap = times[k] - times[k - 1];
        lo = std::min(lo, gap);
        hi = std::max(hi, gap);
        total += gap;
      }
      row[10] = static_cast<double>(total) / static_cast<double>(times.size() - 1);
      row[11] = static_cast<double>(lo);
      row[12] = static_cast<double>(hi);
    }

    std::int64_t first = std::numeric_limits<std::int64_t>::max(), last = 0;
    for (const auto* list : {&sent, &recd})
      for (std::size_t t : *list) {
        first = std::min(first, txs[t].timestamp);
        last = std::max(last, txs[t].timestamp);
      }
    row[13] = sent.empty() && recd.empty() ? 0.0 : static_cast<double>(last - first);
    row[14] = weekend_ratio(txs, sent);
    row[15] = weekend_ratio(txs, recd);
  });
  return fm;
}

FeatureMatrix extract(FeatureSetKind kind, const LabeledDataset& ds, const TxGraph& g) {
  return kind == FeatureSetKind::Explicit ? extract_explicit(ds, g) : extract_implicit(ds, g);
}

FeatureMatrix concat(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.rows.rows != b.rows.rows) throw Error(Errc::ShapeMismatch, "concat: row counts differ");
  FeatureMatrix out;
  out.names = a.names;
  out.names.insert(out.names.end(), b.names.begin(), b.names.end());
  out.rows = Matrix(a.rows.rows, a.rows.cols + b.rows.cols);
  for (std::size_t i = 0; i < a.rows.rows; ++i) {
    auto dst = out.rows.row(i);
    std::copy(a.rows.row(i).begin(), a.rows.row(i).end(), dst.begin());
    std::copy(b.rows.row(i).begin(), b.rows.row(i).end(), dst.begin() + static_cast<std::ptrdiff_t>(a.rows.cols));
  }
  return out;
}

FeatureMatrix fit_minmax(const FeatureMatrix& x, const std::vector<bool>& fit_mask) {
  if (fit_mask.size() != x.rows.rows) throw Error(Errc::ShapeMismatch, "fit mask length != row count");
  MinMaxScaler s;
  s.min.assign(x.rows.cols, std::numeric_limits<double>::infinity());
  s.max.assign(x.rows.cols, -std::numeric_limits<double>::infinity());
  bool any = false;
  for (std::size_t i = 0; i < x.rows.rows; ++i) {
    if (!fit_mask[i]) continue;
    any = true;
    for (std::size_t j = 0; j < x.rows.cols; ++j) {
      s.min[j] = std::min(s.min[j], x.rows(i, j));
      s.max[j] = std::max(s.max[j], x.rows(i, j));
    }
  }
  if (!any) throw Error(Errc::EmptyMask, "fit_minmax: mask selects no rows");
  return apply_minmax(x, s);
}

FeatureMatrix apply_minmax(const FeatureMatrix& x, const MinMaxScaler& scaler) {
  if (scaler.min.size() != x.rows.cols || scaler.max.size() != x.rows.cols)
    throw Error(Errc::ShapeMismatch, "scaler width != feature count");
  FeatureMatrix out;
  out.names = x.names;
  out.rows = Matrix(x.rows.rows, x.rows.cols);
  for (std::size_t i = 0; i < x.rows.rows; ++i)
    for (std::size_t j = 0; j < x.rows.cols; ++j) {
      const double range = scaler.max[j] - scaler.min[j];
      const double v = range > 0.0 ? (x.rows(i, j) - scaler.min[j]) / range : 0.0;
      out.rows(i, j) = std::clamp(v, 0.0, 1.0);
    }
  out.scaler = scaler;
  return out;
}

Matrix denormalize(const Matrix& normalized, const MinMaxScaler& scaler) {
  if (scaler.min.size() != normalized.cols) throw Error(Errc::ShapeMismatch, "scaler width != column count");
  Matrix out(normalized.rows, normalized.cols);
  for (std::size_t i = 0; i < normalized.rows; ++i)
    for (std::size_t j = 0; j < normalized.cols; ++j)
      out(i, j) = scaler.min[j] + normalized(i, j) * (scaler.max[j] - scaler.min[j]);
  return out;
}

}  // namespace phishgraph
