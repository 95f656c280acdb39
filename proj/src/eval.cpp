#include "phishgraph/eval.hpp"

#include <cmath>

#include "phishgraph/error.hpp"
#include "phishgraph/rng.hpp"

namespace phishgraph {
namespace {

double ratio_or_zero(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

ClassMetrics class_metrics(std::uint64_t hit, std::uint64_t false_alarm, std::uint64_t miss) {
  ClassMetrics m;
  m.precision = ratio_or_zero(static_cast<double>(hit), static_cast<double>(hit + false_alarm));
  m.recall = ratio_or_zero(static_cast<double>(hit), static_cast<double>(hit + miss));
  m.f1 = ratio_or_zero(2.0 * m.precision * m.recall, m.precision + m.recall);
  m.support = hit + miss;
  return m;
}

}  // namespace

SplitMasks stratified_split(const std::vector<Label>& labels, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(Errc::InvalidConfig, "split ratio must lie in (0,1)");
  SplitMasks s;
  s.seed = seed;
  s.ratio = ratio;
  s.train_mask.assign(labels.size(), false);
  s.test_mask.assign(labels.size(), false);
  Rng rng(seed);
  for (Label cls : {Label::Benign, Label::Phishing}) {
    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) ids.push_back(i);
    rng.shuffle(ids);
    const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(ids.size())));
    for (std::size_t k = 0; k < ids.size(); ++k) (k < n_train ? s.train_mask : s.test_mask)[ids[k]] = true;
  }
  return s;
}

ConfusionMatrix confusion(const std::vector<Label>& predicted, const std::vector<Label>& truth,
                          const std::vector<bool>& mask) {
  if (predicted.size() != truth.size() || mask.size() != truth.size())
    throw Error(Errc::ShapeMismatch, "confusion: prediction, truth and mask lengths differ");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!mask[i]) continue;
    const bool p = predicted[i] == Label::Phishing;
    const bool t = truth[i] == Label::Phishing;
    if (p && t) ++cm.tp;
    else if (p) ++cm.fp;
    else if (t) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  MetricsReport r;
  r.confusion = cm;
  r.accuracy = ratio_or_zero(static_cast<double>(cm.tp + cm.tn), static_cast<double>(cm.total()));
  r.phishing = class_metrics(cm.tp, cm.fp, cm.fn);
  r.benign = class_metrics(cm.tn, cm.fn, cm.fp);
  const double sb = static_cast<double>(r.benign.support);
  const double sp = static_cast<double>(r.phishing.support);
  const double total = sb + sp;
  auto avg = [&](double b, double p) { return ratio_or_zero(sb * b + sp * p, total); };
  r.weighted.precision = avg(r.benign.precision, r.phishing.precision);
  r.weighted.recall = avg(r.benign.recall, r.phishing.recall);
  r.weighted.f1 = avg(r.benign.f1, r.phishing.f1);
  r.weighted.support = r.benign.support + r.phishing.support;
  return r;
}

}  // namespace phishgraph
