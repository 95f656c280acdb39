#include "phishgraph/stats.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "phishgraph/error.hpp"

namespace phishgraph {

ClassFeatureStats class_feature_stats(const FeatureMatrix& x, const std::vector<Label>& labels) {
  if (labels.size() != x.rows.rows) throw Error(Errc::ShapeMismatch, "labels length != feature rows");
  ClassFeatureStats out;
  for (std::size_t j = 0; j < x.rows.cols; ++j) {
    FeatureClassStats fs;
    fs.feature = x.names[j];
    for (Label cls : {Label::Phishing, Label::Benign}) {
      SummaryStat& s = cls == Label::Phishing ? fs.phishing : fs.benign;
      double sum = 0.0;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != cls) continue;
        const double v = x.rows(i, j);
        s.max = s.support == 0 ? v : std::max(s.max, v);
        sum += v;
        ++s.support;
      }
      if (s.support == 0) continue;
      s.absent = false;
      s.mean = sum / static_cast<double>(s.support);
      double ss = 0.0;
      for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == cls) ss += (x.rows(i, j) - s.mean) * (x.rows(i, j) - s.mean);
      s.std = std::sqrt(ss / static_cast<double>(s.support));
    }
    out.push_back(std::move(fs));
  }
  return out;
}

void write_stats_csv(std::ostream& out, const ClassFeatureStats& stats) {
  const auto old_precision = out.precision(17);
  out << "feature,class,mean,max,std,support\n";
  for (const auto& fs : stats) {
    for (Label cls : {Label::Phishing, Label::Benign}) {
      const SummaryStat& s = cls == Label::Phishing ? fs.phishing : fs.benign;
      out << fs.feature << ',' << to_string(cls) << ',';
      if (s.absent)
        out << "absent,absent,absent";
      else
        out << s.mean << ',' << s.max << ',' << s.std;
      out << ',' << s.support << '\n';
    }
  }
  out.precision(old_precision);
}

}  // namespace phishgraph
