#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "phishgraph/features.hpp"
#include "phishgraph/txmodel.hpp"

namespace phishgraph {

struct SummaryStat {
  double mean = 0.0;
  double max = 0.0;
  double std = 0.0;  // population
  std::uint64_t support = 0;
  bool absent = true;  // class has no rows

  bool operator==(const SummaryStat&) const = default;
};

struct FeatureClassStats {
  std::string feature;
  SummaryStat phishing;
  SummaryStat benign;

  bool operator==(const FeatureClassStats&) const = default;
};

using ClassFeatureStats = std::vector<FeatureClassStats>;

// Per-class mean/max/std of every column on the raw (unscaled) matrix.
// A class with no rows is reported absent rather than raising.
ClassFeatureStats class_feature_stats(const FeatureMatrix& x, const std::vector<Label>& labels);

// CSV with header "feature,class,mean,max,std,support"; absent classes print
// "absent" in the three statistic columns.
void write_stats_csv(std::ostream& out, const ClassFeatureStats& stats);

}  // namespace phishgraph
