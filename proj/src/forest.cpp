#include "phishgraph/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "phishgraph/error.hpp"
#include "phishgraph/rng.hpp"

namespace phishgraph {
namespace {

double gini(const std::array<double, 2>& c) {
  const double w = c[0] + c[1];
  if (w <= 0.0) return 0.0;
  const double p0 = c[0] / w, p1 = c[1] / w;
  return 1.0 - p0 * p0 - p1 * p1;
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const std::vector<Label>& y, const std::vector<double>& sample_weight,
              const ForestConfig& cfg, std::size_t subsample, Rng& rng)
      : x_(x), y_(y), w_(sample_weight), cfg_(cfg), subsample_(subsample), rng_(rng) {}

  DecisionTree build(std::vector<std::size_t> sample) {
    tree_.max_depth = cfg_.max_depth;
    tree_.impurity_decrease.assign(x_.cols, 0.0);
    root_weight_ = 0.0;
    for (std::size_t s : sample) root_weight_ += w_[s];
    grow(sample, 0);
    return std::move(tree_);
  }

 private:
  std::array<double, 2> counts(const std::vector<std::size_t>& sample) const {
    std::array<double, 2> c{};
    for (std::size_t s : sample) c[static_cast<int>(y_[s])] += w_[s];
    return c;
  }

  std::vector<std::size_t> candidate_features() {
    std::vector<std::size_t> f(x_.cols);
    std::iota(f.begin(), f.end(), 0);
    for (std::size_t i = 0; i < subsample_; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng_.below(f.size() - i));
      std::swap(f[i], f[j]);
    }
    f.resize(subsample_);
    // Ascending order so equal gains resolve to the lowest feature index.
    std::sort(f.begin(), f.end());
    return f;
  }

  Split best_split(const std::vector<std::size_t>& sample, const std::array<double, 2>& parent) {
    Split best;
    const double parent_w = parent[0] + parent[1];
    const double parent_gini = gini(parent);
    std::vector<std::size_t> order = sample;
    for (std::size_t f : candidate_features()) {
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) { return x_(a, f) < x_(b, f); });
      std::array<double, 2> left{};
      for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        left[static_cast<int>(y_[order[k]])] += w_[order[k]];
        const double lo = x_(order[k], f), hi = x_(order[k + 1], f);
        if (lo == hi) continue;
        const std::size_t n_left = k + 1, n_right = order.size() - n_left;
        if (n_left < cfg_.min_leaf || n_right < cfg_.min_leaf) continue;
        const std::array<double, 2> right = {parent[0] - left[0], parent[1] - left[1]};
        const double wl = left[0] + left[1], wr = right[0] + right[1];
        const double gain = parent_gini - (wl / parent_w) * gini(left) - (wr / parent_w) * gini(right);
        if (gain > best.gain) {
          double thr = lo + (hi - lo) / 2.0;
          if (thr >= hi) thr = lo;
          best = {static_cast<int>(f), thr, gain};
        }
      }
    }
    return best;
  }

  std::int32_t grow(const std::vector<std::size_t>& sample, std::size_t depth) {
    const auto id = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const auto c = counts(sample);
    tree_.nodes[id].class_counts = c;
    const bool pure = c[0] == 0.0 || c[1] == 0.0;
    if (pure || depth >= cfg_.max_depth || sample.size() < 2 * cfg_.min_leaf) return id;

    const Split s = best_split(sample, c);
    if (s.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (std::size_t i : sample) (x_(i, s.feature) <= s.threshold ? left : right).push_back(i);
    const double node_w = c[0] + c[1];
    tree_.impurity_decrease[s.feature] += node_w / root_weight_ * s.gain;

    tree_.nodes[id].feature = s.feature;
    tree_.nodes[id].threshold = s.threshold;
    const std::int32_t l = grow(left, depth + 1);
    const std::int32_t r = grow(right, depth + 1);
    tree_.nodes[id].left = l;
    tree_.nodes[id].right = r;
    return id;
  }

  const Matrix& x_;
  const std::vector<Label>& y_;
  const std::vector<double>& w_;
  const ForestConfig& cfg_;
  std::size_t subsample_;
  Rng& rng_;
  DecisionTree tree_;
  double root_weight_ = 0.0;
};

}  // namespace

Label DecisionTree::predict(std::span<const double> x) const {
  std::size_t n = 0;
  while (!nodes[n].is_leaf())
    n = static_cast<std::size_t>(x[nodes[n].feature] <= nodes[n].threshold ? nodes[n].left : nodes[n].right);
  const auto& c = nodes[n].class_counts;
  return c[1] > c[0] ? Label::Phishing : Label::Benign;
}

Label Forest::predict(std::span<const double> x) const {
  std::size_t votes = 0;
  for (const auto& t : trees) votes += t.predict(x) == Label::Phishing ? 1 : 0;
  return 2 * votes > trees.size() ? Label::Phishing : Label::Benign;
}

Forest train_forest(const FeatureMatrix& x, const std::vector<Label>& labels, const ForestConfig& cfg,
                    ExecPolicy policy) {
  const std::size_t n = x.rows.rows, d = x.rows.cols;
  if (labels.size() != n) throw Error(Errc::ShapeMismatch, "labels length != feature rows");
  if (cfg.n_trees < 1) throw Error(Errc::InvalidConfig, "n_trees must be >= 1");
  if (cfg.min_leaf < 1) throw Error(Errc::InvalidConfig, "min_leaf must be >= 1");
  if (d == 0) throw Error(Errc::InvalidConfig, "no features");
  const std::size_t subsample =
      cfg.feature_subsample == 0 ? static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))))
                                 : cfg.feature_subsample;
  if (subsample < 1 || subsample > d) throw Error(Errc::InvalidConfig, "feature_subsample must be in [1, d]");

  std::array<std::size_t, 2> class_n{};
  for (Label l : labels) ++class_n[static_cast<int>(l)];
  if (class_n[0] == 0 || class_n[1] == 0) throw Error(Errc::SingleClass, "random forest needs both classes");

  std::vector<double> weight(n, 1.0);
  if (cfg.class_weighting)
    for (std::size_t i = 0; i < n; ++i)
      weight[i] = static_cast<double>(n) / (2.0 * static_cast<double>(class_n[static_cast<int>(labels[i])]));

  Forest forest;
  forest.n_trees = cfg.n_trees;
  forest.feature_subsample = subsample;
  forest.feature_names = x.names;
  forest.trees.resize(cfg.n_trees);
  for (std::size_t t = 0; t < cfg.n_trees; ++t) forest.tree_seeds.push_back(derive_seed(cfg.seed, t));

  auto fit_one = [&](std::size_t t) {
    Rng rng(forest.tree_seeds[t]);
    std::vector<std::size_t> sample(n);
    for (auto& s : sample) s = static_cast<std::size_t>(rng.below(n));
    forest.trees[t] = TreeBuilder(x.rows, labels, weight, cfg, subsample, rng).build(std::move(sample));
  };
  if (policy == ExecPolicy::Serial) {
    for (std::size_t t = 0; t < cfg.n_trees; ++t) fit_one(t);
  } else {
    const auto count = static_cast<std::ptrdiff_t>(cfg.n_trees);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t t = 0; t < count; ++t) fit_one(static_cast<std::size_t>(t));
  }
  return forest;
}

std::vector<FeatureScore> feature_importance(const Forest& forest) {
  const std::size_t d = forest.feature_names.size();
  std::vector<double> total(d, 0.0);
  for (const auto& t : forest.trees)
    for (std::size_t j = 0; j < d; ++j) total[j] += t.impurity_decrease[j];
  for (double& v : total) v /= static_cast<double>(forest.trees.size());
  const double sum = std::accumulate(total.begin(), total.end(), 0.0);
  // With no split anywhere every score stays 0.
  if (sum > 0.0)
    for (double& v : total) v /= sum;

  std::vector<FeatureScore> out;
  for (std::size_t j = 0; j < d; ++j) out.push_back({forest.feature_names[j], total[j], 0});
  std::sort(out.begin(), out.end(), [](const FeatureScore& a, const FeatureScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.feature < b.feature;
  });
  for (std::size_t r = 0; r < out.size(); ++r) out[r].rank = r + 1;
  return out;
}

}  // namespace phishgraph
