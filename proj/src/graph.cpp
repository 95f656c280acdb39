#include "phishgraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <utility>

#include "phishgraph/batch.hpp"
#include "phishgraph/error.hpp"

namespace phishgraph {

TxGraph build_graph(const LabeledDataset& ds) {
  TxGraph g;
  auto intern = [&](const Address& a) {
    auto [it, inserted] = g.node_index.try_emplace(a, g.nodes.size());
    if (inserted) g.nodes.push_back(a);
    return it->second;
  };
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> edge_slot;
  for (const Transaction& tx : ds.transactions()) {
    const std::size_t s = intern(tx.sender);
    const std::size_t d = intern(tx.receiver);
    auto [it, inserted] = edge_slot.try_emplace({s, d}, g.edges.size());
    if (inserted) g.edges.push_back({s, d, 0});
    ++g.edges[it->second].weight;
  }
  return g;
}

SparseMatrix normalized_adjacency(const TxGraph& g, AdjacencyOptions options) {
  const std::size_t n = g.node_count();
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(n);
  for (const Edge& e : g.edges) {
    rows[e.src].emplace_back(e.dst, 1.0);
    if (options.symmetrize) rows[e.dst].emplace_back(e.src, 1.0);
  }
  SparseMatrix m;
  m.n_rows = m.n_cols = n;
  m.offsets.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = rows[i];
    std::sort(r.begin(), r.end());
    // Duplicates come only from symmetrization: max(A, A^T) keeps 1.
    r.erase(std::unique(r.begin(), r.end(),
                        [](const auto& a, const auto& b) { return a.first == b.first; }),
            r.end());
    if (options.add_self_loops) {
      auto it = std::lower_bound(r.begin(), r.end(), std::make_pair(i, 0.0));
      if (it != r.end() && it->first == i)
        it->second += 1.0;
      else
        r.insert(it, {i, 1.0});
    }
  }
  std::vector<double> inv_sqrt_deg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (const auto& [j, v] : rows[i]) deg += v;
    if (deg > 0.0) inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, v] : rows[i]) {
      const double w = inv_sqrt_deg[i] * v * inv_sqrt_deg[j];
      if (w == 0.0) continue;
      m.col_ids.push_back(j);
      m.values.push_back(w);
    }
    m.offsets[i + 1] = m.values.size();
  }
  return m;
}

double spectral_radius_estimate(const SparseMatrix& m, int max_iter, double tol) {
  if (m.n_rows == 0) return 0.0;
  Matrix x(m.n_cols, 1);
  // Deterministic start with components along every direction.
  for (std::size_t i = 0; i < x.rows; ++i) x(i, 0) = 1.0 + 1e-3 * static_cast<double>(i % 7);
  auto norm = [](const Matrix& v) {
    double s = 0.0;
    for (double d : v.data) s += d * d;
    return std::sqrt(s);
  };
  double nx = norm(x);
  for (double& d : x.data) d /= nx;
  double estimate = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Matrix y = kernels::serial::spmm(m, x);
    const double ny = norm(y);
    if (ny == 0.0) return 0.0;
    for (double& d : y.data) d /= ny;
    const bool done = std::abs(ny - estimate) < tol;
    estimate = ny;
    x = std::move(y);
    if (done) break;
  }
  return estimate;
}

void write_edge_list(std::ostream& out, const TxGraph& g) {
  for (const Edge& e : g.edges)
    out << g.nodes[e.src].str() << ' ' << g.nodes[e.dst].str() << ' ' << e.weight << '\n';
}

GraphBatch to_training_inputs(const TxGraph& g, const FeatureMatrix& x, const LabeledDataset& ds,
                              const SplitMasks& split, AdjacencyOptions options) {
  const std::size_t n = g.node_count();
  if (x.rows.rows != n)
    throw Error(Errc::ShapeMismatch, "feature rows " + std::to_string(x.rows.rows) +
                                         " != node count " + std::to_string(n));
  if (split.train_mask.size() != n || split.test_mask.size() != n)
    throw Error(Errc::ShapeMismatch, "split masks do not match node count");
  GraphBatch b;
  b.features = x.rows;
  b.norm_adj = normalized_adjacency(g, options);
  b.labels.reserve(n);
  for (const Address& a : g.nodes) b.labels.push_back(ds.label_of(a));
  b.train_mask = split.train_mask;
  b.test_mask = split.test_mask;
  for (std::size_t i = 0; i < n; ++i)
    if (b.train_mask[i] && b.test_mask[i])
      throw Error(Errc::ShapeMismatch, "train and test masks overlap at node " + std::to_string(i));
  return b;
}

}  // namespace phishgraph
