#pragma once

#include <cstdint>
#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "phishgraph/matrix.hpp"
#include "phishgraph/txmodel.hpp"

namespace phishgraph {

struct Edge {
  std::size_t src = 0;
  std::size_t dst = 0;
  std::uint64_t weight = 0;  // number of transactions collapsed into this edge

  bool operator==(const Edge&) const = default;
};

// Directed address graph. Parallel transactions collapse into one weighted edge.
struct TxGraph {
  std::vector<Address> nodes;  // dense ids 0..n-1, first-appearance order
  std::vector<Edge> edges;     // first-appearance order of each (src, dst) pair
  std::unordered_map<Address, std::size_t> node_index;

  std::size_t node_count() const noexcept { return nodes.size(); }
};

TxGraph build_graph(const LabeledDataset& ds);

struct AdjacencyOptions {
  bool add_self_loops = true;
  bool symmetrize = true;
};

// D^-1/2 (A [+ I]) D^-1/2 with A the 0/1 adjacency (max(A, A^T) when
// symmetrized) and D the row sums. Zero-degree rows and columns contribute
// nothing instead of dividing by zero.
SparseMatrix normalized_adjacency(const TxGraph& g, AdjacencyOptions options = {});

// Largest |eigenvalue| estimate by power iteration on the norm ratio.
double spectral_radius_estimate(const SparseMatrix& m, int max_iter = 1000, double tol = 1e-12);

// One line per edge: "src_address dst_address weight".
void write_edge_list(std::ostream& out, const TxGraph& g);

}  // namespace phishgraph
