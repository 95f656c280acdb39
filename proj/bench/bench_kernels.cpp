// Serial vs OpenMP timings for the dense/sparse kernels and feature extraction.
// Usage: bench_kernels [nodes] [reps]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>

#include <omp.h>

#include "phishgraph/features.hpp"
#include "phishgraph/graph.hpp"
#include "phishgraph/matrix.hpp"
#include "phishgraph/rng.hpp"
#include "phishgraph/synthetic.hpp"

using namespace phishgraph;

namespace {

double best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

Matrix random_dense(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.uniform(-1.0, 1.0);
  return m;
}

void row(const char* name, double serial, double parallel, bool same) {
  std::printf("%-22s %12.6f %12.6f %8.2fx  %s\n", name, serial, parallel, serial / parallel,
              same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t benign = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 4000;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 3;

  SyntheticConfig cfg;
  cfg.n_benign_addresses = benign;
  cfg.n_phishing_addresses = benign / 4;
  const LabeledDataset ds = generate_synthetic(cfg);
  const TxGraph g = build_graph(ds);
  const SparseMatrix adj = normalized_adjacency(g);
  const std::size_t n = g.nodes.size();

  Rng rng(42);
  const Matrix h = random_dense(n, 64, rng);
  const Matrix w = random_dense(64, 32, rng);
  const Matrix z = random_dense(n, 32, rng);

  std::printf("nodes=%zu edges=%zu nnz=%zu threads=%d reps=%d\n", n, g.edges.size(), adj.nnz(),
              omp_get_max_threads(), reps);
  std::printf("%-22s %12s %12s %9s\n", "kernel", "serial_s", "parallel_s", "speedup");

  Matrix a, b;
  double s = best_of(reps, [&] { a = kernels::serial::spmm(adj, h); });
  double p = best_of(reps, [&] { b = kernels::parallel::spmm(adj, h); });
  row("spmm n x 64", s, p, a == b);

  s = best_of(reps, [&] { a = kernels::serial::gemm(h, w); });
  p = best_of(reps, [&] { b = kernels::parallel::gemm(h, w); });
  row("gemm n x 64 x 32", s, p, a == b);

  s = best_of(reps, [&] { a = kernels::serial::gemm_tn(h, z); });
  p = best_of(reps, [&] { b = kernels::parallel::gemm_tn(h, z); });
  row("gemm_tn 64 x n x 32", s, p, a == b);

  s = best_of(reps, [&] { a = kernels::serial::gemm_nt(z, w); });
  p = best_of(reps, [&] { b = kernels::parallel::gemm_nt(z, w); });
  row("gemm_nt n x 32 x 64", s, p, a == b);

  FeatureMatrix fa, fb;
  s = best_of(reps, [&] { fa = extract_implicit(ds, g, ExecPolicy::Serial); });
  p = best_of(reps, [&] { fb = extract_implicit(ds, g, ExecPolicy::Parallel); });
  row("extract_implicit", s, p, fa.rows == fb.rows);
  return 0;
}
