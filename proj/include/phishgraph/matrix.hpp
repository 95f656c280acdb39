#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace phishgraph {

// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }

  bool operator==(const Matrix&) const = default;
};

// Compressed sparse row matrix.
struct SparseMatrix {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<std::size_t> offsets{0};  // n_rows + 1 entries
  std::vector<std::size_t> col_ids;
  std::vector<double> values;

  std::size_t nnz() const noexcept { return values.size(); }

  // Column ids strictly increasing per row, offsets consistent.
  bool is_valid() const noexcept;

  // Dense copy, for small matrices and tests.
  Matrix to_dense() const;

  bool operator==(const SparseMatrix&) const = default;
};

SparseMatrix identity_sparse(std::size_t n);
SparseMatrix transpose(const SparseMatrix& m);

// Product kernels. Every output element is accumulated in the same order in
// the serial and parallel variants, so the two agree bit for bit.
namespace kernels {

namespace serial {
Matrix spmm(const SparseMatrix& a, const Matrix& b);
Matrix gemm(const Matrix& a, const Matrix& b);     // a * b
Matrix gemm_tn(const Matrix& a, const Matrix& b);  // a^T * b
Matrix gemm_nt(const Matrix& a, const Matrix& b);  // a * b^T
}  // namespace serial

namespace parallel {
Matrix spmm(const SparseMatrix& a, const Matrix& b);
Matrix gemm(const Matrix& a, const Matrix& b);
Matrix gemm_tn(const Matrix& a, const Matrix& b);
Matrix gemm_nt(const Matrix& a, const Matrix& b);
}  // namespace parallel

}  // namespace kernels

// Sparse-dense product used by the pipeline (parallel kernel).
// Throws Error(ShapeMismatch) if m.n_cols != dense.rows.
Matrix spmv(const SparseMatrix& m, const Matrix& dense);

}  // namespace phishgraph
