#include <algorithm>
#include <string>

#include "phishgraph/error.hpp"
#include "phishgraph/matrix.hpp"

namespace phishgraph {
namespace {

void check(bool ok, const char* op, std::size_t a, std::size_t b) {
  if (!ok)
    throw Error(Errc::ShapeMismatch,
                std::string(op) + ": inner dimensions " + std::to_string(a) + " vs " + std::to_string(b));
}

inline void spmm_row(const SparseMatrix& a, const Matrix& b, Matrix& out, std::size_t i) {
  double* dst = out.data.data() + i * out.cols;
  for (std::size_t k = a.offsets[i]; k < a.offsets[i + 1]; ++k) {
    const double v = a.values[k];
    const double* src = b.data.data() + a.col_ids[k] * b.cols;
    for (std::size_t j = 0; j < b.cols; ++j) dst[j] += v * src[j];
  }
}

inline void gemm_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i) {
  double* dst = out.data.data() + i * out.cols;
  for (std::size_t k = 0; k < a.cols; ++k) {
    const double v = a(i, k);
    const double* src = b.data.data() + k * b.cols;
    for (std::size_t j = 0; j < b.cols; ++j) dst[j] += v * src[j];
  }
}

// Row p of a^T * b: sum over i of a(i,p) * b(i,:), i ascending.
inline void gemm_tn_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t p) {
  double* dst = out.data.data() + p * out.cols;
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double v = a(i, p);
    const double* src = b.data.data() + i * b.cols;
    for (std::size_t j = 0; j < b.cols; ++j) dst[j] += v * src[j];
  }
}

inline void gemm_nt_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i) {
  for (std::size_t j = 0; j < b.rows; ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.cols; ++k) acc += a(i, k) * b(j, k);
    out(i, j) = acc;
  }
}

}  // namespace

bool SparseMatrix::is_valid() const noexcept {
  if (offsets.size() != n_rows + 1 || offsets.front() != 0 || offsets.back() != values.size() ||
      col_ids.size() != values.size())
    return false;
  for (std::size_t i = 0; i < n_rows; ++i) {
    if (offsets[i] > offsets[i + 1]) return false;
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) {
      if (col_ids[k] >= n_cols) return false;
      if (k > offsets[i] && col_ids[k] <= col_ids[k - 1]) return false;
    }
  }
  return true;
}

Matrix SparseMatrix::to_dense() const {
  Matrix out(n_rows, n_cols);
  for (std::size_t i = 0; i < n_rows; ++i)
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) out(i, col_ids[k]) = values[k];
  return out;
}

SparseMatrix identity_sparse(std::size_t n) {
  SparseMatrix m;
  m.n_rows = m.n_cols = n;
  m.offsets.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) m.offsets[i] = i;
  m.col_ids.resize(n);
  for (std::size_t i = 0; i < n; ++i) m.col_ids[i] = i;
  m.values.assign(n, 1.0);
  return m;
}

SparseMatrix transpose(const SparseMatrix& m) {
  SparseMatrix t;
  t.n_rows = m.n_cols;
  t.n_cols = m.n_rows;
  t.offsets.assign(t.n_rows + 1, 0);
  for (std::size_t c : m.col_ids) ++t.offsets[c + 1];
  for (std::size_t i = 0; i < t.n_rows; ++i) t.offsets[i + 1] += t.offsets[i];
  t.col_ids.resize(m.nnz());
  t.values.resize(m.nnz());
  std::vector<std::size_t> cursor(t.offsets.begin(), t.offsets.end() - 1);
  // Rows of m visited in order, so column ids of t come out sorted.
  for (std::size_t i = 0; i < m.n_rows; ++i)
    for (std::size_t k = m.offsets[i]; k < m.offsets[i + 1]; ++k) {
      const std::size_t dst = cursor[m.col_ids[k]]++;
      t.col_ids[dst] = i;
      t.values[dst] = m.values[k];
    }
  return t;
}

namespace kernels {

namespace serial {

Matrix spmm(const SparseMatrix& a, const Matrix& b) {
  check(a.n_cols == b.rows, "spmm", a.n_cols, b.rows);
  Matrix out(a.n_rows, b.cols);
  for (std::size_t i = 0; i < a.n_rows; ++i) spmm_row(a, b, out, i);
  return out;
}

Matrix gemm(const Matrix& a, const Matrix& b) {
  check(a.cols == b.rows, "gemm", a.cols, b.rows);
  Matrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) gemm_row(a, b, out, i);
  return out;
}

Matrix gemm_tn(const Matrix& a, const Matrix& b) {
  check(a.rows == b.rows, "gemm_tn", a.rows, b.rows);
  Matrix out(a.cols, b.cols);
  for (std::size_t p = 0; p < a.cols; ++p) gemm_tn_row(a, b, out, p);
  return out;
}

Matrix gemm_nt(const Matrix& a, const Matrix& b) {
  check(a.cols == b.cols, "gemm_nt", a.cols, b.cols);
  Matrix out(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) gemm_nt_row(a, b, out, i);
  return out;
}

}  // namespace serial

namespace parallel {

Matrix spmm(const SparseMatrix& a, const Matrix& b) {
  check(a.n_cols == b.rows, "spmm", a.n_cols, b.rows);
  Matrix out(a.n_rows, b.cols);
  const auto n = static_cast<std::ptrdiff_t>(a.n_rows);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) spmm_row(a, b, out, static_cast<std::size_t>(i));
  return out;
}

Matrix gemm(const Matrix& a, const Matrix& b) {
  check(a.cols == b.rows, "gemm", a.cols, b.rows);
  Matrix out(a.rows, b.cols);
  const auto n = static_cast<std::ptrdiff_t>(a.rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) gemm_row(a, b, out, static_cast<std::size_t>(i));
  return out;
}

Matrix gemm_tn(const Matrix& a, const Matrix& b) {
  check(a.rows == b.rows, "gemm_tn", a.rows, b.rows);
  Matrix out(a.cols, b.cols);
  const auto n = static_cast<std::ptrdiff_t>(a.cols);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < n; ++p) gemm_tn_row(a, b, out, static_cast<std::size_t>(p));
  return out;
}

Matrix gemm_nt(const Matrix& a, const Matrix& b) {
  check(a.cols == b.cols, "gemm_nt", a.cols, b.cols);
  Matrix out(a.rows, b.rows);
  const auto n = static_cast<std::ptrdiff_t>(a.rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) gemm_nt_row(a, b, out, static_cast<std::size_t>(i));
  return out;
}

}  // namespace parallel

}  // namespace kernels

Matrix spmv(const SparseMatrix& m, const Matrix& dense) { return kernels::parallel::spmm(m, dense); }

}  // namespace phishgraph
