// Dense batch kernels used by the models and the spectral code.
//
// Every kernel comes in two flavours:
//   curvlab::kernels::*   OpenMP-parallel, used everywhere at runtime
//   curvlab::kernels::ref::* plain serial loops, kept as the reference the
//                         parallel versions are tested and benchmarked against
//
// Parallelisation never splits the accumulation of a single output element
// across threads: matmul-style kernels assign whole output rows to threads,
// and reductions sum fixed-size chunks serially before combining the chunk
// partials in index order. Results are therefore identical for any thread
// count, which is what makes traces replay byte-for-byte.
//
// All kernels are templated on the scalar so they can run on double and on
// curvlab::Dual (forward-mode tangents for Hessian-vector products).

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace curvlab {

template <typename T>
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;  // row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, T{}) {}

  T& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  T* row(std::size_t i) { return data.data() + i * cols; }
  const T* row(std::size_t i) const { return data.data() + i * cols; }
};

using MatrixD = Matrix<double>;

namespace kernels {

// Loops below this many fused multiply-adds are not worth a thread team.
inline constexpr std::size_t kOmpGrain = 16 * 1024;
// Reduction chunk size; fixed so the summation tree does not depend on the
// thread count.
inline constexpr std::size_t kChunk = 4096;

namespace ref {

// C = A * B^T,  A: m x k, B: n x k, C: m x n
template <typename T>
void matmul_nt(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& c) {
  const std::size_t m = a.rows, k = a.cols, n = b.rows;
  if (b.cols != k) throw std::invalid_argument("matmul_nt: inner dims differ");
  c.rows = m; c.cols = n; c.data.assign(m * n, T{});
  for (std::size_t i = 0; i < m; ++i) {
    const T* ai = a.row(i);
    T* ci = c.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const T* bj = b.row(j);
      T acc{};
      for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
      ci[j] = acc;
    }
  }
}

// C = A * B,  A: m x k, B: k x n, C: m x n
template <typename T>
void matmul_nn(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& c) {
  const std::size_t m = a.rows, k = a.cols, n = b.cols;
  if (b.rows != k) throw std::invalid_argument("matmul_nn: inner dims differ");
  c.rows = m; c.cols = n; c.data.assign(m * n, T{});
  for (std::size_t i = 0; i < m; ++i) {
    const T* ai = a.row(i);
    T* ci = c.row(i);
    for (std::size_t p = 0; p < k; ++p) {
      const T aip = ai[p];
      const T* bp = b.row(p);
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

// C = A^T * B,  A: k x m, B: k x n, C: m x n
template <typename T>
void matmul_tn(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& c) {
  const std::size_t k = a.rows, m = a.cols, n = b.cols;
  if (b.rows != k) throw std::invalid_argument("matmul_tn: inner dims differ");
  c.rows = m; c.cols = n; c.data.assign(m * n, T{});
  for (std::size_t i = 0; i < m; ++i) {
    T* ci = c.row(i);
    for (std::size_t r = 0; r < k; ++r) {
      const T ari = a(r, i);
      const T* br = b.row(r);
      for (std::size_t j = 0; j < n; ++j) ci[j] += ari * br[j];
    }
  }
}

template <typename T>
T dot(const std::vector<T>& x, const std::vector<T>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("dot: size mismatch");
  T acc{};
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

}  // namespace ref

template <typename T>
void matmul_nt(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& c) {
  const std::size_t m = a.rows, k = a.cols, n = b.rows;
  if (b.cols != k) throw std::invalid_argument("matmul_nt: inner dims differ");
  c.rows = m; c.cols = n; c.data.assign(m * n, T{});
  const bool par = m * n * k > kOmpGrain;
#pragma omp parallel for schedule(static) if (par)
  for (long long ii = 0; ii < static_cast<long long>(m); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    const T* ai = a.row(i);
    T* ci = c.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const T* bj = b.row(j);
      T acc{};
      for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
      ci[j] = acc;
    }
  }
}

template <typename T>
void matmul_nn(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& c) {
  const std::size_t m = a.rows, k = a.cols, n = b.cols;
  if (b.rows != k) throw std::invalid_argument("matmul_nn: inner dims differ");
  c.rows = m; c.cols = n; c.data.assign(m * n, T{});
  const bool par = m * n * k > kOmpGrain;
#pragma omp parallel for schedule(static) if (par)
  for (long long ii = 0; ii < static_cast<long long>(m); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    const T* ai = a.row(i);
    T* ci = c.row(i);
    for (std::size_t p = 0; p < k; ++p) {
      const T aip = ai[p];
      const T* bp = b.row(p);
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

template <typename T>
void matmul_tn(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& c) {
  const std::size_t k = a.rows, m = a.cols, n = b.cols;
  if (b.rows != k) throw std::invalid_argument("matmul_tn: inner dims differ");
  c.rows = m; c.cols = n; c.data.assign(m * n, T{});
  const bool par = m * n * k > kOmpGrain;
#pragma omp parallel for schedule(static) if (par)
  for (long long ii = 0; ii < static_cast<long long>(m); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    T* ci = c.row(i);
    for (std::size_t r = 0; r < k; ++r) {
      const T ari = a(r, i);
      const T* br = b.row(r);
      for (std::size_t j = 0; j < n; ++j) ci[j] += ari * br[j];
    }
  }
}

// M[i,:] += v
template <typename T>
void add_row_vector(Matrix<T>& m, const std::vector<T>& v) {
  if (v.size() != m.cols) throw std::invalid_argument("add_row_vector: size mismatch");
  const bool par = m.rows * m.cols > kOmpGrain;
#pragma omp parallel for schedule(static) if (par)
  for (long long ii = 0; ii < static_cast<long long>(m.rows); ++ii) {
    T* mi = m.row(static_cast<std::size_t>(ii));
    for (std::size_t j = 0; j < m.cols; ++j) mi[j] += v[j];
  }
}

// out[j] = sum_i M[i,j]; one thread owns a column, serial down the rows
template <typename T>
std::vector<T> col_sums(const Matrix<T>& m) {
  std::vector<T> out(m.cols, T{});
  const bool par = m.rows * m.cols > kOmpGrain;
#pragma omp parallel for schedule(static) if (par)
  for (long long jj = 0; jj < static_cast<long long>(m.cols); ++jj) {
    const std::size_t j = static_cast<std::size_t>(jj);
    T acc{};
    for (std::size_t i = 0; i < m.rows; ++i) acc += m(i, j);
    out[j] = acc;
  }
  return out;
}

template <typename T, typename F>
void map_inplace(Matrix<T>& m, F f) {
  const bool par = m.data.size() > kOmpGrain;
#pragma omp parallel for schedule(static) if (par)
  for (long long i = 0; i < static_cast<long long>(m.data.size()); ++i)
    m.data[static_cast<std::size_t>(i)] = f(m.data[static_cast<std::size_t>(i)]);
}

// Deterministic chunked dot product: chunk partials are serial sums combined
// in index order, so the value does not depend on the thread count.
template <typename T>
T dot(const T* x, const T* y, std::size_t n) {
  if (n <= kChunk) {
    T acc{};
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
  }
  const std::size_t nchunks = (n + kChunk - 1) / kChunk;
  std::vector<T> partial(nchunks, T{});
#pragma omp parallel for schedule(static)
  for (long long cc = 0; cc < static_cast<long long>(nchunks); ++cc) {
    const std::size_t c = static_cast<std::size_t>(cc);
    const std::size_t lo = c * kChunk;
    const std::size_t hi = lo + kChunk < n ? lo + kChunk : n;
    T acc{};
    for (std::size_t i = lo; i < hi; ++i) acc += x[i] * y[i];
    partial[c] = acc;
  }
  T total{};
  for (const T& p : partial) total += p;
  return total;
}

template <typename T>
T dot(const std::vector<T>& x, const std::vector<T>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("dot: size mismatch");
  return dot(x.data(), y.data(), x.size());
}

inline double nrm2(const std::vector<double>& x) {
  return std::sqrt(dot(x, x));
}

// y += a * x
template <typename T>
void axpy(T a, const std::vector<T>& x, std::vector<T>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: size mismatch");
  const bool par = x.size() > kOmpGrain;
#pragma omp parallel for schedule(static) if (par)
  for (long long i = 0; i < static_cast<long long>(x.size()); ++i)
    y[static_cast<std::size_t>(i)] += a * x[static_cast<std::size_t>(i)];
}

template <typename T>
void scale(std::vector<T>& x, T a) {
  const bool par = x.size() > kOmpGrain;
#pragma omp parallel for schedule(static) if (par)
  for (long long i = 0; i < static_cast<long long>(x.size()); ++i)
    x[static_cast<std::size_t>(i)] *= a;
}

}  // namespace kernels

// Euclidean norm of a flat parameter/gradient vector. Layout independent:
// only the flat contents matter.
inline double global_l2_norm(const std::vector<double>& v) { return kernels::nrm2(v); }

}  // namespace curvlab
