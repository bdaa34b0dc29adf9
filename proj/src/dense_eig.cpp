#include "curvlab/dense_eig.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace curvlab {

double relative_asymmetry(const MatrixD& a) {
  double max_abs = 0.0;
  double max_diff = 0.0;
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < a.cols; ++j) {
      max_abs = std::max(max_abs, std::abs(a(i, j)));
      if (j > i) max_diff = std::max(max_diff, std::abs(a(i, j) - a(j, i)));
    }
  }
  if (max_abs == 0.0) return 0.0;
  return max_diff / max_abs;
}

namespace {

// Householder reduction to tridiagonal form. On exit d holds the diagonal and
// e[1..n-1] the subdiagonal. When accumulate is true, a is overwritten with
// the orthogonal transform Z such that Z^T A Z = T.
void householder_tridiag(MatrixD& a, std::vector<double>& d, std::vector<double>& e,
                         bool accumulate) {
  const std::size_t n = a.rows;
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  if (n == 1) {
    d[0] = a(0, 0);
    if (accumulate) a(0, 0) = 1.0;
    return;
  }

  for (std::size_t i = n - 1; i >= 1; --i) {
    const std::size_t l = i - 1;
    double h = 0.0;
    double scale = 0.0;
    if (l > 0) {
      for (std::size_t k = 0; k <= l; ++k) scale += std::abs(a(i, k));
      if (scale == 0.0) {
        e[i] = a(i, l);
      } else {
        for (std::size_t k = 0; k <= l; ++k) {
          a(i, k) /= scale;
          h += a(i, k) * a(i, k);
        }
        double f = a(i, l);
        double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        a(i, l) = f - g;
        f = 0.0;
        for (std::size_t j = 0; j <= l; ++j) {
          if (accumulate) a(j, i) = a(i, j) / h;
          g = 0.0;
          for (std::size_t k = 0; k <= j; ++k) g += a(j, k) * a(i, k);
          for (std::size_t k = j + 1; k <= l; ++k) g += a(k, j) * a(i, k);
          e[j] = g / h;
          f += e[j] * a(i, j);
        }
        const double hh = f / (h + h);
        for (std::size_t j = 0; j <= l; ++j) {
          f = a(i, j);
          e[j] = g = e[j] - hh * f;
          for (std::size_t k = 0; k <= j; ++k) a(j, k) -= f * e[k] + g * a(i, k);
        }
      }
    } else {
      e[i] = a(i, l);
    }
    d[i] = h;
  }

  if (accumulate) {
    d[0] = 0.0;
    e[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (d[i] != 0.0) {
        for (std::size_t j = 0; j < i; ++j) {
          double g = 0.0;
          for (std::size_t k = 0; k < i; ++k) g += a(i, k) * a(k, j);
          for (std::size_t k = 0; k < i; ++k) a(k, j) -= g * a(k, i);
        }
      }
      d[i] = a(i, i);
      a(i, i) = 1.0;
      for (std::size_t j = 0; j < i; ++j) a(j, i) = a(i, j) = 0.0;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) d[i] = a(i, i);
  }
}

// Implicit-shift QL on a tridiagonal matrix. z, when non-null, accumulates
// the rotations (its columns become eigenvectors).
void ql_implicit_shift(std::vector<double>& d, std::vector<double>& e, MatrixD* z) {
  const std::size_t n = d.size();
  if (n <= 1) return;
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= 1e-17 * dd) break;
      }
      if (m != l) {
        if (iter++ == 60) throw std::runtime_error("dense_sym_eigs: QL failed to converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::abs(r) : -std::abs(r)));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        for (std::size_t ip1 = m; ip1 >= l + 1; --ip1) {
          const std::size_t i = ip1 - 1;
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          if (z != nullptr) {
            for (std::size_t k = 0; k < n; ++k) {
              f = (*z)(k, i + 1);
              (*z)(k, i + 1) = s * (*z)(k, i) + c * f;
              (*z)(k, i) = c * (*z)(k, i) - s * f;
            }
          }
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

void check_symmetric_input(const MatrixD& a) {
  if (a.rows != a.cols || a.rows == 0)
    throw std::invalid_argument("dense_sym_eigs: matrix must be square and nonempty");
  const double asym = relative_asymmetry(a);
  if (asym > 1e-8)
    throw std::invalid_argument("dense_sym_eigs: input asymmetry " + std::to_string(asym) +
                                " exceeds 1e-8");
}

}  // namespace

std::vector<double> dense_sym_eigs(const MatrixD& a) {
  check_symmetric_input(a);
  MatrixD work = a;
  // Symmetrize so tiny asymmetries below the tolerance cannot bias the result.
  for (std::size_t i = 0; i < work.rows; ++i)
    for (std::size_t j = i + 1; j < work.cols; ++j)
      work(i, j) = work(j, i) = 0.5 * (work(i, j) + work(j, i));
  std::vector<double> d, e;
  householder_tridiag(work, d, e, /*accumulate=*/false);
  ql_implicit_shift(d, e, nullptr);
  std::sort(d.begin(), d.end());
  return d;
}

DenseEigFull dense_sym_eigs_full(const MatrixD& a) {
  check_symmetric_input(a);
  MatrixD work = a;
  for (std::size_t i = 0; i < work.rows; ++i)
    for (std::size_t j = i + 1; j < work.cols; ++j)
      work(i, j) = work(j, i) = 0.5 * (work(i, j) + work(j, i));
  std::vector<double> d, e;
  householder_tridiag(work, d, e, /*accumulate=*/true);
  ql_implicit_shift(d, e, &work);

  // Sort eigenpairs ascending.
  const std::size_t n = d.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return d[x] < d[y]; });

  DenseEigFull out;
  out.eigenvalues.resize(n);
  out.eigenvectors = MatrixD(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.eigenvalues[j] = d[order[j]];
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, j) = work(i, order[j]);
  }
  return out;
}

}  // namespace curvlab
