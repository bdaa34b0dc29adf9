#include "curvlab/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace curvlab {

void validate(const TriDiagonal& t) {
  if (t.diagonal.empty()) throw std::invalid_argument("TriDiagonal: empty diagonal");
  if (t.off_diagonal.size() + 1 != t.diagonal.size())
    throw std::invalid_argument("TriDiagonal: off_diagonal must have k-1 entries");
}

std::pair<double, double> gershgorin_bounds(const TriDiagonal& t) {
  validate(t);
  const std::size_t k = t.diagonal.size();
  double lo = t.diagonal[0], hi = t.diagonal[0];
  for (std::size_t i = 0; i < k; ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(t.off_diagonal[i - 1]);
    if (i + 1 < k) r += std::abs(t.off_diagonal[i]);
    lo = std::min(lo, t.diagonal[i] - r);
    hi = std::max(hi, t.diagonal[i] + r);
  }
  return {lo, hi};
}

int sturm_count_below(const TriDiagonal& t, double x) {
  // Count of negative pivots of T - xI in the LDL^T recurrence.
  double scale = 0.0;
  for (double b : t.off_diagonal) scale = std::max(scale, std::abs(b));
  const double pivmin = std::max(1e-300, scale * scale * 1e-30);

  int count = 0;
  double d = t.diagonal[0] - x;
  if (d < 0.0) ++count;
  for (std::size_t i = 1; i < t.diagonal.size(); ++i) {
    if (std::abs(d) < pivmin) d = d < 0.0 ? -pivmin : pivmin;
    const double b = t.off_diagonal[i - 1];
    d = t.diagonal[i] - x - b * b / d;
    if (d < 0.0) ++count;
  }
  return count;
}

namespace {

// k-th ascending eigenvalue (0-based) by bisection on the Sturm count.
double kth_eig(const TriDiagonal& t, int k) {
  if (t.diagonal.size() == 1) return t.diagonal[0];
  auto [lo, hi] = gershgorin_bounds(t);
  const double span = std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  lo -= 1e-12 * span;
  hi += 1e-12 * span;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // interval at fp resolution
    if (sturm_count_below(t, mid) <= k)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double tridiag_max_eig(const TriDiagonal& t) {
  validate(t);
  return kth_eig(t, static_cast<int>(t.diagonal.size()) - 1);
}

std::vector<double> tridiag_eigs(const TriDiagonal& t) {
  validate(t);
  const int k = static_cast<int>(t.diagonal.size());
  std::vector<double> out(k);
  for (int i = 0; i < k; ++i) out[i] = kth_eig(t, i);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> tridiag_eigenvector(const TriDiagonal& t, double lambda) {
  validate(t);
  const std::size_t k = t.diagonal.size();
  if (k == 1) return {1.0};

  // Inverse iteration: solve (T - (lambda + shift) I) y = rhs by Gaussian
  // elimination with partial pivoting on the tridiagonal band.
  const auto [glo, ghi] = gershgorin_bounds(t);
  const double shift = 1e-12 * std::max(1.0, std::max(std::abs(glo), std::abs(ghi)));
  std::vector<double> y(k, 1.0 / std::sqrt(static_cast<double>(k)));

  for (int pass = 0; pass < 3; ++pass) {
    // Band storage: sub, diag, sup, sup2 (fill-in from pivoting).
    std::vector<double> dv(k), sub(k, 0.0), sup(k, 0.0), sup2(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) dv[i] = t.diagonal[i] - lambda - shift;
    for (std::size_t i = 0; i + 1 < k; ++i) {
      sub[i + 1] = t.off_diagonal[i];
      sup[i] = t.off_diagonal[i];
    }
    std::vector<double> rhs = y;
    for (std::size_t i = 0; i + 1 < k; ++i) {
      if (std::abs(sub[i + 1]) > std::abs(dv[i])) {
        std::swap(dv[i], sub[i + 1]);
        std::swap(sup[i], dv[i + 1]);
        std::swap(sup2[i], sup[i + 1]);
        std::swap(rhs[i], rhs[i + 1]);
      }
      const double piv = dv[i] != 0.0 ? dv[i] : 1e-300;
      const double m = sub[i + 1] / piv;
      dv[i + 1] -= m * sup[i];
      sup[i + 1] -= m * sup2[i];
      rhs[i + 1] -= m * rhs[i];
    }
    for (std::size_t ip1 = k; ip1 >= 1; --ip1) {
      const std::size_t i = ip1 - 1;
      double v = rhs[i];
      if (i + 1 < k) v -= sup[i] * y[i + 1];
      if (i + 2 < k) v -= sup2[i] * y[i + 2];
      y[i] = v / (dv[i] != 0.0 ? dv[i] : 1e-300);
    }
    double norm = 0.0;
    for (double v : y) norm += v * v;
    norm = std::sqrt(norm);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      y.assign(k, 1.0 / std::sqrt(static_cast<double>(k)));
      continue;
    }
    for (double& v : y) v /= norm;
  }
  return y;
}

}  // namespace curvlab
