// Shared test helpers: independent oracles (kept free of the production
// solver paths they check) and random problem builders.

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "curvlab/kernels.hpp"
#include "curvlab/rng.hpp"

namespace curvlab::testing {

// Symmetric matrix with a prescribed spectrum: diag(eigs) conjugated by a
// product of random Householder reflectors (exactly orthogonal similarity).
inline MatrixD symmetric_with_spectrum(const std::vector<double>& eigs, SeededRng& rng,
                                       int reflectors = 8) {
  const std::size_t n = eigs.size();
  MatrixD a(n, n);
  for (std::size_t i = 0; i < n; ++i) a(i, i) = eigs[i];

  for (int r = 0; r < reflectors; ++r) {
    std::vector<double> v = rng.normal_vector(n);
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;

    // A <- (I - 2vv^T) A (I - 2vv^T)
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += a(i, j) * v[j];
      w[i] = acc;
    }
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) c += v[i] * w[i];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        a(i, j) += -2.0 * v[i] * w[j] - 2.0 * w[i] * v[j] + 4.0 * c * v[i] * v[j];
  }
  // Exact symmetry for downstream checks.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (a(i, j) + a(j, i));
  return a;
}

inline MatrixD random_symmetric(std::size_t n, SeededRng& rng, double scale = 1.0) {
  MatrixD a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) a(i, j) = a(j, i) = scale * rng.normal();
  return a;
}

// Test-side tridiagonalization by explicit Householder similarity products.
// Slow and simple on purpose: it shares no code with the library solver.
struct NaiveTridiag {
  std::vector<double> diag;
  std::vector<double> off;
};

inline NaiveTridiag naive_tridiagonalize(MatrixD a) {
  const std::size_t n = a.rows;
  for (std::size_t k = 0; k + 2 < n; ++k) {
    std::vector<double> x(n, 0.0);
    double xnorm = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) {
      x[i] = a(i, k);
      xnorm += x[i] * x[i];
    }
    xnorm = std::sqrt(xnorm);
    if (xnorm == 0.0) continue;
    std::vector<double> v = x;
    v[k + 1] += x[k + 1] >= 0.0 ? xnorm : -xnorm;
    double vnorm = 0.0;
    for (double t : v) vnorm += t * t;
    vnorm = std::sqrt(vnorm);
    if (vnorm == 0.0) continue;
    for (double& t : v) t /= vnorm;

    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += a(i, j) * v[j];
      w[i] = acc;
    }
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) c += v[i] * w[i];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        a(i, j) += -2.0 * v[i] * w[j] - 2.0 * w[i] * v[j] + 4.0 * c * v[i] * v[j];
  }
  NaiveTridiag t;
  for (std::size_t i = 0; i < n; ++i) t.diag.push_back(a(i, i));
  for (std::size_t i = 0; i + 1 < n; ++i) t.off.push_back(a(i + 1, i));
  return t;
}

// Sturm count for the naive tridiagonal form: eigenvalues strictly below x.
inline int naive_count_below(const NaiveTridiag& t, double x) {
  int count = 0;
  double d = t.diag[0] - x;
  if (d < 0.0) ++count;
  for (std::size_t i = 1; i < t.diag.size(); ++i) {
    if (d == 0.0) d = 1e-300;
    d = t.diag[i] - x - t.off[i - 1] * t.off[i - 1] / d;
    if (d < 0.0) ++count;
  }
  return count;
}

// Spectral radius of the heavy-ball companion matrix for one eigenmode:
// [theta', v'] = [[1 - eta lam, -eta beta], [lam, beta]] [theta, v].
inline double companion_spectral_radius(double lam, double eta, double beta) {
  const double tr = 1.0 - eta * lam + beta;
  const double det = beta;
  const double disc = tr * tr - 4.0 * det;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    return std::max(std::abs(0.5 * (tr + s)), std::abs(0.5 * (tr - s)));
  }
  return std::sqrt(det);
}

}  // namespace curvlab::testing
