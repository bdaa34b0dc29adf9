#include "curvlab/quadratic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "curvlab/dense_eig.hpp"

namespace curvlab {

namespace {

constexpr double kOverflowNorm = 1e150;

void check_common(const QuadraticProblem& p) {
  if (p.theta0.empty()) throw std::invalid_argument("QuadraticProblem: empty theta0");
  if (p.d.has_value() && p.d->d.size() != p.theta0.size())
    throw std::invalid_argument("QuadraticProblem: preconditioner dim mismatch");
}

std::vector<double> apply_h(const QuadraticProblem& p, const std::vector<double>& x) {
  std::vector<double> out(x.size(), 0.0);
  if (p.h_dense.rows > 0) {
    for (std::size_t i = 0; i < p.h_dense.rows; ++i) {
      const double* row = p.h_dense.row(i);
      double acc = 0.0;
      for (std::size_t j = 0; j < p.h_dense.cols; ++j) acc += row[j] * x[j];
      out[i] = acc;
    }
  } else {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = p.h_diag[i] * x[i];
  }
  return out;
}

}  // namespace

QuadraticProblem QuadraticProblem::dense(MatrixD h, std::vector<double> theta0,
                                         std::optional<DiagPreconditioner> d) {
  if (h.rows != h.cols || h.rows == 0)
    throw std::invalid_argument("QuadraticProblem: H must be square");
  if (h.rows > 512)
    throw std::invalid_argument("QuadraticProblem: dense form capped at dim 512");
  if (h.rows != theta0.size())
    throw std::invalid_argument("QuadraticProblem: theta0 dim mismatch");
  const std::vector<double> eigs = dense_sym_eigs(h);  // also rejects asymmetry
  const double scale = std::max(std::abs(eigs.front()), std::abs(eigs.back()));
  if (eigs.front() < -1e-10 * std::max(1.0, scale))
    throw std::invalid_argument("QuadraticProblem: H must be positive semi-definite");
  QuadraticProblem p;
  p.h_dense = std::move(h);
  p.theta0 = std::move(theta0);
  p.d = std::move(d);
  check_common(p);
  return p;
}

QuadraticProblem QuadraticProblem::diagonal(std::vector<double> spectrum,
                                            std::vector<double> theta0,
                                            std::optional<DiagPreconditioner> d) {
  if (spectrum.size() != theta0.size())
    throw std::invalid_argument("QuadraticProblem: theta0 dim mismatch");
  for (double lam : spectrum)
    if (lam < 0.0)
      throw std::invalid_argument("QuadraticProblem: spectrum must be nonnegative");
  QuadraticProblem p;
  p.h_diag = std::move(spectrum);
  p.theta0 = std::move(theta0);
  p.d = std::move(d);
  check_common(p);
  return p;
}

std::vector<double> preconditioned_spectrum(const QuadraticProblem& p) {
  if (p.h_dense.rows > 0) {
    if (!p.d.has_value()) return dense_sym_eigs(p.h_dense);
    MatrixD b = p.h_dense;
    std::vector<double> inv_sqrt(p.d->d.size());
    for (std::size_t i = 0; i < inv_sqrt.size(); ++i) inv_sqrt[i] = 1.0 / std::sqrt(p.d->d[i]);
    for (std::size_t i = 0; i < b.rows; ++i)
      for (std::size_t j = 0; j < b.cols; ++j) b(i, j) *= inv_sqrt[i] * inv_sqrt[j];
    return dense_sym_eigs(b);
  }
  std::vector<double> eigs = p.h_diag;
  if (p.d.has_value())
    for (std::size_t i = 0; i < eigs.size(); ++i) eigs[i] /= p.d->d[i];
  std::sort(eigs.begin(), eigs.end());
  return eigs;
}

namespace {

std::vector<double> amplification_factors(const QuadraticProblem& p, double eta) {
  std::vector<double> amp = preconditioned_spectrum(p);
  for (double& lam : amp) lam = std::abs(1.0 - eta * lam);
  return amp;
}

// Shared trajectory driver; velocity is unused (and skipped) when beta = 0 so
// the beta = 0 path performs exactly the gd recursion.
DynamicsResult simulate(const QuadraticProblem& p, double eta, double beta, long long steps) {
  check_common(p);
  if (steps < 1) throw std::invalid_argument("simulate: steps must be >= 1");

  DynamicsResult res;
  res.amplification = amplification_factors(p, eta);

  std::vector<double> theta = p.theta0;
  std::vector<double> vel(theta.size(), 0.0);
  res.norms.reserve(static_cast<std::size_t>(steps) + 1);
  res.norms.push_back(kernels::nrm2(theta));

  // Combined-state norms drive divergence detection for momentum runs; the
  // theta norm alone oscillates through zero for rotational modes.
  std::vector<double> state_norms;
  state_norms.reserve(static_cast<std::size_t>(steps) + 1);
  state_norms.push_back(res.norms[0]);

  bool overflowed = false;
  for (long long t = 0; t < steps; ++t) {
    std::vector<double> g = apply_h(p, theta);
    if (p.d.has_value())
      for (std::size_t i = 0; i < g.size(); ++i) g[i] /= p.d->d[i];
    if (beta != 0.0) {
      for (std::size_t i = 0; i < theta.size(); ++i) {
        vel[i] = beta * vel[i] + g[i];
        theta[i] -= eta * vel[i];
      }
    } else {
      for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= eta * g[i];
    }

    const double theta_norm = kernels::nrm2(theta);
    res.norms.push_back(theta_norm);
    double state_norm = theta_norm;
    if (beta != 0.0)
      state_norm = std::sqrt(theta_norm * theta_norm +
                             kernels::dot(vel, vel));
    state_norms.push_back(state_norm);

    if (!std::isfinite(state_norm) || state_norm > kOverflowNorm) {
      // Clamp so callers never see inf/nan in the norms.
      if (!std::isfinite(theta_norm) || theta_norm > kOverflowNorm)
        res.norms.back() = kOverflowNorm;
      overflowed = true;
      break;
    }
  }

  if (overflowed) {
    res.diverged = true;
    return res;
  }

  // Sustained-growth tests on the recorded norms.
  const std::vector<double>& s = state_norms;
  const std::size_t n = s.size();
  double running_min = s[0];
  for (double v : s) running_min = std::min(running_min, v);

  if (beta == 0.0) {
    // Real modes: the norm is a sum of monotone exponentials, so any rise
    // from the running minimum marks a growing mode.
    res.diverged = s.back() > running_min * (1.0 + 1e-9) && s.back() > 1e-280;
    return res;
  }

  // Momentum: require lag-W growth for W consecutive comparisons so marginal
  // oscillation is not misflagged.
  const std::size_t w = 50;
  bool sustained = false;
  if (n > 2 * w) {
    sustained = true;
    for (std::size_t t = n - w; t < n; ++t) {
      if (!(s[t] > s[t - w] * (1.0 + 1e-12))) {
        sustained = false;
        break;
      }
    }
  }
  const bool gross_growth = s.back() > running_min * 1e6 && s.back() > 1e-280;
  res.diverged = sustained || gross_growth;
  return res;
}

}  // namespace

DynamicsResult gd_simulate(const QuadraticProblem& p, double eta, long long steps) {
  return simulate(p, eta, 0.0, steps);
}

const char* to_string(StabilityClass c) {
  switch (c) {
    case StabilityClass::kStable: return "stable";
    case StabilityClass::kMarginal: return "marginal";
    case StabilityClass::kUnstable: return "unstable";
  }
  return "unknown";
}

StabilityClass stability_predicate(const QuadraticProblem& p, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("stability_predicate: eta must be positive");
  const std::vector<double> amp = amplification_factors(p, eta);
  const double rho = *std::max_element(amp.begin(), amp.end());
  if (std::abs(rho - 1.0) <= 1e-12) return StabilityClass::kMarginal;
  return rho < 1.0 ? StabilityClass::kStable : StabilityClass::kUnstable;
}

DynamicsResult momentum_simulate(const QuadraticProblem& p, double eta, double beta,
                                 long long steps) {
  if (beta < 0.0 || beta >= 1.0)
    throw std::invalid_argument("momentum_simulate: beta must be in [0, 1)");
  return simulate(p, eta, beta, steps);
}

std::optional<double> empirical_threshold_scan(const QuadraticProblem& p,
                                               const std::vector<double>& etas, double beta,
                                               long long steps) {
  if (etas.empty()) throw std::invalid_argument("empirical_threshold_scan: empty grid");
  for (std::size_t i = 1; i < etas.size(); ++i)
    if (!(etas[i] > etas[i - 1]))
      throw std::invalid_argument("empirical_threshold_scan: grid must ascend");

  std::optional<double> best;
  for (double eta : etas) {
    const DynamicsResult r = momentum_simulate(p, eta, beta, steps);
    if (!r.diverged) best = eta;
  }
  return best;
}

}  // namespace curvlab
