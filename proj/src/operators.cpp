#include "curvlab/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace curvlab {

SymmetricOperator dense_operator(const MatrixD& a) {
  if (a.rows != a.cols) throw std::invalid_argument("dense_operator: matrix not square");
  return SymmetricOperator{
      a.rows, [a](const std::vector<double>& v) {
        if (v.size() != a.rows) throw std::invalid_argument("dense_operator: dim mismatch");
        std::vector<double> out(a.rows);
        const bool par = a.rows * a.cols > kernels::kOmpGrain;
#pragma omp parallel for schedule(static) if (par)
        for (long long ii = 0; ii < static_cast<long long>(a.rows); ++ii) {
          const std::size_t i = static_cast<std::size_t>(ii);
          const double* row = a.row(i);
          double acc = 0.0;
          for (std::size_t j = 0; j < a.cols; ++j) acc += row[j] * v[j];
          out[i] = acc;
        }
        return out;
      }};
}

SymmetricOperator diagonal_operator(const std::vector<double>& d) {
  return SymmetricOperator{d.size(), [d](const std::vector<double>& v) {
                             if (v.size() != d.size())
                               throw std::invalid_argument("diagonal_operator: dim mismatch");
                             std::vector<double> out(d.size());
                             for (std::size_t i = 0; i < d.size(); ++i) out[i] = d[i] * v[i];
                             return out;
                           }};
}

double symmetry_defect(const SymmetricOperator& op, SeededRng& rng, int probes) {
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    const std::vector<double> u = rng.normal_vector(op.dim);
    const std::vector<double> v = rng.normal_vector(op.dim);
    const std::vector<double> av = op.apply(v);
    const std::vector<double> au = op.apply(u);
    const double uav = kernels::dot(u, av);
    const double auv = kernels::dot(au, v);
    const double defect = std::abs(uav - auv) / (std::abs(uav) + std::abs(auv) + 1e-300);
    if (defect > worst) worst = defect;
  }
  return worst;
}

}  // namespace curvlab
