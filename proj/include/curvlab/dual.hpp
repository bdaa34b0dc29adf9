// Forward-mode scalar: value plus directional derivative. Running the
// gradient computation on Dual with the parameter tangent set to v yields the
// tangent of the gradient, i.e. the Hessian-vector product.

#pragma once

#include <cmath>

namespace curvlab {

struct Dual {
  double v = 0.0;  // value
  double t = 0.0;  // tangent

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: implicit from double is the point
  Dual(double value, double tangent) : v(value), t(tangent) {}

  Dual& operator+=(const Dual& o) { v += o.v; t += o.t; return *this; }
  Dual& operator-=(const Dual& o) { v -= o.v; t -= o.t; return *this; }
  Dual& operator*=(const Dual& o) { t = t * o.v + v * o.t; v *= o.v; return *this; }
  Dual& operator/=(const Dual& o) {
    const double inv = 1.0 / o.v;
    v *= inv;
    t = (t - v * o.t) * inv;
    return *this;
  }
};

inline Dual operator+(Dual a, const Dual& b) { return a += b; }
inline Dual operator-(Dual a, const Dual& b) { return a -= b; }
inline Dual operator*(Dual a, const Dual& b) { return a *= b; }
inline Dual operator/(Dual a, const Dual& b) { return a /= b; }
inline Dual operator-(const Dual& a) { return {-a.v, -a.t}; }
inline bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
inline bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }

inline Dual tanh(const Dual& x) {
  const double th = std::tanh(x.v);
  return {th, (1.0 - th * th) * x.t};
}

inline Dual exp(const Dual& x) {
  const double e = std::exp(x.v);
  return {e, e * x.t};
}

inline Dual log(const Dual& x) { return {std::log(x.v), x.t / x.v}; }

inline Dual sqrt(const Dual& x) {
  const double s = std::sqrt(x.v);
  return {s, 0.5 * x.t / s};
}

// ReLU convention: subgradient 0 at exactly 0.
inline Dual relu(const Dual& x) { return x.v > 0.0 ? x : Dual{0.0, 0.0}; }
inline double relu(double x) { return x > 0.0 ? x : 0.0; }

inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.v; }
inline double tangent_of(double) { return 0.0; }
inline double tangent_of(const Dual& x) { return x.t; }

using std::exp;
using std::log;
using std::sqrt;
using std::tanh;

}  // namespace curvlab
