#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

// Scalar core of the row-wise Bernoulli-Gaussian MMV denoiser
//
//   eta(r) = r * s(u),   u = r^H r,
//   s      = 1 / (pi * (1 + exp(psi - u / (2 sigma^2 pi)))),
//   pi     = 1 + sigma^2 / theta1,
//   psi    = K log(1 + theta1 / sigma^2) + theta2.
//
// Written once as a template so the same expression yields values (double)
// and exact partial derivatives (Dual) for the tape's fused backward rules.
namespace mmv::shrink {

inline constexpr double kExpClamp = 60.0;
inline constexpr double kSigmaFloor = 1e-12;

// Forward-mode dual number with N tangent directions.
template <std::size_t N>
struct Dual {
  double v = 0.0;
  std::array<double, N> d{};

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: implicit constant lift
  static Dual seed(double value, std::size_t dir) {
    Dual x(value);
    x.d[dir] = 1.0;
    return x;
  }
};

template <std::size_t N>
Dual<N> operator+(const Dual<N>& a, const Dual<N>& b) {
  Dual<N> r(a.v + b.v);
  for (std::size_t i = 0; i < N; ++i) r.d[i] = a.d[i] + b.d[i];
  return r;
}
template <std::size_t N>
Dual<N> operator-(const Dual<N>& a, const Dual<N>& b) {
  Dual<N> r(a.v - b.v);
  for (std::size_t i = 0; i < N; ++i) r.d[i] = a.d[i] - b.d[i];
  return r;
}
template <std::size_t N>
Dual<N> operator*(const Dual<N>& a, const Dual<N>& b) {
  Dual<N> r(a.v * b.v);
  for (std::size_t i = 0; i < N; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
  return r;
}
template <std::size_t N>
Dual<N> operator/(const Dual<N>& a, const Dual<N>& b) {
  Dual<N> r(a.v / b.v);
  const double inv = 1.0 / (b.v * b.v);
  for (std::size_t i = 0; i < N; ++i) r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) * inv;
  return r;
}
template <std::size_t N>
Dual<N> exp(const Dual<N>& a) {
  Dual<N> r(std::exp(a.v));
  for (std::size_t i = 0; i < N; ++i) r.d[i] = r.v * a.d[i];
  return r;
}
template <std::size_t N>
Dual<N> log(const Dual<N>& a) {
  Dual<N> r(std::log(a.v));
  for (std::size_t i = 0; i < N; ++i) r.d[i] = a.d[i] / a.v;
  return r;
}

inline double value_of(double x) { return x; }
template <std::size_t N>
double value_of(const Dual<N>& x) {
  return x.v;
}

// max(x, lo) with zero derivative on the floor.
template <class T>
T floor_at(const T& x, double lo) {
  return value_of(x) < lo ? T(lo) : x;
}

template <class T>
struct RowGain {
  T s;      // shrinkage gain
  T ds_du;  // derivative of the gain w.r.t. the row energy u
  bool clamped = false;
};

template <class T>
RowGain<T> row_gain(const T& u, const T& sigma_in, const T& theta1, const T& theta2, double k) {
  using std::exp;
  using std::log;
  const T sigma = floor_at(sigma_in, kSigmaFloor);
  const T s2 = sigma * sigma;
  const T pi = T(1.0) + s2 / theta1;
  const T psi = T(k) * log(T(1.0) + theta1 / s2) + theta2;
  const T scale = T(1.0) / (T(2.0) * s2 * pi);
  T z = psi - u * scale;
  bool clamped = false;
  if (value_of(z) > kExpClamp) {
    z = T(kExpClamp);
    clamped = true;
  } else if (value_of(z) < -kExpClamp) {
    z = T(-kExpClamp);
    clamped = true;
  }
  const T e = exp(z);
  const T one_plus = T(1.0) + e;
  const T s = T(1.0) / (pi * one_plus);
  // ds/dz = -s e / (1 + e); dz/du = -scale.
  const T ds_du = clamped ? T(0.0) : s * e / one_plus * scale;
  return {s, ds_du, clamped};
}

// Per-row contribution to the Onsager divergence: trace of the K x K
// Jacobian of eta at the row, divided by K.
template <class T>
T row_divergence(const T& u, const T& sigma, const T& theta1, const T& theta2, double k) {
  const RowGain<T> g = row_gain(u, sigma, theta1, theta2, k);
  return g.s + g.ds_du * u / T(k);
}

}  // namespace mmv::shrink
