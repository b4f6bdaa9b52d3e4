#pragma once

#include <cmath>
#include <numbers>

namespace holofield {

namespace detail {

inline double j1_series(double x) {
  const double h = 0.5 * x;
  const double h2 = h * h;
  double term = h;
  double sum = h;
  for (int k = 1; k < 60; ++k) {
    term *= -h2 / (static_cast<double>(k) * static_cast<double>(k + 1));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// Miller backward recurrence normalized by J0 + 2*sum(J_2k) = 1. Takes x > 0.
inline double j1_miller(double x) {
  int start = static_cast<int>(1.5 * x) + 40;
  start += start & 1;
  double next = 0.0;  // J_{k+1}
  double cur = 1.0;   // J_k, arbitrary scale
  double even_sum = 0.0;
  double j1 = 0.0;
  for (int k = start; k >= 1; --k) {
    const double prev = (2.0 * k / x) * cur - next;  // J_{k-1}
    next = cur;
    cur = prev;
    if (std::abs(cur) > 1e250) {
      cur *= 1e-250;
      next *= 1e-250;
      even_sum *= 1e-250;
      j1 *= 1e-250;
    }
    const int idx = k - 1;
    if (idx == 1) j1 = cur;
    if (idx > 0 && idx % 2 == 0) even_sum += cur;
  }
  return j1 / (cur + 2.0 * even_sum);
}

// Hankel asymptotic expansion; accurate to rounding for x >= 25.
inline double j1_asymptotic(double x) {
  constexpr double mu = 4.0;  // 4 * order^2
  double p = 1.0;
  double q = 0.0;
  double a = 1.0;
  double last = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    a *= (mu - odd * odd) / (8.0 * k * x);
    const double mag = std::abs(a);
    if (mag > last) break;  // series started diverging
    last = mag;
    // k odd contributes to Q, k even to P; signs alternate in pairs.
    const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    if (k % 2 == 1) q += sign * a;
    else p += sign * a;
    if (mag < 1e-18) break;
  }
  const double s = std::sin(x);
  const double c = std::cos(x);
  // chi = x - 3*pi/4
  const double cos_chi = (s - c) * std::numbers::sqrt2 * 0.5;
  const double sin_chi = -(s + c) * std::numbers::sqrt2 * 0.5;
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * cos_chi - q * sin_chi);
}

}  // namespace detail

/// First-order Bessel function of the first kind.
inline double bessel_j1(double x) {
  const double ax = std::abs(x);
  double v;
  if (ax < 8.0) v = detail::j1_series(ax);
  else if (ax < 25.0) v = detail::j1_miller(ax);
  else v = detail::j1_asymptotic(ax);
  return x < 0.0 ? -v : v;
}

}  // namespace holofield
