#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "holofield/hologram.hpp"

namespace testing_fields {

/// Random superposition of plane waves with spatial frequency below
/// `fmax_fraction` of Nyquist, under a centered Gaussian envelope of width n/16.
inline holofield::ComplexField band_limited_field(std::size_t n, double pitch, std::uint64_t seed,
                                                  double fmax_fraction = 0.2, int waves = 24) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double fmax = fmax_fraction / (2.0 * pitch);
  struct Wave {
    double fx, fy, amp, phase;
  };
  std::vector<Wave> w(waves);
  for (auto& v : w) {
    const double f = fmax * std::sqrt(u(rng));
    const double a = 2 * std::numbers::pi * u(rng);
    v = {f * std::cos(a), f * std::sin(a), 0.5 + u(rng), 2 * std::numbers::pi * u(rng)};
  }
  const double sigma = static_cast<double>(n) / 16.0 * pitch;
  const double c = 0.5 * static_cast<double>(n) * pitch;
  holofield::ComplexField field(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    const double y = (static_cast<double>(r) + 0.5) * pitch;
    for (std::size_t col = 0; col < n; ++col) {
      const double x = (static_cast<double>(col) + 0.5) * pitch;
      std::complex<double> s;
      for (const auto& v : w) {
        s += v.amp * std::polar(1.0, 2 * std::numbers::pi * (v.fx * x + v.fy * y) + v.phase);
      }
      const double env = std::exp(-((x - c) * (x - c) + (y - c) * (y - c)) / (2 * sigma * sigma));
      field(r, col) = env * s;
    }
  }
  return field;
}

inline double power(const holofield::ComplexField& f) {
  double s = 0;
  for (const auto& v : f.values()) s += std::norm(v);
  return s;
}

inline double max_abs(const holofield::ComplexField& f) {
  double m = 0;
  for (const auto& v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

inline double max_rel_diff(const holofield::ComplexField& a, const holofield::ComplexField& b) {
  double d = 0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a.values()[k] - b.values()[k]));
  return d / max_abs(b);
}

}  // namespace testing_fields
