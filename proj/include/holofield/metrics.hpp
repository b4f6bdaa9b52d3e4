#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "json.hpp"

#include "holofield/config.hpp"
#include "holofield/error.hpp"
#include "holofield/hologram.hpp"
#include "holofield/map_codec.hpp"

namespace holofield {

struct MatchPair {
  std::size_t truth = 0;
  std::size_t estimate = 0;
  double distance = 0.0;  // lateral, pixels
  friend bool operator==(const MatchPair&, const MatchPair&) = default;
};

struct MatchResult {
  std::vector<MatchPair> pairs;  // sorted by truth index
  std::vector<std::size_t> unmatched_truth;
  std::vector<std::size_t> unmatched_estimates;

  double total_distance() const {
    double s = 0.0;
    for (const auto& p : pairs) s += p.distance;
    return s;
  }
};

inline double lateral_distance(const ParticleEstimate& a, const ParticleEstimate& b) {
  return std::hypot(static_cast<double>(a.px - b.px), static_cast<double>(a.py - b.py));
}

namespace detail {

/// Min-cost perfect assignment on a square matrix (shortest augmenting path
/// with potentials). Returns row -> column.
inline std::vector<std::size_t> hungarian(const std::vector<double>& cost, std::size_t n) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace detail

/// One-to-one matching of estimates to truth by lateral pixel distance.
/// Only pairs with distance <= gate may match. Among all gated assignments,
/// the number of pairs is maximised first and the total distance minimised
/// second.
inline MatchResult match_particles(const std::vector<ParticleEstimate>& truth,
                                   const std::vector<ParticleEstimate>& estimates,
                                   double gate = 5.0) {
  if (!(gate > 0.0)) throw Error(ErrorKind::validation, "match_particles: gate must be positive");
  const std::size_t nt = truth.size();
  const std::size_t ne = estimates.size();
  const std::size_t n = std::max(nt, ne);
  MatchResult result;
  if (n == 0) return result;
  // Any pair costs at most `gate`; a blocked slot costs more than n real pairs.
  const double blocked = gate * static_cast<double>(n + 1) + 1.0;
  std::vector<double> cost(n * n, blocked);
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t j = 0; j < ne; ++j) {
      const double d = lateral_distance(truth[i], estimates[j]);
      if (d <= gate) cost[i * n + j] = d;
    }
  }
  const auto assign = detail::hungarian(cost, n);
  std::vector<char> est_used(ne, 0);
  for (std::size_t i = 0; i < nt; ++i) {
    const std::size_t j = assign[i];
    if (j < ne && cost[i * n + j] < blocked) {
      result.pairs.push_back({i, j, cost[i * n + j]});
      est_used[j] = 1;
    } else {
      result.unmatched_truth.push_back(i);
    }
  }
  for (std::size_t j = 0; j < ne; ++j) {
    if (!est_used[j]) result.unmatched_estimates.push_back(j);
  }
  return result;
}

struct ErrorReport {
  double lateral_err_gray = 0.0;  // pixels
  double axial_err_gray = 0.0;
  double size_err_gray = 0.0;
  double lateral_err_m = 0.0;
  double axial_err_m = 0.0;
  double size_err_m = 0.0;
  std::size_t matched = 0;
  std::size_t misses = 0;
  std::size_t false_positives = 0;
};

/// Mean absolute errors over matched pairs. With no pairs only the counts
/// are meaningful and the error fields stay zero.
inline ErrorReport compute_errors(const MatchResult& match,
                                  const std::vector<ParticleEstimate>& truth,
                                  const std::vector<ParticleEstimate>& estimates,
                                  const OpticalConfig& config) {
  ErrorReport r;
  r.matched = match.pairs.size();
  r.misses = match.unmatched_truth.size();
  r.false_positives = match.unmatched_estimates.size();
  if (match.pairs.empty()) return r;
  for (const auto& p : match.pairs) {
    if (p.truth >= truth.size() || p.estimate >= estimates.size()) {
      throw Error(ErrorKind::validation, "compute_errors: match refers to a missing particle");
    }
    const auto& a = truth[p.truth];
    const auto& b = estimates[p.estimate];
    r.lateral_err_gray += lateral_distance(a, b);
    r.axial_err_gray += std::abs(a.axial_gray - b.axial_gray);
    r.size_err_gray += std::abs(a.size_gray - b.size_gray);
  }
  const double n = static_cast<double>(match.pairs.size());
  r.lateral_err_gray /= n;
  r.axial_err_gray /= n;
  r.size_err_gray /= n;
  r.lateral_err_m = r.lateral_err_gray * config.pixel_pitch;
  r.axial_err_m = r.axial_err_gray * config.axial_step();
  r.size_err_m = r.size_err_gray * config.size_step();
  return r;
}

inline nlohmann::json to_json(const ErrorReport& r) {
  return {{"lateral_err_gray", r.lateral_err_gray},
          {"axial_err_gray", r.axial_err_gray},
          {"size_err_gray", r.size_err_gray},
          {"lateral_err_m", r.lateral_err_m},
          {"axial_err_m", r.axial_err_m},
          {"size_err_m", r.size_err_m},
          {"matched", r.matched},
          {"misses", r.misses},
          {"false_positives", r.false_positives}};
}

/// Plain-text table: Lateral / Axial / Size in gray units, then physical units.
inline std::string error_table(const ErrorReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%-10s %10s %10s %10s\n"
                "%-10s %10.4f %10.4f %10.4f\n"
                "%-10s %10.4f %10.4f %10.4f\n"
                "matched %zu  misses %zu  false positives %zu\n",
                "", "Lateral", "Axial", "Size", "gray", r.lateral_err_gray, r.axial_err_gray,
                r.size_err_gray, "um/mm/um", r.lateral_err_m * 1e6, r.axial_err_m * 1e3,
                r.size_err_m * 1e6, r.matched, r.misses, r.false_positives);
  return buf;
}

struct ResolutionReport {
  double reference_z = 0.0;        // m
  double spread_radius = 0.0;      // R at reference_z, m
  double numerical_aperture = 0.0;
  double axial_resolution = 0.0;   // delta z, m
  double axial_step = 0.0;         // m per gray level
  double size_step = 0.0;          // m per gray level
};

/// Depth resolution limited by the aliasing-bound aperture:
///   NA = R / sqrt(z^2 + R^2), delta_z = lambda / (1.4 NA^2),
/// evaluated at the middle of the axial range (NA does not depend on z).
inline ResolutionReport axial_resolution_theory(const OpticalConfig& config) {
  validate(config);
  ResolutionReport r;
  r.reference_z = 0.5 * (config.z_min + config.z_max);
  r.spread_radius = aliasing_radius(r.reference_z, config);
  r.numerical_aperture =
      r.spread_radius / std::sqrt(r.reference_z * r.reference_z + r.spread_radius * r.spread_radius);
  r.axial_resolution = config.wavelength / (1.4 * r.numerical_aperture * r.numerical_aperture);
  r.axial_step = config.axial_step();
  r.size_step = config.size_step();
  return r;
}

inline nlohmann::json to_json(const ResolutionReport& r) {
  return {{"reference_z_m", r.reference_z},
          {"spread_radius_m", r.spread_radius},
          {"numerical_aperture", r.numerical_aperture},
          {"axial_resolution_m", r.axial_resolution},
          {"axial_step_m", r.axial_step},
          {"size_step_m", r.size_step}};
}

}  // namespace holofield
