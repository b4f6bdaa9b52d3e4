#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

#include "holofield/angular_spectrum.hpp"
#include "holofield/config.hpp"
#include "holofield/grid.hpp"
#include "holofield/map_codec.hpp"

namespace holofield {

/// How the in-focus depth of a particle is recognised in a slice stack.
enum class FocusMetric {
  // Maximum flatness (mean / standard deviation) of the back-propagated
  // fluctuation modulus over the particle blob. Suits the additive particle
  // term, whose in-focus image is a uniform disk. Needs SliceStack::fluctuation.
  fluctuation_flatness,
  // Darkest local mean amplitude, for opaque particles that cast a shadow.
  min_amplitude,
};

struct FocusOptions {
  FocusMetric metric = FocusMetric::fluctuation_flatness;
  // Candidate peaks must deviate from the background by this fraction of it.
  double peak_fraction = 0.08;
  // Candidates closer than this are merged, keeping the stronger one.
  long suppression_px = 8;
  // Half width of the square window searched around a candidate.
  long window_half = 20;
  // Half width of the window averaged by the min_amplitude metric.
  long mean_half = 2;
  // fluctuation_flatness only scores slices whose blob mean reaches this
  // fraction of the strongest blob mean seen for the candidate.
  double min_mean_fraction = 0.5;
};

namespace detail {

struct Blob {
  std::vector<std::size_t> pixels;  // row * cols + col
  double mean = 0.0;
  double stddev = 0.0;
  double row_centroid = 0.0;
  double col_centroid = 0.0;
};

/// 4-connected region grown from `seed` over pixels where keep(value) holds,
/// restricted to the window [r0, r1] x [c0, c1].
template <class Keep>
Blob grow_blob(const Grid<float>& img, std::size_t seed_r, std::size_t seed_c, long r0, long r1,
               long c0, long c1, Keep keep, std::vector<char>& visited) {
  Blob blob;
  const std::size_t cols = img.cols();
  const long wc = c1 - c0 + 1;
  auto local = [&](long r, long c) { return static_cast<std::size_t>((r - r0) * wc + (c - c0)); };
  std::fill(visited.begin(), visited.end(), 0);
  std::vector<std::pair<long, long>> stack{{static_cast<long>(seed_r), static_cast<long>(seed_c)}};
  visited[local(stack[0].first, stack[0].second)] = 1;
  double sum = 0.0, sum2 = 0.0, sr = 0.0, sc = 0.0;
  while (!stack.empty()) {
    const auto [r, c] = stack.back();
    stack.pop_back();
    const double v = img(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    blob.pixels.push_back(static_cast<std::size_t>(r) * cols + static_cast<std::size_t>(c));
    sum += v;
    sum2 += v * v;
    sr += static_cast<double>(r);
    sc += static_cast<double>(c);
    constexpr long dr[] = {-1, 1, 0, 0};
    constexpr long dc[] = {0, 0, -1, 1};
    for (int k = 0; k < 4; ++k) {
      const long nr = r + dr[k];
      const long nc = c + dc[k];
      if (nr < r0 || nr > r1 || nc < c0 || nc > c1) continue;
      char& seen = visited[local(nr, nc)];
      if (seen) continue;
      seen = 1;
      if (keep(img(static_cast<std::size_t>(nr), static_cast<std::size_t>(nc)))) {
        stack.emplace_back(nr, nc);
      }
    }
  }
  const double n = static_cast<double>(blob.pixels.size());
  blob.mean = sum / n;
  blob.stddev = std::sqrt(std::max(0.0, sum2 / n - blob.mean * blob.mean));
  blob.row_centroid = sr / n;
  blob.col_centroid = sc / n;
  return blob;
}

/// Local extrema of `score` (higher is stronger) above `threshold`, merged
/// greedily within `radius`, strongest first.
inline std::vector<std::pair<long, long>> peak_candidates(const Grid<float>& score, double threshold,
                                                          long radius) {
  const long rows = static_cast<long>(score.rows());
  const long cols = static_cast<long>(score.cols());
  struct Peak {
    float value;
    long r, c;
  };
  std::vector<Peak> peaks;
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      const float v = score(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
      if (!(v >= threshold)) continue;
      bool is_max = true;
      for (long dr = -1; dr <= 1 && is_max; ++dr) {
        for (long dc = -1; dc <= 1; ++dc) {
          const long nr = r + dr, nc = c + dc;
          if ((dr == 0 && dc == 0) || nr < 0 || nc < 0 || nr >= rows || nc >= cols) continue;
          const float nv = score(static_cast<std::size_t>(nr), static_cast<std::size_t>(nc));
          // ties resolved toward the earlier raster position
          if (nv > v || (nv == v && (nr < r || (nr == r && nc < c)))) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) peaks.push_back({v, r, c});
    }
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const Peak& a, const Peak& b) { return a.value > b.value; });
  std::vector<std::pair<long, long>> kept;
  const double r2 = static_cast<double>(radius) * static_cast<double>(radius);
  for (const auto& p : peaks) {
    bool clear = true;
    for (const auto& [kr, kc] : kept) {
      const double dr = static_cast<double>(p.r - kr), dc = static_cast<double>(p.c - kc);
      if (dr * dr + dc * dc <= r2) {
        clear = false;
        break;
      }
    }
    if (clear) kept.emplace_back(p.r, p.c);
  }
  return kept;
}

inline Grid<float> box3(const Grid<float>& img) {
  const long rows = static_cast<long>(img.rows());
  const long cols = static_cast<long>(img.cols());
  Grid<float> out(img.rows(), img.cols());
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      double s = 0.0;
      int cnt = 0;
      for (long dr = -1; dr <= 1; ++dr) {
        for (long dc = -1; dc <= 1; ++dc) {
          const long nr = r + dr, nc = c + dc;
          if (nr < 0 || nc < 0 || nr >= rows || nc >= cols) continue;
          s += img(static_cast<std::size_t>(nr), static_cast<std::size_t>(nc));
          ++cnt;
        }
      }
      out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = static_cast<float>(s / cnt);
    }
  }
  return out;
}

inline ParticleEstimate make_estimate(double row, double col, double z, double radius_m,
                                      const OpticalConfig& config) {
  ParticleEstimate e;
  e.px = std::lround(col);
  e.py = std::lround(row);
  e.z_m = std::clamp(z, config.z_min, config.z_max);
  const double size = std::clamp(config.size_of(radius_m), config.size_min, config.size_max);
  e.r_m = config.radius_of(size);
  e.axial_gray = axial_to_gray(e.z_m, config);
  e.size_gray = size_to_gray(size, config);
  return e;
}

struct Window {
  long r0, r1, c0, c1;
};

inline Window window_around(long r, long c, long half, std::size_t rows, std::size_t cols) {
  return {std::max(0L, r - half), std::min(static_cast<long>(rows) - 1, r + half),
          std::max(0L, c - half), std::min(static_cast<long>(cols) - 1, c + half)};
}

/// Brightest pixel of `img` within `radius` of (r, c).
inline std::pair<long, long> brightest_near(const Grid<float>& img, long r, long c, long radius) {
  const Window w = window_around(r, c, radius, img.rows(), img.cols());
  std::pair<long, long> best{r, c};
  float best_v = -std::numeric_limits<float>::infinity();
  for (long rr = w.r0; rr <= w.r1; ++rr) {
    for (long cc = w.c0; cc <= w.c1; ++cc) {
      const float v = img(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc));
      if (v > best_v) {
        best_v = v;
        best = {rr, cc};
      }
    }
  }
  return best;
}

inline std::vector<ParticleEstimate> detect_flatness(const SliceStack& stack,
                                                     const OpticalConfig& config,
                                                     const FocusOptions& opt) {
  if (stack.fluctuation.size() != stack.size()) {
    throw Error(ErrorKind::validation,
                "detect_particles_focus: fluctuation_flatness needs fluctuation slices");
  }
  const std::size_t rows = stack.fluctuation.front().rows();
  const std::size_t cols = stack.fluctuation.front().cols();
  Grid<float> proj(rows, cols, 0.0f);
  for (const auto& s : stack.fluctuation) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      proj.values()[i] = std::max(proj.values()[i], s.values()[i]);
    }
  }
  const double threshold = opt.peak_fraction * stack.background;
  if (!(threshold > 0.0)) return {};
  const auto candidates = peak_candidates(box3(proj), threshold, opt.suppression_px);

  std::vector<ParticleEstimate> out;
  const long side = 2 * opt.window_half + 1;
  std::vector<char> visited(static_cast<std::size_t>(side * side));
  for (const auto& [cr, cc] : candidates) {
    const Window w = window_around(cr, cc, opt.window_half, rows, cols);
    std::vector<Blob> blobs(stack.size());
    double strongest = 0.0;
    for (std::size_t k = 0; k < stack.size(); ++k) {
      const Grid<float>& s = stack.fluctuation[k];
      const auto [sr, sc] = brightest_near(s, cr, cc, 2);
      const float peak = s(static_cast<std::size_t>(sr), static_cast<std::size_t>(sc));
      if (!(peak > 0.0f)) continue;
      const float half = 0.5f * peak;
      blobs[k] = grow_blob(s, static_cast<std::size_t>(sr), static_cast<std::size_t>(sc), w.r0,
                           w.r1, w.c0, w.c1, [half](float v) { return v > half; }, visited);
      if (blobs[k].pixels.size() >= 3) strongest = std::max(strongest, blobs[k].mean);
    }
    double best_score = -1.0;
    std::size_t best_k = 0;
    for (std::size_t k = 0; k < stack.size(); ++k) {
      const Blob& blob = blobs[k];
      if (blob.pixels.size() < 3 || blob.mean < opt.min_mean_fraction * strongest) continue;
      const double score = blob.stddev > 0.0 ? blob.mean / blob.stddev
                                             : std::numeric_limits<double>::max();
      if (score > best_score) {
        best_score = score;
        best_k = k;
      }
    }
    if (best_score < 0.0) continue;
    const Blob& best_blob = blobs[best_k];
    const double area = static_cast<double>(best_blob.pixels.size());
    const double radius = std::sqrt(area / std::numbers::pi) * config.pixel_pitch;
    out.push_back(make_estimate(best_blob.row_centroid, best_blob.col_centroid,
                                stack.z_values[best_k], radius, config));
  }
  return out;
}

inline std::vector<ParticleEstimate> detect_min_amplitude(const SliceStack& stack,
                                                          const OpticalConfig& config,
                                                          const FocusOptions& opt) {
  if (stack.amplitude.size() != stack.size()) {
    throw Error(ErrorKind::validation, "detect_particles_focus: min_amplitude needs amplitude slices");
  }
  const std::size_t rows = stack.amplitude.front().rows();
  const std::size_t cols = stack.amplitude.front().cols();
  const double bg = stack.background;
  // Darkness = background - amplitude, maximised over depth.
  Grid<float> dark(rows, cols, -std::numeric_limits<float>::infinity());
  for (const auto& s : stack.amplitude) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      dark.values()[i] = std::max(dark.values()[i], static_cast<float>(bg - s.values()[i]));
    }
  }
  const double threshold = opt.peak_fraction * bg;
  if (!(threshold > 0.0)) return {};
  const auto candidates = peak_candidates(box3(dark), threshold, opt.suppression_px);

  std::vector<ParticleEstimate> out;
  const long side = 2 * opt.window_half + 1;
  std::vector<char> visited(static_cast<std::size_t>(side * side));
  for (const auto& [cr, cc] : candidates) {
    const Window m = window_around(cr, cc, opt.mean_half, rows, cols);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_k = 0;
    for (std::size_t k = 0; k < stack.size(); ++k) {
      double s = 0.0;
      int n = 0;
      for (long r = m.r0; r <= m.r1; ++r) {
        for (long c = m.c0; c <= m.c1; ++c) {
          s += stack.amplitude[k](static_cast<std::size_t>(r), static_cast<std::size_t>(c));
          ++n;
        }
      }
      if (s / n < best) {
        best = s / n;
        best_k = k;
      }
    }
    const Grid<float>& focus = stack.amplitude[best_k];
    Grid<float> depth(rows, cols);
    for (std::size_t i = 0; i < focus.size(); ++i) {
      depth.values()[i] = static_cast<float>(bg - focus.values()[i]);
    }
    const auto [sr, sc] = brightest_near(depth, cr, cc, 2);
    const float half = 0.5f * depth(static_cast<std::size_t>(sr), static_cast<std::size_t>(sc));
    const Window w = window_around(cr, cc, opt.window_half, rows, cols);
    const Blob blob = grow_blob(depth, static_cast<std::size_t>(sr), static_cast<std::size_t>(sc),
                                w.r0, w.r1, w.c0, w.c1, [half](float v) { return v > half; },
                                visited);
    const double radius =
        std::sqrt(static_cast<double>(blob.pixels.size()) / std::numbers::pi) * config.pixel_pitch;
    out.push_back(make_estimate(blob.row_centroid, blob.col_centroid, stack.z_values[best_k],
                                radius, config));
  }
  return out;
}

}  // namespace detail

/// Conventional particle detection on a reconstructed volume: lateral
/// candidates from the depth projection of the focus signal, depth from the
/// chosen focus metric, size from the equivalent-area radius of the in-focus
/// blob at half maximum.
inline std::vector<ParticleEstimate> detect_particles_focus(const SliceStack& stack,
                                                            const OpticalConfig& config,
                                                            const FocusOptions& options = {}) {
  if (stack.size() == 0) throw Error(ErrorKind::validation, "detect_particles_focus: empty stack");
  switch (options.metric) {
    case FocusMetric::fluctuation_flatness: return detail::detect_flatness(stack, config, options);
    case FocusMetric::min_amplitude: return detail::detect_min_amplitude(stack, config, options);
  }
  return {};
}

}  // namespace holofield
