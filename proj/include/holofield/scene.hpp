#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "holofield/config.hpp"
#include "holofield/error.hpp"
#include "holofield/random.hpp"
#include "json.hpp"

namespace holofield {

/// Ground-truth particle. Lateral coordinates are measured from the top-left
/// corner of the hologram (x along columns, y along rows); z is the distance
/// from the hologram plane; r is the radius entering the diffraction kernel.
struct Particle {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double r = 0.0;

  friend bool operator==(const Particle&, const Particle&) = default;
};

struct ParticleScene {
  std::vector<Particle> particles;
  std::optional<std::uint64_t> seed;

  std::size_t size() const noexcept { return particles.size(); }
  friend bool operator==(const ParticleScene&, const ParticleScene&) = default;
};

/// Label-square half width: particles are drawn as 5x5 squares.
inline constexpr long kSquareHalf = 2;
inline constexpr long kSquareWidth = 2 * kSquareHalf + 1;
inline constexpr double kMinSeparationPx = 6.0;

/// Pixel (column or row) index containing a physical coordinate. Pixel m spans
/// [m*p, (m+1)*p) and is sampled at its center (m+0.5)*p.
inline long pixel_index(double coord, double pitch) {
  return static_cast<long>(std::floor(coord / pitch));
}

struct PixelPos {
  long col = 0;
  long row = 0;
  friend bool operator==(const PixelPos&, const PixelPos&) = default;
};

inline PixelPos pixel_of(const Particle& p, const OpticalConfig& c) {
  return {pixel_index(p.x, c.pixel_pitch), pixel_index(p.y, c.pixel_pitch)};
}

inline double pixel_distance(PixelPos a, PixelPos b) {
  return std::hypot(static_cast<double>(a.col - b.col), static_cast<double>(a.row - b.row));
}

struct SceneOptions {
  // Particle pixel centers stay at least this far from every border.
  long margin_px = kSquareHalf;
  double min_separation_px = kMinSeparationPx;
  int max_attempts_per_particle = 10000;
};

/// Random scene: lateral position uniform over the region allowed by the
/// margin, z uniform over [z_min, z_max], size uniform over [size_min, size_max].
/// Pure function of (config, count, seed, options).
inline ParticleScene generate_scene(const OpticalConfig& config, std::size_t count,
                                    std::uint64_t seed, const SceneOptions& options = {}) {
  validate(config);
  if (count == 0) throw Error(ErrorKind::validation, "generate_scene: count must be >= 1");
  const auto n = static_cast<long>(config.grid_size);
  if (options.margin_px < kSquareHalf || 2 * options.margin_px >= n) {
    throw Error(ErrorKind::validation, "generate_scene: margin leaves no valid lateral region");
  }
  const double p = config.pixel_pitch;
  const double lo = static_cast<double>(options.margin_px) * p;
  const double hi = static_cast<double>(n - options.margin_px) * p;

  std::mt19937_64 rng(seed);
  ParticleScene scene;
  scene.seed = seed;
  scene.particles.reserve(count);
  std::vector<PixelPos> placed;
  placed.reserve(count);

  for (std::size_t i = 0; i < count; ++i) {
    bool ok = false;
    for (int attempt = 0; attempt < options.max_attempts_per_particle && !ok; ++attempt) {
      Particle cand;
      cand.x = uniform(rng, lo, hi);
      cand.y = uniform(rng, lo, hi);
      const PixelPos pos = pixel_of(cand, config);
      // Rounding at the upper edge can land exactly on hi.
      if (pos.col >= n - options.margin_px || pos.row >= n - options.margin_px) continue;
      bool clear = true;
      for (const auto& other : placed) {
        if (pixel_distance(pos, other) < options.min_separation_px) {
          clear = false;
          break;
        }
      }
      if (!clear) continue;
      cand.z = uniform(rng, config.z_min, config.z_max);
      cand.r = config.radius_of(uniform(rng, config.size_min, config.size_max));
      scene.particles.push_back(cand);
      placed.push_back(pos);
      ok = true;
    }
    if (!ok) {
      throw Error(ErrorKind::placement,
                  "generate_scene: could not place particle " + std::to_string(i) + " of " +
                      std::to_string(count) + " within " +
                      std::to_string(options.max_attempts_per_particle) + " attempts");
    }
  }
  return scene;
}

enum class ViolationKind { axial_range, size_range, lateral_margin, separation };

struct Violation {
  ViolationKind kind;
  std::size_t first = 0;
  std::size_t second = 0;  // only meaningful for separation
  std::string message;
};

using ValidationReport = std::vector<Violation>;

/// Lists every invariant violation; empty iff the scene is valid.
inline ValidationReport scene_bounds_check(const ParticleScene& scene, const OpticalConfig& config,
                                           long margin_px = kSquareHalf,
                                           double min_separation_px = kMinSeparationPx) {
  ValidationReport report;
  const auto n = static_cast<long>(config.grid_size);
  std::vector<PixelPos> pos;
  pos.reserve(scene.size());
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const Particle& p = scene.particles[i];
    const std::string tag = "particle " + std::to_string(i) + ": ";
    if (!(p.z >= config.z_min && p.z <= config.z_max)) {
      report.push_back({ViolationKind::axial_range, i, i, tag + "z outside [z_min, z_max]"});
    }
    const double s = config.size_of(p.r);
    if (!(s >= config.size_min && s <= config.size_max)) {
      report.push_back({ViolationKind::size_range, i, i, tag + "size outside [size_min, size_max]"});
    }
    const PixelPos px = pixel_of(p, config);
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || px.col < margin_px || px.row < margin_px ||
        px.col > n - 1 - margin_px || px.row > n - 1 - margin_px) {
      report.push_back({ViolationKind::lateral_margin, i, i, tag + "label square does not fit"});
    }
    pos.push_back(px);
  }
  for (std::size_t i = 0; i < pos.size(); ++i) {
    for (std::size_t j = i + 1; j < pos.size(); ++j) {
      if (pixel_distance(pos[i], pos[j]) < min_separation_px) {
        report.push_back({ViolationKind::separation, i, j,
                          "particles " + std::to_string(i) + " and " + std::to_string(j) +
                              " closer than minimum separation"});
      }
    }
  }
  return report;
}

// Scene files: one JSON object per line with x_m, y_m, z_m, r_m.

inline void write_scene(std::ostream& out, const ParticleScene& scene) {
  for (const auto& p : scene.particles) {
    out << nlohmann::json{{"x_m", p.x}, {"y_m", p.y}, {"z_m", p.z}, {"r_m", p.r}}.dump() << '\n';
  }
}

inline void save_scene(const std::filesystem::path& path, const ParticleScene& scene) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write scene file " + path.string());
  write_scene(out, scene);
  if (!out) throw Error(ErrorKind::io, "failed writing scene file " + path.string());
}

inline ParticleScene read_scene(std::istream& in, const std::string& name = "<stream>") {
  ParticleScene scene;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      scene.particles.push_back({j.at("x_m").get<double>(), j.at("y_m").get<double>(),
                                 j.at("z_m").get<double>(), j.at("r_m").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::corruption,
                  name + ":" + std::to_string(lineno) + ": bad particle record: " + e.what());
    }
  }
  return scene;
}

inline ParticleScene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open scene file " + path.string());
  return read_scene(in, path.string());
}

}  // namespace holofield
