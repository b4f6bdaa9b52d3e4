#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "holofield/error.hpp"
#include "json.hpp"

namespace holofield {

/// Optical setup, sampling grid, label ranges and tiling geometry.
///
/// All lengths are in meters. The size range applies to `size_of(r)`, which is
/// the particle radius unless `size_is_diameter` is set.
struct OpticalConfig {
  double wavelength = 633e-9;
  double pixel_pitch = 10e-6;
  std::size_t grid_size = 1024;
  double z_min = 0.01;
  double z_max = 0.03;
  double size_min = 20e-6;
  double size_max = 100e-6;
  std::size_t tile_width = 256;   // w1
  std::size_t stitch_width = 128; // w2
  double reference_amplitude = 1.0;
  // Quadratic phase exp(i*pi*rho^2/(lambda*z)) instead of exp(i*rho^2/(lambda*z)).
  bool fresnel_pi_factor = false;
  bool size_is_diameter = false;
  bool aliasing_mask = true;

  double axial_step() const { return (z_max - z_min) / 256.0; }
  double size_step() const { return (size_max - size_min) / 256.0; }
  double extent() const { return static_cast<double>(grid_size) * pixel_pitch; }

  /// Size value that the size range and size map refer to.
  double size_of(double radius) const { return size_is_diameter ? 2.0 * radius : radius; }
  double radius_of(double size) const { return size_is_diameter ? 0.5 * size : size; }

  friend bool operator==(const OpticalConfig&, const OpticalConfig&) = default;
};

inline OpticalConfig default_config() { return OpticalConfig{}; }

/// Throws ErrorKind::validation describing the first violated invariant.
inline void validate(const OpticalConfig& c) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::validation, "config: " + msg); };
  if (!(c.wavelength > 0.0) || !std::isfinite(c.wavelength)) fail("wavelength must be > 0");
  if (!(c.pixel_pitch > 0.0) || !std::isfinite(c.pixel_pitch)) fail("pixel_pitch must be > 0");
  if (c.wavelength / (2.0 * c.pixel_pitch) > 1.0) fail("wavelength/(2*pixel_pitch) must be <= 1");
  if (c.grid_size == 0) fail("grid_size must be positive");
  if (c.stitch_width == 0) fail("stitch_width must be positive");
  if (c.tile_width != 2 * c.stitch_width) fail("tile_width must equal 2*stitch_width");
  if (c.grid_size % c.stitch_width != 0) fail("grid_size must be a multiple of stitch_width");
  if (c.grid_size < c.tile_width) fail("grid_size must be >= tile_width");
  if (!(c.z_min > 0.0) || !(c.z_max > c.z_min)) fail("require z_max > z_min > 0");
  if (!(c.size_min > 0.0) || !(c.size_max > c.size_min)) fail("require size_max > size_min > 0");
  if (!(c.reference_amplitude >= 0.0) || !std::isfinite(c.reference_amplitude)) {
    fail("reference_amplitude must be finite and >= 0");
  }
}

inline void to_json(nlohmann::json& j, const OpticalConfig& c) {
  j = nlohmann::json{
      {"wavelength_m", c.wavelength},
      {"pixel_pitch_m", c.pixel_pitch},
      {"grid_size", c.grid_size},
      {"z_min_m", c.z_min},
      {"z_max_m", c.z_max},
      {"size_min_m", c.size_min},
      {"size_max_m", c.size_max},
      {"tile_width", c.tile_width},
      {"stitch_width", c.stitch_width},
      {"reference_amplitude", c.reference_amplitude},
      {"fresnel_pi_factor", c.fresnel_pi_factor},
      {"size_is_diameter", c.size_is_diameter},
      {"aliasing_mask", c.aliasing_mask},
  };
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline void from_json(const nlohmann::json& j, OpticalConfig& c) {
  if (!j.is_object()) throw Error(ErrorKind::validation, "config: expected a JSON object");
  c = OpticalConfig{};
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "wavelength_m") c.wavelength = value.get<double>();
      else if (key == "pixel_pitch_m") c.pixel_pitch = value.get<double>();
      else if (key == "grid_size") c.grid_size = value.get<std::size_t>();
      else if (key == "z_min_m") c.z_min = value.get<double>();
      else if (key == "z_max_m") c.z_max = value.get<double>();
      else if (key == "size_min_m") c.size_min = value.get<double>();
      else if (key == "size_max_m") c.size_max = value.get<double>();
      else if (key == "tile_width") c.tile_width = value.get<std::size_t>();
      else if (key == "stitch_width") c.stitch_width = value.get<std::size_t>();
      else if (key == "reference_amplitude") c.reference_amplitude = value.get<double>();
      else if (key == "fresnel_pi_factor") c.fresnel_pi_factor = value.get<bool>();
      else if (key == "size_is_diameter") c.size_is_diameter = value.get<bool>();
      else if (key == "aliasing_mask") c.aliasing_mask = value.get<bool>();
      else throw Error(ErrorKind::validation, "config: unknown key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::validation, "config: bad value for '" + key + "': " + e.what());
    }
  }
}

/// FNV-1a over the canonical JSON dump; stable across runs and platforms.
inline std::string config_hash(const OpticalConfig& c) {
  const std::string canon = nlohmann::json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline OpticalConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::validation, "config file " + path.string() + ": " + e.what());
  }
  OpticalConfig c = j.get<OpticalConfig>();
  validate(c);
  return c;
}

}  // namespace holofield
