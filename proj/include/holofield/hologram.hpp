#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "holofield/bessel.hpp"
#include "holofield/config.hpp"
#include "holofield/error.hpp"
#include "holofield/grid.hpp"
#include "holofield/parallel.hpp"
#include "holofield/scene.hpp"
#include "json.hpp"

namespace holofield {

using Complex = std::complex<double>;
using ComplexField = Grid<Complex>;

/// Real intensity image. When `normalized` is set, intensity = (I - offset) * scale.
struct Hologram {
  Grid<float> intensity;
  bool normalized = false;
  double scale = 1.0;
  double offset = 0.0;

  std::size_t size() const { return intensity.rows(); }
  friend bool operator==(const Hologram&, const Hologram&) = default;
};

/// Radius of the hologram-plane disk a particle at distance z may illuminate
/// before its fringes exceed the sensor Nyquist limit: z * tan(asin(lambda / 2p)).
inline double aliasing_radius(double z, const OpticalConfig& config) {
  const double s = config.wavelength / (2.0 * config.pixel_pitch);
  if (!(s <= 1.0) || !(s > 0.0)) {
    throw Error(ErrorKind::domain, "aliasing_radius: wavelength/(2*pixel_pitch) outside (0, 1]");
  }
  if (!(z > 0.0)) throw Error(ErrorKind::domain, "aliasing_radius: z must be > 0");
  return z * std::tan(std::asin(s));
}

namespace detail {

/// Diffracted field of one particle at lateral offset rho from its center.
inline Complex particle_kernel(double rho, const Particle& p, const OpticalConfig& c) {
  constexpr Complex i{0.0, 1.0};
  const double lz = c.wavelength * p.z;
  if (rho == 0.0) {
    // J1(t)/rho -> pi*r/(lambda*z) as rho -> 0
    return std::numbers::pi * p.r * p.r / (2.0 * i * lz);
  }
  const double chirp = (c.fresnel_pi_factor ? std::numbers::pi : 1.0) * rho * rho / lz;
  const double j1 = bessel_j1(2.0 * std::numbers::pi * p.r * rho / lz);
  return p.r / (2.0 * i * rho) * j1 * Complex{std::cos(chirp), std::sin(chirp)};
}

struct Support {
  long row0, row1, col0, col1;  // inclusive pixel bounds, clipped to the grid
  double radius;                 // infinity when the mask is disabled
};

inline Support support_of(const Particle& p, const OpticalConfig& c) {
  const long n = static_cast<long>(c.grid_size);
  if (!c.aliasing_mask) return {0, n - 1, 0, n - 1, std::numeric_limits<double>::infinity()};
  const double rad = aliasing_radius(p.z, c);
  const double pitch = c.pixel_pitch;
  auto lo = [&](double v) { return std::clamp<long>(static_cast<long>(std::floor(v / pitch - 0.5)), 0, n); };
  auto hi = [&](double v) { return std::clamp<long>(static_cast<long>(std::ceil(v / pitch - 0.5)), -1, n - 1); };
  return {lo(p.y - rad), hi(p.y + rad), lo(p.x - rad), hi(p.x + rad), rad};
}

/// Adds the particle's masked field into rows [row_begin, row_end) of `field`.
inline void accumulate_particle(ComplexField& field, const Particle& p, const OpticalConfig& c,
                                long row_begin, long row_end) {
  const Support s = support_of(p, c);
  const double pitch = c.pixel_pitch;
  const long r0 = std::max(s.row0, row_begin);
  const long r1 = std::min(s.row1, row_end - 1);
  for (long row = r0; row <= r1; ++row) {
    const double dy = (static_cast<double>(row) + 0.5) * pitch - p.y;
    for (long col = s.col0; col <= s.col1; ++col) {
      const double dx = (static_cast<double>(col) + 0.5) * pitch - p.x;
      const double rho = std::hypot(dx, dy);
      if (rho > s.radius) continue;
      field(static_cast<std::size_t>(row), static_cast<std::size_t>(col)) += particle_kernel(rho, p, c);
    }
  }
}

}  // namespace detail

/// Masked diffracted field u_j of a single particle on the N x N grid.
inline ComplexField particle_field(const Particle& particle, const OpticalConfig& config) {
  ComplexField field(config.grid_size, config.grid_size);
  detail::accumulate_particle(field, particle, config, 0, static_cast<long>(config.grid_size));
  return field;
}

/// Sum of all particle fields. Particles are added in scene order for every
/// pixel, so the result does not depend on the number of jobs.
inline ComplexField scene_field(const ParticleScene& scene, const OpticalConfig& config,
                                unsigned jobs = 1) {
  const std::size_t n = config.grid_size;
  ComplexField field(n, n);
  constexpr std::size_t kBand = 16;
  const std::size_t bands = (n + kBand - 1) / kBand;
  parallel_for(bands, jobs, [&](std::size_t b) {
    const long begin = static_cast<long>(b * kBand);
    const long end = static_cast<long>(std::min(n, (b + 1) * kBand));
    for (const auto& p : scene.particles) detail::accumulate_particle(field, p, config, begin, end);
  });
  return field;
}

/// In-line hologram |R + sum_j u_j|^2 with a uniform zero-phase reference of
/// amplitude config.reference_amplitude.
inline Hologram synthesize_hologram(const ParticleScene& scene, const OpticalConfig& config,
                                    unsigned jobs = 1) {
  validate(config);
  const ComplexField field = scene_field(scene, config, jobs);
  const double ref = config.reference_amplitude;
  Hologram h;
  h.intensity = Grid<float>(config.grid_size, config.grid_size);
  auto in = field.values();
  auto out = h.intensity.values();
  for (std::size_t k = 0; k < in.size(); ++k) out[k] = static_cast<float>(std::norm(ref + in[k]));
  return h;
}

/// Affine rescale to [0, 1]; scale and offset are kept so intensities can be recovered.
inline Hologram normalize_hologram(const Hologram& hologram) {
  const auto v = hologram.intensity.values();
  if (v.empty()) throw Error(ErrorKind::degenerate, "normalize_hologram: empty hologram");
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  const double lo = *mn;
  const double hi = *mx;
  if (!(hi > lo)) throw Error(ErrorKind::degenerate, "normalize_hologram: constant hologram");
  Hologram out;
  out.intensity = Grid<float>(hologram.intensity.rows(), hologram.intensity.cols());
  const double scale = 1.0 / (hi - lo);
  auto dst = out.intensity.values();
  for (std::size_t k = 0; k < v.size(); ++k) {
    dst[k] = static_cast<float>((static_cast<double>(v[k]) - lo) * scale);
  }
  // Compose with any earlier normalization so raw intensity stays recoverable.
  const double prev_scale = hologram.normalized ? hologram.scale : 1.0;
  const double prev_offset = hologram.normalized ? hologram.offset : 0.0;
  out.normalized = true;
  out.scale = scale * prev_scale;
  out.offset = prev_offset + lo / prev_scale;
  return out;
}

/// Raw intensity, undoing normalization if present.
inline Grid<float> raw_intensity(const Hologram& h) {
  if (!h.normalized) return h.intensity;
  Grid<float> out(h.intensity.rows(), h.intensity.cols());
  auto src = h.intensity.values();
  auto dst = out.values();
  for (std::size_t k = 0; k < src.size(); ++k) {
    dst[k] = static_cast<float>(static_cast<double>(src[k]) / h.scale + h.offset);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hologram files: raw little-endian float32, row-major, N x N, plus a JSON
// sidecar next to it (NNNNN.f32 -> NNNNN.holo.json).

struct HologramMeta {
  std::size_t grid_size = 0;
  double pixel_pitch = 0.0;
  double wavelength = 0.0;
  bool normalized = false;
  double scale = 1.0;
  double offset = 0.0;
  std::string source_scene;
  std::string config_hash;
};

inline std::filesystem::path hologram_sidecar_path(const std::filesystem::path& raw) {
  std::filesystem::path side = raw;
  side.replace_extension(".holo.json");
  return side;
}

/// Raw little-endian float32, row-major, no header.
inline void write_f32(const std::filesystem::path& path, const Grid<float>& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write float image " + path.string());
  std::vector<char> buf(img.size() * 4);
  for (std::size_t k = 0; k < img.size(); ++k) {
    auto bits = std::bit_cast<std::uint32_t>(img.values()[k]);
    for (int b = 0; b < 4; ++b) buf[4 * k + b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error(ErrorKind::io, "failed writing float image " + path.string());
}

inline void save_hologram(const std::filesystem::path& path, const Hologram& h,
                          const OpticalConfig& config, const std::string& source_scene = {}) {
  const std::size_t n = h.intensity.rows();
  if (n != h.intensity.cols()) throw Error(ErrorKind::validation, "save_hologram: hologram must be square");
  write_f32(path, h.intensity);

  nlohmann::json side{
      {"grid_size", n},
      {"pixel_pitch_m", config.pixel_pitch},
      {"wavelength_m", config.wavelength},
      {"normalized", h.normalized},
      {"normalization", {{"scale", h.scale}, {"offset", h.offset}}},
      {"source_scene", source_scene},
      {"config_hash", config_hash(config)},
  };
  std::ofstream sout(hologram_sidecar_path(path), std::ios::binary);
  if (!sout) throw Error(ErrorKind::io, "cannot write hologram sidecar for " + path.string());
  sout << side.dump(2) << '\n';
}

inline HologramMeta load_hologram_meta(const std::filesystem::path& path) {
  const auto side_path = hologram_sidecar_path(path);
  std::ifstream in(side_path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open hologram sidecar " + side_path.string());
  HologramMeta m;
  try {
    const auto j = nlohmann::json::parse(in);
    m.grid_size = j.at("grid_size").get<std::size_t>();
    m.pixel_pitch = j.at("pixel_pitch_m").get<double>();
    m.wavelength = j.at("wavelength_m").get<double>();
    m.normalized = j.value("normalized", false);
    if (j.contains("normalization")) {
      m.scale = j.at("normalization").at("scale").get<double>();
      m.offset = j.at("normalization").at("offset").get<double>();
    }
    m.source_scene = j.value("source_scene", std::string{});
    m.config_hash = j.value("config_hash", std::string{});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::corruption, side_path.string() + ": " + e.what());
  }
  return m;
}

inline Hologram load_hologram(const std::filesystem::path& path, HologramMeta* meta_out = nullptr) {
  const HologramMeta meta = load_hologram_meta(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open hologram file " + path.string());
  const std::size_t n = meta.grid_size;
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() != n * n * 4) {
    throw Error(ErrorKind::corruption, path.string() + ": expected " + std::to_string(n * n * 4) +
                                           " bytes of float32 data, found " +
                                           std::to_string(buf.size()));
  }
  Hologram h;
  h.intensity = Grid<float>(n, n);
  auto dst = h.intensity.values();
  for (std::size_t k = 0; k < dst.size(); ++k) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) {
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[4 * k + b])) << (8 * b);
    }
    dst[k] = std::bit_cast<float>(bits);
  }
  h.normalized = meta.normalized;
  h.scale = meta.scale;
  h.offset = meta.offset;
  if (meta_out) *meta_out = meta;
  return h;
}

}  // namespace holofield
