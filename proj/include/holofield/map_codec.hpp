#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "holofield/config.hpp"
#include "holofield/error.hpp"
#include "holofield/grid.hpp"
#include "holofield/png_io.hpp"
#include "holofield/scene.hpp"
#include "json.hpp"

namespace holofield {

// ---------------------------------------------------------------------------
// 256-level quantizers. Gray g covers [lo + g*step, lo + (g+1)*step) with
// step = (hi - lo) / 256; the top edge maps to 255. Decoding returns the bin
// center, so the round-trip error is at most step / 2.

namespace detail {

inline int quantize(double v, double lo, double hi, const char* what) {
  if (!(v >= lo && v <= hi)) {
    throw Error(ErrorKind::range, std::string(what) + " value outside its configured range");
  }
  const double step = (hi - lo) / 256.0;
  const auto g = static_cast<int>(std::floor((v - lo) / step));
  return std::clamp(g, 0, 255);
}

inline double dequantize(int g, double lo, double hi, const char* what) {
  if (g < 0 || g > 255) throw Error(ErrorKind::range, std::string(what) + " gray outside 0..255");
  return lo + (g + 0.5) * ((hi - lo) / 256.0);
}

}  // namespace detail

inline int axial_to_gray(double z, const OpticalConfig& c) {
  return detail::quantize(z, c.z_min, c.z_max, "axial");
}
inline double gray_to_axial(int g, const OpticalConfig& c) {
  return detail::dequantize(g, c.z_min, c.z_max, "axial");
}
/// `size` is in the config's size convention (see OpticalConfig::size_of).
inline int size_to_gray(double size, const OpticalConfig& c) {
  return detail::quantize(size, c.size_min, c.size_max, "size");
}
inline double gray_to_size(int g, const OpticalConfig& c) {
  return detail::dequantize(g, c.size_min, c.size_max, "size");
}

// ---------------------------------------------------------------------------

/// Three co-registered 8-bit maps: lateral occupancy, axial gray, size gray.
struct ParticleMaps {
  Grid<std::uint8_t> lateral;
  Grid<std::uint8_t> axial;
  Grid<std::uint8_t> size;

  ParticleMaps() = default;
  ParticleMaps(std::size_t rows, std::size_t cols)
      : lateral(rows, cols), axial(rows, cols), size(rows, cols) {}

  std::size_t rows() const { return lateral.rows(); }
  std::size_t cols() const { return lateral.cols(); }

  ParticleMaps crop(std::size_t row0, std::size_t col0, std::size_t rows, std::size_t cols) const {
    ParticleMaps out;
    out.lateral = lateral.crop(row0, col0, rows, cols);
    out.axial = axial.crop(row0, col0, rows, cols);
    out.size = size.crop(row0, col0, rows, cols);
    return out;
  }

  void paste(const ParticleMaps& src, std::size_t row0, std::size_t col0) {
    lateral.paste(src.lateral, row0, col0);
    axial.paste(src.axial, row0, col0);
    size.paste(src.size, row0, col0);
  }

  friend bool operator==(const ParticleMaps&, const ParticleMaps&) = default;
};

struct ParticleEstimate {
  long px = 0;  // column in hologram pixel coordinates
  long py = 0;  // row
  int axial_gray = 0;
  int size_gray = 0;
  double z_m = 0.0;
  double r_m = 0.0;

  friend bool operator==(const ParticleEstimate&, const ParticleEstimate&) = default;
};

/// Draws every particle as a 5x5 square centered on its pixel: 255 in the
/// lateral map, its axial and size grays in the other two maps.
inline ParticleMaps encode_maps(const ParticleScene& scene, const OpticalConfig& config) {
  const auto n = static_cast<long>(config.grid_size);
  ParticleMaps maps(config.grid_size, config.grid_size);
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const Particle& p = scene.particles[i];
    const PixelPos c = pixel_of(p, config);
    if (c.col < kSquareHalf || c.row < kSquareHalf || c.col > n - 1 - kSquareHalf ||
        c.row > n - 1 - kSquareHalf) {
      throw Error(ErrorKind::validation,
                  "encode_maps: square of particle " + std::to_string(i) + " leaves the map");
    }
    const auto ag = static_cast<std::uint8_t>(axial_to_gray(p.z, config));
    const auto sg = static_cast<std::uint8_t>(size_to_gray(config.size_of(p.r), config));
    for (long r = c.row - kSquareHalf; r <= c.row + kSquareHalf; ++r) {
      for (long col = c.col - kSquareHalf; col <= c.col + kSquareHalf; ++col) {
        const auto ur = static_cast<std::size_t>(r);
        const auto uc = static_cast<std::size_t>(col);
        if (maps.lateral(ur, uc) != 0) {
          throw Error(ErrorKind::validation,
                      "encode_maps: square of particle " + std::to_string(i) + " overlaps another");
        }
        maps.lateral(ur, uc) = 255;
        maps.axial(ur, uc) = ag;
        maps.size(ur, uc) = sg;
      }
    }
  }
  return maps;
}

/// Ground-truth particles expressed the way the decoder reports them.
inline std::vector<ParticleEstimate> truth_estimates(const ParticleScene& scene,
                                                     const OpticalConfig& config) {
  std::vector<ParticleEstimate> out;
  out.reserve(scene.size());
  for (const auto& p : scene.particles) {
    const PixelPos c = pixel_of(p, config);
    out.push_back({c.col, c.row, axial_to_gray(p.z, config),
                   size_to_gray(config.size_of(p.r), config), p.z, p.r});
  }
  return out;
}

struct DecodeOptions {
  double threshold = 255.0 * 0.95;  // lateral value must exceed this
  int min_count = 13;               // nonzero lateral pixels needed in the 5x5 region
  // Added to emitted pixel positions, e.g. the stitch border offset.
  long row_offset = 0;
  long col_offset = 0;
};

/// Raster-scan decoder working on `maps` in place: each accepted 5x5 region is
/// cleared so a particle is emitted once.
inline std::vector<ParticleEstimate> decode_maps_inplace(ParticleMaps& maps,
                                                         const OpticalConfig& config,
                                                         const DecodeOptions& opt = {}) {
  std::vector<ParticleEstimate> out;
  const std::size_t rows = maps.rows();
  const std::size_t cols = maps.cols();
  if (maps.axial.rows() != rows || maps.axial.cols() != cols || maps.size.rows() != rows ||
      maps.size.cols() != cols) {
    throw Error(ErrorKind::validation, "decode_maps: channel dimensions differ");
  }
  const auto w = static_cast<std::size_t>(kSquareWidth);
  std::vector<std::uint8_t> axial_vals;
  std::vector<std::uint8_t> size_vals;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (!(maps.lateral(r, c) > opt.threshold)) continue;
      if (r + w > rows || c + w > cols) continue;
      axial_vals.clear();
      size_vals.clear();
      for (std::size_t rr = r; rr < r + w; ++rr) {
        for (std::size_t cc = c; cc < c + w; ++cc) {
          if (maps.lateral(rr, cc) == 0) continue;
          axial_vals.push_back(maps.axial(rr, cc));
          size_vals.push_back(maps.size(rr, cc));
        }
      }
      if (static_cast<int>(axial_vals.size()) < opt.min_count) continue;
      // lower median
      const auto mid = (axial_vals.size() - 1) / 2;
      std::nth_element(axial_vals.begin(), axial_vals.begin() + mid, axial_vals.end());
      std::nth_element(size_vals.begin(), size_vals.begin() + mid, size_vals.end());
      ParticleEstimate e;
      e.px = static_cast<long>(c) + kSquareHalf + opt.col_offset;
      e.py = static_cast<long>(r) + kSquareHalf + opt.row_offset;
      e.axial_gray = axial_vals[mid];
      e.size_gray = size_vals[mid];
      e.z_m = gray_to_axial(e.axial_gray, config);
      e.r_m = config.radius_of(gray_to_size(e.size_gray, config));
      out.push_back(e);
      for (std::size_t rr = r; rr < r + w; ++rr) {
        for (std::size_t cc = c; cc < c + w; ++cc) {
          maps.lateral(rr, cc) = 0;
          maps.axial(rr, cc) = 0;
          maps.size(rr, cc) = 0;
        }
      }
    }
  }
  return out;
}

inline std::vector<ParticleEstimate> decode_maps(const ParticleMaps& maps, const OpticalConfig& config,
                                                 const DecodeOptions& opt = {}) {
  ParticleMaps work = maps;
  return decode_maps_inplace(work, config, opt);
}

// ---------------------------------------------------------------------------
// Map files: 8-bit RGB PNG with red = lateral, green = axial, blue = size.

inline Grid<Rgb> to_rgb(const ParticleMaps& maps) {
  Grid<Rgb> img(maps.rows(), maps.cols());
  for (std::size_t k = 0; k < img.size(); ++k) {
    img.values()[k] = {maps.lateral.values()[k], maps.axial.values()[k], maps.size.values()[k]};
  }
  return img;
}

inline ParticleMaps from_rgb(const Grid<Rgb>& img) {
  ParticleMaps maps(img.rows(), img.cols());
  for (std::size_t k = 0; k < img.size(); ++k) {
    maps.lateral.values()[k] = img.values()[k][0];
    maps.axial.values()[k] = img.values()[k][1];
    maps.size.values()[k] = img.values()[k][2];
  }
  return maps;
}

inline void save_maps(const std::filesystem::path& path, const ParticleMaps& maps) {
  write_png_rgb(path, to_rgb(maps));
}

inline ParticleMaps load_maps(const std::filesystem::path& path) {
  return from_rgb(read_png_rgb(path));
}

/// Optional sidecar (NAME.png -> NAME.maps.json) relating map pixels to hologram pixels.
struct MapsMeta {
  std::size_t border_offset = 0;
  std::size_t tile_width = 0;
  std::size_t stitch_width = 0;
};

inline std::filesystem::path maps_sidecar_path(const std::filesystem::path& png) {
  std::filesystem::path side = png;
  side.replace_extension(".maps.json");
  return side;
}

inline void save_maps_meta(const std::filesystem::path& png, const MapsMeta& m,
                           const ParticleMaps& maps) {
  std::ofstream out(maps_sidecar_path(png), std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write maps sidecar for " + png.string());
  out << nlohmann::json{{"width", maps.cols()},
                        {"height", maps.rows()},
                        {"border_offset", m.border_offset},
                        {"w1", m.tile_width},
                        {"w2", m.stitch_width}}
             .dump(2)
      << '\n';
}

inline std::optional<MapsMeta> load_maps_meta(const std::filesystem::path& png) {
  const auto side = maps_sidecar_path(png);
  std::ifstream in(side, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    const auto j = nlohmann::json::parse(in);
    return MapsMeta{j.at("border_offset").get<std::size_t>(), j.value("w1", std::size_t{0}),
                    j.value("w2", std::size_t{0})};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::corruption, side.string() + ": " + e.what());
  }
}

// Estimate files: one JSON object per line.

inline nlohmann::json to_json(const ParticleEstimate& e) {
  return {{"px", e.px},           {"py", e.py},   {"axial_gray", e.axial_gray},
          {"size_gray", e.size_gray}, {"z_m", e.z_m}, {"r_m", e.r_m}};
}

inline ParticleEstimate estimate_from_json(const nlohmann::json& j) {
  return {j.at("px").get<long>(),       j.at("py").get<long>(),  j.at("axial_gray").get<int>(),
          j.at("size_gray").get<int>(), j.at("z_m").get<double>(), j.at("r_m").get<double>()};
}

inline void save_estimates(const std::filesystem::path& path,
                           const std::vector<ParticleEstimate>& estimates) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write estimates file " + path.string());
  for (const auto& e : estimates) out << to_json(e).dump() << '\n';
  if (!out) throw Error(ErrorKind::io, "failed writing estimates file " + path.string());
}

/// Reads an estimates file. Lines holding scene records (x_m, y_m, ...) are
/// converted with truth_estimates, so a scene file can stand in for estimates.
inline std::vector<ParticleEstimate> load_estimates(const std::filesystem::path& path,
                                                    const OpticalConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open estimates file " + path.string());
  std::vector<ParticleEstimate> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (j.contains("x_m")) {
        ParticleScene one;
        one.particles.push_back({j.at("x_m").get<double>(), j.at("y_m").get<double>(),
                                 j.at("z_m").get<double>(), j.at("r_m").get<double>()});
        out.push_back(truth_estimates(one, config).front());
      } else {
        out.push_back(estimate_from_json(j));
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::corruption,
                  path.string() + ":" + std::to_string(lineno) + ": bad record: " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorKind::corruption,
                  path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace holofield
