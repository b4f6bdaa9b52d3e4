#pragma once

#include <concepts>
#include <cstddef>
#include <string>
#include <type_traits>
#include <vector>

#include "holofield/config.hpp"
#include "holofield/error.hpp"
#include "holofield/grid.hpp"
#include "holofield/parallel.hpp"

namespace holofield {

struct TileOrigin {
  std::size_t row = 0;
  std::size_t col = 0;
  friend bool operator==(const TileOrigin&, const TileOrigin&) = default;
};

/// Regular grid of w1 x w1 tiles with stride w2. The central w2 x w2 block of
/// each tile lands in the output, which therefore starts (w1 - w2) / 2 pixels
/// inside the hologram on each axis.
struct TilePlan {
  std::vector<TileOrigin> origins;  // row-major
  std::size_t image_size = 0;
  std::size_t tile_width = 0;      // w1
  std::size_t stitch_width = 0;    // w2
  std::size_t tiles_per_axis = 0;
  std::size_t output_extent = 0;
  std::size_t border_offset = 0;   // (w1 - w2) / 2
};

inline TilePlan plan_tiles(std::size_t image_size, std::size_t w1, std::size_t w2) {
  if (w2 == 0 || w1 < w2 || (w1 - w2) % 2 != 0) {
    throw Error(ErrorKind::geometry, "plan_tiles: need w1 >= w2 > 0 with w1 - w2 even");
  }
  if (image_size < w1 || (image_size - w1) % w2 != 0) {
    throw Error(ErrorKind::geometry, "plan_tiles: (N - w1) must be a non-negative multiple of w2");
  }
  TilePlan plan;
  plan.image_size = image_size;
  plan.tile_width = w1;
  plan.stitch_width = w2;
  plan.tiles_per_axis = (image_size - w1) / w2 + 1;
  plan.output_extent = plan.tiles_per_axis * w2;
  plan.border_offset = (w1 - w2) / 2;
  for (std::size_t i = 0; i < plan.tiles_per_axis; ++i) {
    for (std::size_t j = 0; j < plan.tiles_per_axis; ++j) plan.origins.push_back({i * w2, j * w2});
  }
  return plan;
}

inline TilePlan plan_tiles(const OpticalConfig& config) {
  return plan_tiles(config.grid_size, config.tile_width, config.stitch_width);
}

/// Anything with rows()/cols()/crop()/paste() in the Grid style: Grid<T>, ParticleMaps.
template <class T>
concept TileImage = requires(const T& c, T& m, std::size_t i) {
  { c.rows() } -> std::convertible_to<std::size_t>;
  { c.cols() } -> std::convertible_to<std::size_t>;
  { c.crop(i, i, i, i) } -> std::same_as<T>;
  m.paste(c, i, i);
};

template <TileImage Image>
Image extract_tile(const Image& image, TileOrigin origin, std::size_t tile_width) {
  if (origin.row + tile_width > image.rows() || origin.col + tile_width > image.cols()) {
    throw Error(ErrorKind::validation, "extract_tile: tile at (" + std::to_string(origin.row) +
                                           "," + std::to_string(origin.col) + ") exceeds image");
  }
  return image.crop(origin.row, origin.col, tile_width, tile_width);
}

/// Splices the central w2 x w2 block of every tile prediction into the
/// output. `write_count`, if given, is incremented once per written pixel.
template <TileImage Image>
Image stitch(const std::vector<Image>& predictions, const TilePlan& plan,
             Grid<int>* write_count = nullptr) {
  if (predictions.size() != plan.origins.size()) {
    throw Error(ErrorKind::validation, "stitch: expected " + std::to_string(plan.origins.size()) +
                                           " tile predictions, got " +
                                           std::to_string(predictions.size()));
  }
  const std::size_t w2 = plan.stitch_width;
  const std::size_t b = plan.border_offset;
  Image out = [&] {
    if constexpr (std::is_constructible_v<Image, std::size_t, std::size_t>) {
      return Image(plan.output_extent, plan.output_extent);
    } else {
      return Image{};
    }
  }();
  if (write_count) *write_count = Grid<int>(plan.output_extent, plan.output_extent, 0);
  for (std::size_t t = 0; t < predictions.size(); ++t) {
    const Image& pred = predictions[t];
    if (pred.rows() != plan.tile_width || pred.cols() != plan.tile_width) {
      throw Error(ErrorKind::validation, "stitch: tile prediction " + std::to_string(t) +
                                             " is not " + std::to_string(plan.tile_width) + "x" +
                                             std::to_string(plan.tile_width));
    }
    const TileOrigin o = plan.origins[t];
    // origin + b in hologram coordinates, minus b for the output frame
    out.paste(pred.crop(b, b, w2, w2), o.row, o.col);
    if (write_count) {
      for (std::size_t r = 0; r < w2; ++r)
        for (std::size_t c = 0; c < w2; ++c) ++(*write_count)(o.row + r, o.col + c);
    }
  }
  return out;
}

/// plan -> extract -> predict -> stitch. `predictor(tile, origin)` must return
/// a w1 x w1 TileImage. Tiles may be predicted concurrently; results are
/// stitched in plan order.
template <TileImage Input, class Predictor>
auto predict_full(const Input& image, Predictor&& predictor, const TilePlan& plan,
                  unsigned jobs = 1) {
  using Output = std::decay_t<std::invoke_result_t<Predictor&, const Input&, TileOrigin>>;
  static_assert(TileImage<Output>, "predictor must return a tile image");
  if (image.rows() != plan.image_size || image.cols() != plan.image_size) {
    throw Error(ErrorKind::validation, "predict_full: image size does not match the tile plan");
  }
  std::vector<Output> predictions(plan.origins.size());
  parallel_for(plan.origins.size(), jobs, [&](std::size_t t) {
    const TileOrigin o = plan.origins[t];
    try {
      predictions[t] = predictor(extract_tile(image, o, plan.tile_width), o);
    } catch (const Error& e) {
      throw Error(e.kind(), "tile (" + std::to_string(o.row) + "," + std::to_string(o.col) +
                                "): " + e.what());
    }
  });
  return stitch(predictions, plan);
}

}  // namespace holofield
