// Runs the tiled pipeline on a simulated hologram with an oracle predictor
// that encodes the true particles falling in each tile, then decodes the
// stitched maps and scores them against the scene.
//
//   tiled_oracle [count] [seed]

#include <cstdio>
#include <cstdlib>

#include "holofield/holofield.hpp"

using namespace holofield;

int main(int argc, char** argv) try {
  const std::size_t count = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 120;
  const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;
  const auto config = default_config();

  const auto scene = generate_scene(config, count, seed);
  const auto hologram = synthesize_hologram(scene, config);
  const auto truth_maps = encode_maps(scene, config);
  std::printf("scene: %zu particles, hologram %zux%zu\n", scene.size(), hologram.intensity.rows(),
              hologram.intensity.cols());

  const auto plan = plan_tiles(config);
  // The hologram tile is ignored; the prediction is the true map tile.
  auto oracle = [&](const Grid<float>&, TileOrigin o) {
    return extract_tile(truth_maps, o, plan.tile_width);
  };
  const auto stitched = predict_full(hologram.intensity, oracle, plan);

  DecodeOptions opt;
  opt.row_offset = opt.col_offset = static_cast<long>(plan.border_offset);
  const auto estimates = decode_maps(stitched, config, opt);

  // Only particles whose square lies inside the stitched region can be seen.
  const long lo = static_cast<long>(plan.border_offset) + kSquareHalf;
  const long hi = static_cast<long>(plan.border_offset + plan.output_extent) - 1 - kSquareHalf;
  std::vector<ParticleEstimate> visible;
  for (const auto& t : truth_estimates(scene, config)) {
    if (t.px >= lo && t.px <= hi && t.py >= lo && t.py <= hi) visible.push_back(t);
  }
  const auto report = compute_errors(match_particles(visible, estimates), visible, estimates, config);
  std::printf("%zu tiles, %zu visible particles, %zu decoded\n", plan.origins.size(), visible.size(),
              estimates.size());
  std::printf("%s", error_table(report).c_str());
  return 0;
} catch (const Error& e) {
  std::fprintf(stderr, "tiled_oracle: %s\n", e.what());
  return 1;
}
