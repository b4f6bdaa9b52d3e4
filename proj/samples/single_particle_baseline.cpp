// Reconstructs one particle by angular-spectrum back-propagation and reports
// where the focus metric puts it.
//
//   single_particle_baseline [z_mm] [radius_um]

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "holofield/holofield.hpp"

using namespace holofield;

int main(int argc, char** argv) try {
  const double z = (argc > 1 ? std::atof(argv[1]) : 20.0) * 1e-3;
  const double r = (argc > 2 ? std::atof(argv[2]) : 50.0) * 1e-6;
  auto config = default_config();
  config.grid_size = 256;
  config.fresnel_pi_factor = true;

  ParticleScene scene;
  scene.particles.push_back({128.3 * config.pixel_pitch, 127.6 * config.pixel_pitch, z, r});
  const auto hologram = synthesize_hologram(scene, config);

  ReconstructOptions ro;
  ro.keep_amplitude = false;
  const auto stack = reconstruct_volume(hologram, 256, config, ro);
  const auto found = detect_particles_focus(stack, config);

  const auto truth = truth_estimates(scene, config).front();
  std::printf("truth     px=%ld py=%ld z=%.3f mm r=%.1f um\n", truth.px, truth.py, z * 1e3, r * 1e6);
  for (const auto& e : found) {
    std::printf("estimate  px=%ld py=%ld z=%.3f mm r=%.1f um  (axial error %.3f mm, resolution %.3f mm)\n",
                e.px, e.py, e.z_m * 1e3, e.r_m * 1e6, std::abs(e.z_m - z) * 1e3,
                axial_resolution_theory(config).axial_resolution * 1e3);
  }
  if (found.empty()) std::printf("no particle detected\n");
  return 0;
} catch (const Error& e) {
  std::fprintf(stderr, "single_particle_baseline: %s\n", e.what());
  return 1;
}
