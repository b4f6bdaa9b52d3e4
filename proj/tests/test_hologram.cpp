#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>

#include "holofield/hologram.hpp"
#include "oracles.hpp"

using namespace holofield;

namespace {

OpticalConfig small_config(std::size_t n = 256) {
  auto c = default_config();
  c.grid_size = n;
  return c;
}

// Particle centered on pixel (row, col).
Particle at_pixel(long row, long col, double z, double r, double p = 10e-6) {
  return {(col + 0.5) * p, (row + 0.5) * p, z, r};
}

}  // namespace

TEST(AliasingRadius, DefaultValue) {
  const auto c = default_config();
  const double ref = oracle::aliasing_radius(0.02, 633e-9, 10e-6);
  EXPECT_NEAR(ref, 6.333e-4, 1e-7);
  EXPECT_NEAR(aliasing_radius(0.02, c), ref, 1e-15);
}

TEST(AliasingRadius, LinearAndMonotonic) {
  const auto c = default_config();
  double prev = 0;
  for (double z = 0.001; z < 0.1; z += 0.0037) {
    const double r = aliasing_radius(z, c);
    EXPECT_GT(r, prev);
    EXPECT_NEAR(aliasing_radius(2 * z, c), 2 * r, 1e-15);
    prev = r;
  }
}

TEST(AliasingRadius, DomainErrors) {
  auto c = default_config();
  c.wavelength = 30e-6;
  try {
    aliasing_radius(0.02, c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::domain);
  }
  EXPECT_THROW(aliasing_radius(0.0, default_config()), Error);
}

TEST(ParticleField, CenterValueIsAnalyticLimit) {
  const auto c = small_config();
  const auto f = particle_field(at_pixel(128, 128, 0.02, 50e-6), c);
  const std::complex<double> u = f(128, 128);
  // Small-argument limit J1(t) ~ t/2 gives pi r^2 / (2 i lambda z).
  const double mag = std::numbers::pi * 50e-6 * 50e-6 / (2 * 633e-9 * 0.02);
  EXPECT_NEAR(mag, 0.3102, 5e-5);
  EXPECT_NEAR(std::abs(u), mag, 1e-12);
  EXPECT_NEAR(std::arg(u), -std::numbers::pi / 2, 1e-12);
}

TEST(ParticleField, NearCenterApproachesLimit) {
  // A particle a tiny distance off the pixel center should give nearly the same value.
  const auto c = small_config();
  auto p = at_pixel(128, 128, 0.02, 50e-6);
  const auto exact = particle_field(p, c)(128, 128);
  p.x += 1e-12;
  const auto near = particle_field(p, c)(128, 128);
  EXPECT_NEAR(std::abs(near - exact), 0.0, 1e-9);
}

TEST(ParticleField, ZeroOutsideSupportDisk) {
  const auto c = small_config();
  const auto p = at_pixel(128, 128, 0.012, 60e-6);
  const auto f = particle_field(p, c);
  const double rad = oracle::aliasing_radius(p.z, c.wavelength, c.pixel_pitch);
  std::size_t inside = 0;
  for (std::size_t r = 0; r < c.grid_size; ++r) {
    for (std::size_t col = 0; col < c.grid_size; ++col) {
      const double rho = std::hypot((col + 0.5) * c.pixel_pitch - p.x, (r + 0.5) * c.pixel_pitch - p.y);
      if (rho > rad * (1 + 1e-12)) {
        EXPECT_EQ(f(r, col), std::complex<double>{}) << r << "," << col;
      } else if (rho < rad * (1 - 1e-12)) {
        ++inside;
      }
    }
  }
  EXPECT_GT(inside, 100u);
}

TEST(ParticleField, CircularSymmetry) {
  const auto c = small_config();
  const auto f = particle_field(at_pixel(128, 128, 0.02, 40e-6), c);
  for (long d = 1; d < 60; ++d) {
    EXPECT_NEAR(std::abs(f(128 + d, 128)), std::abs(f(128, 128 + d)), 1e-15);
    EXPECT_NEAR(std::abs(f(128 - d, 128)), std::abs(f(128, 128 - d)), 1e-15);
  }
}

TEST(ParticleField, KernelMatchesIndependentFormula) {
  for (bool pi_factor : {false, true}) {
    auto c = small_config();
    c.fresnel_pi_factor = pi_factor;
    const auto p = at_pixel(100, 110, 0.017, 35e-6);
    const auto f = particle_field(p, c);
    for (auto [r, col] : {std::pair{100, 113}, {97, 104}, {130, 140}, {100, 60}}) {
      const double rho = std::hypot((col + 0.5) * 10e-6 - p.x, (r + 0.5) * 10e-6 - p.y);
      const double lz = 633e-9 * p.z;
      const double j1 = oracle::bessel_j1_series(2 * std::numbers::pi * p.r * rho / lz);
      const double ph = (pi_factor ? std::numbers::pi : 1.0) * rho * rho / lz;
      const std::complex<double> expect =
          p.r / (2.0 * std::complex<double>(0, 1) * rho) * j1 * std::polar(1.0, ph);
      EXPECT_NEAR(std::abs(f(r, col) - expect), 0.0, 1e-12) << r << "," << col;
    }
  }
}

TEST(ParticleField, IntegerTranslation) {
  const auto c = small_config();
  const auto a = particle_field(at_pixel(100, 100, 0.015, 50e-6), c);
  const auto b = particle_field(at_pixel(107, 95, 0.015, 50e-6), c);
  for (long r = 20; r < 180; r += 3) {
    for (long col = 20; col < 180; col += 3) {
      EXPECT_NEAR(std::abs(a(r, col) - b(r + 7, col - 5)), 0.0, 1e-12);
    }
  }
}

TEST(Hologram, EmptySceneIsExactlyOne) {
  const auto h = synthesize_hologram({}, small_config());
  for (float v : h.intensity.values()) ASSERT_EQ(v, 1.0f);
}

TEST(Hologram, SingleParticleCenterIntensity) {
  const auto c = small_config();
  ParticleScene s;
  s.particles.push_back(at_pixel(128, 128, 0.02, 50e-6));
  const auto h = synthesize_hologram(s, c);
  const double u = std::numbers::pi * 50e-6 * 50e-6 / (2 * 633e-9 * 0.02);
  const double expect = 1 + u * u;  // |1 - i u|^2
  EXPECT_NEAR(expect, 1.0962, 1e-4);
  EXPECT_NEAR(h.intensity(128, 128), expect, 1e-6 * expect);
}

TEST(Hologram, SeparatedParticlesLeaveReferenceOutsideSupports) {
  const auto c = small_config();
  ParticleScene s;
  s.particles.push_back(at_pixel(40, 40, 0.01, 50e-6));
  s.particles.push_back(at_pixel(200, 200, 0.01, 30e-6));
  const auto h = synthesize_hologram(s, c);
  const double rad = aliasing_radius(0.01, c);
  for (std::size_t r = 0; r < c.grid_size; ++r) {
    for (std::size_t col = 0; col < c.grid_size; ++col) {
      bool covered = false;
      for (const auto& p : s.particles) {
        covered |= std::hypot((col + 0.5) * 1e-5 - p.x, (r + 0.5) * 1e-5 - p.y) <= rad * (1 + 1e-9);
      }
      if (!covered) {
        ASSERT_EQ(h.intensity(r, col), 1.0f);
      }
    }
  }
}

TEST(Hologram, FieldsAddIntensitiesDoNot) {
  const auto c = small_config();
  ParticleScene a, b, ab;
  a.particles.push_back(at_pixel(120, 120, 0.02, 70e-6));
  b.particles.push_back(at_pixel(130, 140, 0.025, 50e-6));
  ab.particles = {a.particles[0], b.particles[0]};
  const auto fa = scene_field(a, c), fb = scene_field(b, c), fab = scene_field(ab, c);
  double worst = 0, intensity_gap = 0;
  for (std::size_t k = 0; k < fab.size(); ++k) {
    worst = std::max(worst, std::abs(fab.values()[k] - (fa.values()[k] + fb.values()[k])));
    const double i_ab = std::norm(1.0 + fab.values()[k]);
    const double i_sum = std::norm(1.0 + fa.values()[k]) + std::norm(1.0 + fb.values()[k]);
    intensity_gap = std::max(intensity_gap, std::abs(i_ab - i_sum));
  }
  EXPECT_LE(worst, 1e-15);
  EXPECT_GT(intensity_gap, 0.5);
}

TEST(Hologram, NonNegativeAndJobIndependent) {
  auto c = small_config();
  const auto s = generate_scene(c, 60, 11);
  const auto h1 = synthesize_hologram(s, c, 1);
  const auto h3 = synthesize_hologram(s, c, 3);
  EXPECT_EQ(h1, h3);
  for (float v : h1.intensity.values()) ASSERT_GE(v, 0.0f);
}

TEST(Normalize, ConstantIsDegenerate) {
  try {
    normalize_hologram(synthesize_hologram({}, small_config()));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate);
  }
}

TEST(Normalize, UnitRangeIsIdentity) {
  Hologram h;
  h.intensity = Grid<float>(4, 4, 0.25f);
  h.intensity(0, 0) = 0.0f;
  h.intensity(3, 3) = 1.0f;
  const auto n = normalize_hologram(h);
  EXPECT_EQ(n.intensity, h.intensity);
  EXPECT_DOUBLE_EQ(n.scale, 1.0);
  EXPECT_DOUBLE_EQ(n.offset, 0.0);
}

TEST(Normalize, RangeAndRecovery) {
  const auto c = small_config();
  const auto h = synthesize_hologram(generate_scene(c, 30, 4), c);
  const auto n = normalize_hologram(h);
  const auto [mn, mx] = std::minmax_element(n.intensity.values().begin(), n.intensity.values().end());
  EXPECT_EQ(*mn, 0.0f);
  EXPECT_EQ(*mx, 1.0f);
  const auto raw = raw_intensity(n);
  for (std::size_t k = 0; k < raw.size(); ++k) {
    ASSERT_NEAR(raw.values()[k], h.intensity.values()[k], 1e-5 * h.intensity.values()[k]);
  }
  // Normalizing twice stays consistent with the raw intensity.
  const auto raw2 = raw_intensity(normalize_hologram(n));
  for (std::size_t k = 0; k < raw.size(); ++k) ASSERT_NEAR(raw2.values()[k], raw.values()[k], 1e-5);
}

TEST(HologramIo, RoundTripIsBitExact) {
  const auto dir = oracle::temp_dir("holo_io");
  const auto c = small_config();
  const auto h = normalize_hologram(synthesize_hologram(generate_scene(c, 20, 5), c));
  save_hologram(dir / "a.f32", h, c, "a.particles.jsonl");
  HologramMeta meta;
  const auto back = load_hologram(dir / "a.f32", &meta);
  EXPECT_EQ(back, h);
  EXPECT_EQ(meta.grid_size, 256u);
  EXPECT_EQ(meta.source_scene, "a.particles.jsonl");
  EXPECT_EQ(meta.config_hash, config_hash(c));
  EXPECT_TRUE(std::filesystem::exists(dir / "a.holo.json"));
  EXPECT_EQ(std::filesystem::file_size(dir / "a.f32"), 256u * 256u * 4u);
}

TEST(HologramIo, LittleEndianLayout) {
  const auto dir = oracle::temp_dir("holo_endian");
  auto c = small_config();
  c.grid_size = 256;
  Hologram h;
  h.intensity = Grid<float>(256, 256, 0.0f);
  h.intensity(0, 0) = 1.0f;  // 0x3f800000
  save_hologram(dir / "e.f32", h, c);
  const auto bytes = oracle::read_bytes(dir / "e.f32");
  EXPECT_EQ(static_cast<unsigned char>(bytes[0]), 0x00);
  EXPECT_EQ(static_cast<unsigned char>(bytes[2]), 0x80);
  EXPECT_EQ(static_cast<unsigned char>(bytes[3]), 0x3f);
}

TEST(HologramIo, TruncatedFileIsCorruption) {
  const auto dir = oracle::temp_dir("holo_trunc");
  const auto c = small_config();
  save_hologram(dir / "t.f32", synthesize_hologram({}, c), c);
  std::filesystem::resize_file(dir / "t.f32", 1000);
  try {
    load_hologram(dir / "t.f32");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::corruption);
    EXPECT_NE(std::string(e.what()).find("t.f32"), std::string::npos);
  }
}
