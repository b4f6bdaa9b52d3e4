// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fields.hpp"
#include "holofield/holofield.hpp"
#include "holofield_cli.hpp"
#include "oracles.hpp"

using namespace holofield;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

unsigned jobs() {
  if (const char* env = std::getenv("HOLOFIELD_JOBS")) return static_cast<unsigned>(std::max(1, std::atoi(env)));
  return std::max(1u, std::thread::hardware_concurrency());
}

Particle at_pixel_center(long row, long col, double z, double r, const OpticalConfig& c) {
  return {(col + 0.5) * c.pixel_pitch, (row + 0.5) * c.pixel_pitch, z, r};
}

Outcome analytic_hologram() {
  const auto c = default_config();
  const double r = 50e-6, z = 0.02;
  ParticleScene s;
  s.particles.push_back(at_pixel_center(512, 512, z, r, c));
  const auto h = synthesize_hologram(s, c);
  const double u = std::numbers::pi * r * r / (2 * c.wavelength * z);
  const double expect = 1 + u * u;
  const double rel = std::abs(h.intensity(512, 512) - expect) / expect;
  const auto empty = synthesize_hologram({}, c);
  const bool flat = std::all_of(empty.intensity.values().begin(), empty.intensity.values().end(),
                                [](float v) { return v == 1.0f; });
  return {rel <= 1e-6 && flat && std::abs(expect - 1.0962) < 1e-4,
          fmt("center %.7f expected %.7f rel %.2e, empty scene %s", h.intensity(512, 512), expect, rel,
              flat ? "all 1" : "NOT all 1")};
}

Outcome bessel() {
  const int n = 100000;
  double worst = 0.0, at = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = -50.0 + 100.0 * i / (n - 1);
    const double e = std::abs(bessel_j1(x) - oracle::bessel_j1_series(x));
    if (e > worst) worst = e, at = x;
  }
  return {worst <= 1e-10, fmt("max abs error %.3e at x=%.4f over %d points", worst, at, n)};
}

Outcome codec_round_trip() {
  const auto c = default_config();
  std::mt19937_64 rng(601);
  std::size_t total = 0, recovered = 0, spurious = 0;
  double worst_axial = 0.0, worst_size = 0.0;
  long worst_lateral = 0;
  for (int scene = 0; scene < 100; ++scene) {
    const auto s = generate_scene(c, 50 + rng() % 151, rng());
    const auto truth = truth_estimates(s, c);
    const auto est = decode_maps(encode_maps(s, c), c);
    const auto m = match_particles(truth, est, 0.5);
    total += truth.size();
    recovered += m.pairs.size();
    for (const auto& p : m.pairs) {
      const auto& t = truth[p.truth];
      const auto& e = est[p.estimate];
      worst_lateral = std::max({worst_lateral, std::abs(t.px - e.px), std::abs(t.py - e.py)});
      worst_axial = std::max(worst_axial, std::abs(s.particles[p.truth].z - e.z_m));
      worst_size = std::max(worst_size, std::abs(c.size_of(s.particles[p.truth].r) - c.size_of(e.r_m)));
    }
    spurious += est.size() - m.pairs.size();
  }
  const double tol = 1 + 1e-9;
  const bool ok = recovered == total && spurious == 0 && worst_lateral == 0 &&
                  worst_axial <= 0.5 * c.axial_step() * tol && worst_size <= 0.5 * c.size_step() * tol;
  return {ok, fmt("%zu/%zu recovered, %zu spurious, lateral %ld px, axial %.4f mm (<= %.4f), size %.4f um (<= %.4f)",
                  recovered, total, spurious, worst_lateral, worst_axial * 1e3, 0.5 * c.axial_step() * 1e3,
                  worst_size * 1e6, 0.5 * c.size_step() * 1e6)};
}

Outcome tiling_identity() {
  const auto plan = plan_tiles(default_config());
  Grid<float> img(1024, 1024);
  for (std::size_t k = 0; k < img.size(); ++k) img.values()[k] = static_cast<float>(k) * 0.25f;
  const auto out = predict_full(img, [](const Grid<float>& t, TileOrigin) { return t; }, plan, jobs());
  const bool same = out == img.crop(64, 64, 896, 896);
  std::vector<Grid<float>> preds(plan.origins.size(), Grid<float>(256, 256, 1.0f));
  Grid<int> count;
  stitch(preds, plan, &count);
  const bool once = std::all_of(count.values().begin(), count.values().end(), [](int v) { return v == 1; });
  return {same && once && plan.origins.size() == 49 && out.rows() == 896 && out.cols() == 896,
          fmt("%zu tiles, output %zux%zu, central crop %s, write counts %s", plan.origins.size(),
              out.rows(), out.cols(), same ? "identical" : "DIFFER", once ? "all 1" : "NOT all 1")};
}

Outcome resolution() {
  std::ostringstream out, err;
  const int code = cli::run_cli({"resolution", "--json"}, out, err);
  if (code != 0) return {false, "resolution command failed: " + err.str()};
  const auto j = nlohmann::json::parse(out.str());
  const auto c = default_config();
  const double dz = j.at("axial_resolution_m").get<double>() * 1e3;
  const double step = j.at("axial_step_m").get<double>() * 1e3;
  const double ds = j.at("size_step_m").get<double>() * 1e6;
  const double na = j.at("numerical_aperture").get<double>();
  const double na_ref = c.wavelength / (2 * c.pixel_pitch);
  const double na_rel = std::abs(na - na_ref) / na_ref;
  const bool ok = std::abs(dz - 0.45) <= 0.01 && std::abs(step - 0.078) <= 0.001 &&
                  std::abs(ds - 0.3125) <= 0.001 && na_rel <= 1e-12;
  return {ok, fmt("axial resolution %.6f mm, axial step %.6f mm, size step %.6f um, NA %.6f (rel %.1e)", dz,
                  step, ds, na, na_rel)};
}

Outcome propagation() {
  using namespace testing_fields;
  const auto c = default_config();
  double worst_err = 0.0, worst_power = 0.0;
  for (std::uint64_t seed : {11u, 12u}) {
    const auto f = band_limited_field(1024, c.pixel_pitch, seed, 0.2, 12);
    for (double z : {0.01, 0.03}) {
      const auto g = angular_spectrum_propagate(f, z, c);
      const auto back = angular_spectrum_propagate(g, -z, c);
      worst_err = std::max(worst_err, max_rel_diff(back, f));
      worst_power = std::max(worst_power, std::abs(power(g) - power(f)) / power(f));
    }
  }
  return {worst_err <= 1e-5 && worst_power <= 1e-6,
          fmt("N=1024 round-trip rel error %.2e, power drift %.2e", worst_err, worst_power)};
}

Outcome baseline() {
  auto c = default_config();
  c.grid_size = 512;
  c.fresnel_pi_factor = true;
  SceneOptions so;
  so.margin_px = 40;
  so.min_separation_px = 80;
  const double delta_z = axial_resolution_theory(c).axial_resolution;
  std::size_t total = 0, found = 0;
  double axial_sum = 0.0;
  std::size_t matched = 0;
  ReconstructOptions ro;
  ro.keep_amplitude = false;
  ro.jobs = jobs();
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto s = generate_scene(c, 5, 7000 + seed, so);
    const auto stack = reconstruct_volume(synthesize_hologram(s, c), 256, c, ro);
    const auto est = detect_particles_focus(stack, c);
    const auto truth = truth_estimates(s, c);
    const auto m = match_particles(truth, est, 2.0);
    total += truth.size();
    for (const auto& p : m.pairs) {
      const double e = std::abs(est[p.estimate].z_m - s.particles[p.truth].z);
      axial_sum += e;
      ++matched;
      if (e <= delta_z) ++found;
    }
  }
  const double rate = static_cast<double>(found) / static_cast<double>(total);
  const double mean_axial = matched ? axial_sum / static_cast<double>(matched) : 0.0;
  const double floor = 0.5 * c.axial_step();
  return {rate >= 0.9 && mean_axial > floor,
          fmt("%zu/%zu within 2 px and %.3f mm (%.0f%%, need 90%%); mean axial error %.3f mm vs "
              "quantization floor %.3f mm",
              found, total, delta_z * 1e3, 100 * rate, mean_axial * 1e3, floor * 1e3)};
}

Outcome matching() {
  std::mt19937_64 rng(606);
  int bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int nt = static_cast<int>(rng() % 7), ne = static_cast<int>(rng() % 7);
    std::vector<ParticleEstimate> t(nt), e(ne);
    std::vector<oracle::Point> pt, pe;
    for (auto& v : t) v.px = static_cast<long>(rng() % 12), v.py = static_cast<long>(rng() % 12), pt.push_back({v.px, v.py});
    for (auto& v : e) v.px = static_cast<long>(rng() % 12), v.py = static_cast<long>(rng() % 12), pe.push_back({v.px, v.py});
    const auto m = match_particles(t, e, 5.0);
    const auto best = oracle::best_assignment(pt, pe, 5.0);
    if (m.pairs.size() != best.first || std::abs(m.total_distance() - best.second) > 1e-9) ++bad;
  }
  return {bad == 0, fmt("%d/1000 trials differ from exhaustive enumeration", bad)};
}

Outcome unit_conversions() {
  const auto c = default_config();
  const double axial = 3.15 * c.axial_step() * 1e3;
  const double size = 2.82 * c.size_step() * 1e6;
  const double lateral = 0.15 * c.pixel_pitch * 1e6;
  return {std::abs(axial - 0.246) <= 0.002 && std::abs(size - 0.881) <= 0.005 && std::abs(lateral - 1.5) <= 1e-12,
          fmt("3.15 gray = %.4f mm, 2.82 gray = %.4f um, 0.15 px = %.4f um", axial, size, lateral)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"analytic-hologram", 5, analytic_hologram},
      {"bessel-oracle", 10, bessel},
      {"codec-round-trip", 60, codec_round_trip},
      {"tiling-identity", 10, tiling_identity},
      {"resolution-theory", 1, resolution},
      {"propagation-unitarity", 30, propagation},
      {"baseline-end-to-end", 600, baseline},
      {"matching-oracle", 60, matching},
      {"unit-conversions", 1, unit_conversions},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = cr.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < cr.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("%s %-22s %7.2fs (budget %gs%s)  %s\n", pass ? "PASS" : "FAIL", cr.name, secs, cr.budget_s,
                in_time ? "" : ", EXCEEDED", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
