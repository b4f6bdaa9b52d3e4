#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "holofield/holofield.hpp"

namespace holofield::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kValidation = 1;
inline constexpr int kIo = 2;
inline constexpr int kInternal = 3;

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation:
    case ErrorKind::range:
    case ErrorKind::geometry:
      return kValidation;
    case ErrorKind::io:
    case ErrorKind::corruption:
    case ErrorKind::config_mismatch:
      return kIo;
    default:
      return kInternal;
  }
}

inline std::string tile_filename(TileOrigin o) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "tile_%05zu_%05zu.png", o.row, o.col);
  return buf;
}

struct CountRange {
  std::size_t lo = 0;
  std::size_t hi = 0;
};

/// "a:b" or "a".
inline CountRange parse_count(const std::string& s) {
  auto parse_one = [&](const std::string& t) -> std::size_t {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      if (t.empty() || t[0] == '-') throw std::invalid_argument("negative");
      v = std::stoull(t, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (pos != t.size()) throw Error(ErrorKind::validation, "--count: cannot parse '" + s + "'");
    return static_cast<std::size_t>(v);
  };
  const auto colon = s.find(':');
  if (colon == std::string::npos) {
    const auto v = parse_one(s);
    return {v, v};
  }
  return {parse_one(s.substr(0, colon)), parse_one(s.substr(colon + 1))};
}

inline OpticalConfig config_or_default(const std::string& path) {
  if (path.empty()) return default_config();
  return load_config(path);
}

inline void check_hologram_matches(const HologramMeta& meta, const OpticalConfig& c,
                                   const std::string& path) {
  if (meta.grid_size != c.grid_size || meta.pixel_pitch != c.pixel_pitch ||
      meta.wavelength != c.wavelength) {
    throw Error(ErrorKind::config_mismatch,
                path + ": hologram grid_size/pixel_pitch_m/wavelength_m differ from the config");
  }
}

inline void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::io, "failed writing " + path.string());
}

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
}

inline FocusMetric parse_metric(const std::string& s) {
  if (s == "flatness") return FocusMetric::fluctuation_flatness;
  if (s == "min-amplitude") return FocusMetric::min_amplitude;
  throw Error(ErrorKind::validation, "--metric must be flatness or min-amplitude");
}

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Args {
  std::string config;
  std::string count = "50:200";
  std::size_t n = 1;
  std::uint64_t seed = 0;
  std::string out;
  unsigned jobs = 0;
  std::string holo;
  std::size_t slices = 256;
  std::vector<std::size_t> dump_slices;
  std::string metric = "flatness";
  std::string maps;
  std::string truth;
  std::string pred;
  double gate = 5.0;
  long border = 0;
  bool json = false;
  std::string pred_dir;
};

inline int cmd_gen(const Args& a, std::ostream& out) {
  const OpticalConfig config = config_or_default(a.config);
  const CountRange cr = parse_count(a.count);
  DatasetRequest req;
  req.n_holograms = a.n;
  req.count_min = cr.lo;
  req.count_max = cr.hi;
  req.master_seed = a.seed;
  req.jobs = resolve_jobs(a.jobs);
  validate(req);
  const auto t0 = Clock::now();
  const auto manifest = build_dataset(a.out, config, req);
  std::size_t total = 0;
  for (const auto& e : manifest.entries) total += e.count;
  out << "wrote " << manifest.entries.size() << " entries (" << total << " particles) to "
      << a.out << " in " << seconds_since(t0) << " s\n";
  return kOk;
}

struct BaselineRun {
  SliceStack stack;
  std::vector<ParticleEstimate> estimates;
  double reconstruct_s = 0.0;
  double detect_s = 0.0;
};

inline BaselineRun run_baseline(const Hologram& holo, const OpticalConfig& config,
                                std::size_t slices, FocusMetric metric, unsigned jobs) {
  BaselineRun run;
  ReconstructOptions ro;
  ro.jobs = jobs;
  ro.keep_amplitude = metric == FocusMetric::min_amplitude;
  ro.keep_fluctuation = metric == FocusMetric::fluctuation_flatness;
  auto t0 = Clock::now();
  run.stack = reconstruct_volume(holo, slices, config, ro);
  run.reconstruct_s = seconds_since(t0);
  FocusOptions fo;
  fo.metric = metric;
  t0 = Clock::now();
  run.estimates = detect_particles_focus(run.stack, config, fo);
  run.detect_s = seconds_since(t0);
  return run;
}

inline int cmd_baseline(const Args& a, std::ostream& out) {
  const OpticalConfig config = config_or_default(a.config);
  const FocusMetric metric = parse_metric(a.metric);
  if (a.slices < 2) throw Error(ErrorKind::validation, "--slices must be >= 2");
  for (auto k : a.dump_slices) {
    if (k >= a.slices) throw Error(ErrorKind::validation, "--dump-slice index out of range");
  }
  HologramMeta meta;
  const Hologram holo = load_hologram(a.holo, &meta);
  check_hologram_matches(meta, config, a.holo);

  const auto run = run_baseline(holo, config, a.slices, metric, resolve_jobs(a.jobs));
  const std::filesystem::path dir = a.out;
  ensure_dir(dir);
  save_estimates(dir / "estimates.jsonl", run.estimates);

  nlohmann::json dumped = nlohmann::json::array();
  if (!a.dump_slices.empty()) ensure_dir(dir / "slices");
  for (auto k : a.dump_slices) {
    const auto& img = metric == FocusMetric::min_amplitude ? run.stack.amplitude[k]
                                                           : run.stack.fluctuation[k];
    char name[32];
    std::snprintf(name, sizeof name, "slice_%05zu.f32", k);
    const auto path = dir / "slices" / name;
    write_f32(path, img);
    write_json_file(hologram_sidecar_path(path),
                    {{"grid_size", img.rows()},
                     {"pixel_pitch_m", config.pixel_pitch},
                     {"wavelength_m", config.wavelength},
                     {"z_m", run.stack.z_values[k]},
                     {"quantity", metric == FocusMetric::min_amplitude ? "amplitude"
                                                                        : "fluctuation_amplitude"},
                     {"normalized", false},
                     {"source_hologram", std::filesystem::path(a.holo).filename().string()}});
    dumped.push_back(std::string("slices/") + name);
  }

  const double per = run.reconstruct_s / static_cast<double>(a.slices);
  write_json_file(dir / "stack.json", {{"slices", a.slices},
                                       {"z_m", run.stack.z_values},
                                       {"background", run.stack.background},
                                       {"metric", a.metric},
                                       {"estimates", run.estimates.size()},
                                       {"dumped", dumped},
                                       {"timing_s",
                                        {{"propagation_total", run.reconstruct_s},
                                         {"per_propagation", per},
                                         {"detection", run.detect_s}}}});
  out << "slices " << a.slices << ", estimates " << run.estimates.size() << "\n"
      << "propagation total " << run.reconstruct_s << " s, per propagation " << per
      << " s, detection " << run.detect_s << " s\n";
  return kOk;
}

inline int cmd_decode(const Args& a, std::ostream& out) {
  const OpticalConfig config = config_or_default(a.config);
  const ParticleMaps maps = load_maps(a.maps);
  DecodeOptions opt;
  if (const auto meta = load_maps_meta(a.maps)) {
    opt.row_offset = static_cast<long>(meta->border_offset);
    opt.col_offset = static_cast<long>(meta->border_offset);
  }
  const auto est = decode_maps(maps, config, opt);
  save_estimates(a.out, est);
  out << "decoded " << est.size() << " particles\n";
  return kOk;
}

inline int cmd_eval(const Args& a, std::ostream& out) {
  const OpticalConfig config = config_or_default(a.config);
  auto truth = load_estimates(a.truth, config);
  const auto pred = load_estimates(a.pred, config);
  if (a.border > 0) {
    // Keep only particles whose label square lies in the stitched region.
    const long lo = a.border + kSquareHalf;
    const long hi = static_cast<long>(config.grid_size) - a.border - kSquareHalf - 1;
    std::erase_if(truth, [&](const ParticleEstimate& e) {
      return e.px < lo || e.py < lo || e.px > hi || e.py > hi;
    });
  }
  const auto match = match_particles(truth, pred, a.gate);
  const auto report = compute_errors(match, truth, pred, config);
  out << error_table(report);
  if (!a.out.empty()) write_json_file(a.out, to_json(report));
  return kOk;
}

inline int cmd_resolution(const Args& a, std::ostream& out) {
  const OpticalConfig config = config_or_default(a.config);
  const auto r = axial_resolution_theory(config);
  if (a.json) {
    out << to_json(r).dump(2) << '\n';
    return kOk;
  }
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "reference z        %.6g mm\n"
                "spread radius R    %.6g mm\n"
                "NA                 %.6g\n"
                "axial resolution   %.6g mm\n"
                "axial step         %.6g mm\n"
                "size step          %.6g um\n",
                r.reference_z * 1e3, r.spread_radius * 1e3, r.numerical_aperture,
                r.axial_resolution * 1e3, r.axial_step * 1e3, r.size_step * 1e6);
  out << buf;
  return kOk;
}

inline int cmd_stitch(const Args& a, std::ostream& out) {
  const OpticalConfig config = config_or_default(a.config);
  if (!a.holo.empty()) check_hologram_matches(load_hologram_meta(a.holo), config, a.holo);
  const TilePlan plan = plan_tiles(config);
  const std::filesystem::path dir = a.pred_dir;
  std::vector<ParticleMaps> preds;
  preds.reserve(plan.origins.size());
  for (const auto& o : plan.origins) {
    const auto path = dir / tile_filename(o);
    if (!std::filesystem::exists(path)) throw Error(ErrorKind::io, "missing tile prediction " + path.string());
    preds.push_back(load_maps(path));
  }
  const ParticleMaps stitched = stitch(preds, plan);
  save_maps(a.out, stitched);
  save_maps_meta(a.out, {plan.border_offset, plan.tile_width, plan.stitch_width}, stitched);
  out << "stitched " << preds.size() << " tiles into " << plan.output_extent << "x"
      << plan.output_extent << "\n";
  return kOk;
}

/// Wall-clock comparison of the two reconstruction paths on one hologram. The
/// learned path is timed without a network: tiling, stitching and decoding
/// only, so its figure is a lower bound.
inline int cmd_bench(const Args& a, std::ostream& out) {
  const OpticalConfig config = config_or_default(a.config);
  HologramMeta meta;
  const Hologram holo = load_hologram(a.holo, &meta);
  check_hologram_matches(meta, config, a.holo);
  const auto run = run_baseline(holo, config, a.slices, FocusMetric::fluctuation_flatness,
                                resolve_jobs(a.jobs));

  const TilePlan plan = plan_tiles(config);
  auto t0 = Clock::now();
  const auto zero = [&](const Grid<float>& tile, TileOrigin) {
    return ParticleMaps(tile.rows(), tile.cols());
  };
  const ParticleMaps stitched = predict_full(holo.intensity, zero, plan, 1);
  DecodeOptions dopt;
  dopt.row_offset = dopt.col_offset = static_cast<long>(plan.border_offset);
  const auto est = decode_maps(stitched, config, dopt);
  const double tiled_s = seconds_since(t0);

  const nlohmann::json j{{"slices", a.slices},
                         {"baseline_s", run.reconstruct_s + run.detect_s},
                         {"baseline_per_propagation_s", run.reconstruct_s / a.slices},
                         {"tiled_pipeline_without_network_s", tiled_s},
                         {"tiles", plan.origins.size()}};
  out << j.dump(2) << '\n';
  return kOk;
}

/// Parses `args` (without the program name) and runs one subcommand.
/// Diagnostics go to `err` as "holofield: error[<kind>]: <message>".
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"holofield: in-line particle hologram simulation, reconstruction and evaluation"};
  app.require_subcommand(1);
  Args a;

  auto jobs_opt = [&](CLI::App* s) {
    s->add_option("--jobs", a.jobs, "worker threads (default: HOLOFIELD_JOBS or all cores)");
  };

  auto* gen = app.add_subcommand("gen", "generate a dataset");
  gen->add_option("--config", a.config, "optical config JSON");
  gen->add_option("--count", a.count, "particles per hologram, min:max")->capture_default_str();
  gen->add_option("--n", a.n, "number of holograms")->capture_default_str();
  gen->add_option("--seed", a.seed, "master seed")->capture_default_str();
  gen->add_option("--out", a.out, "output directory")->required();
  jobs_opt(gen);

  auto* base = app.add_subcommand("baseline", "angular-spectrum reconstruction and focus detection");
  base->add_option("--holo", a.holo, "hologram .f32 file")->required();
  base->add_option("--slices", a.slices, "number of depth slices")->capture_default_str();
  base->add_option("--out", a.out, "output directory")->required();
  base->add_option("--config", a.config, "optical config JSON");
  base->add_option("--dump-slice", a.dump_slices, "slice index to write as float32 (repeatable)");
  base->add_option("--metric", a.metric, "flatness or min-amplitude")->capture_default_str();
  jobs_opt(base);

  auto* dec = app.add_subcommand("decode", "decode particle maps into estimates");
  dec->add_option("--maps", a.maps, "maps PNG")->required();
  dec->add_option("--out", a.out, "estimates .jsonl")->required();
  dec->add_option("--config", a.config, "optical config JSON");

  auto* ev = app.add_subcommand("eval", "match estimates to truth and report errors");
  ev->add_option("--truth", a.truth, "truth scene or estimates .jsonl")->required();
  ev->add_option("--pred", a.pred, "predicted estimates .jsonl")->required();
  ev->add_option("--out", a.out, "error report JSON");
  ev->add_option("--config", a.config, "optical config JSON");
  ev->add_option("--gate", a.gate, "matching gate, pixels")->capture_default_str();
  ev->add_option("--border", a.border, "ignore truth within this many pixels of the edge");

  auto* res = app.add_subcommand("resolution", "theoretical axial resolution and step sizes");
  res->add_option("--config", a.config, "optical config JSON");
  res->add_flag("--json", a.json, "print JSON");

  auto* st = app.add_subcommand("stitch", "stitch per-tile map predictions");
  st->add_option("--holo", a.holo, "hologram .f32 the tiles came from (size check)");
  st->add_option("--pred-dir", a.pred_dir, "directory of tile_RRRRR_CCCCC.png files")->required();
  st->add_option("--out", a.out, "stitched maps PNG")->required();
  st->add_option("--config", a.config, "optical config JSON");

  auto* bench = app.add_subcommand("bench", "time baseline vs tiled pipeline");
  bench->add_option("--holo", a.holo, "hologram .f32 file")->required();
  bench->add_option("--slices", a.slices, "number of depth slices")->capture_default_str();
  bench->add_option("--config", a.config, "optical config JSON");
  jobs_opt(bench);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "holofield: error[usage]: " << e.what() << '\n';
    return kValidation;
  }

  try {
    if (gen->parsed()) return cmd_gen(a, out);
    if (base->parsed()) return cmd_baseline(a, out);
    if (dec->parsed()) return cmd_decode(a, out);
    if (ev->parsed()) return cmd_eval(a, out);
    if (res->parsed()) return cmd_resolution(a, out);
    if (st->parsed()) return cmd_stitch(a, out);
    if (bench->parsed()) return cmd_bench(a, out);
  } catch (const Error& e) {
    err << "holofield: error[" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "holofield: error[internal]: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}

}  // namespace holofield::cli
