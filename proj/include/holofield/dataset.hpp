#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "json.hpp"

#include "holofield/config.hpp"
#include "holofield/error.hpp"
#include "holofield/hologram.hpp"
#include "holofield/map_codec.hpp"
#include "holofield/parallel.hpp"
#include "holofield/random.hpp"
#include "holofield/scene.hpp"

namespace holofield {

inline constexpr int kDatasetVersion = 1;

struct DatasetEntry {
  std::string scene;     // paths relative to the dataset root
  std::string hologram;
  std::string maps;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  friend bool operator==(const DatasetEntry&, const DatasetEntry&) = default;
};

struct DatasetManifest {
  int version = kDatasetVersion;
  OpticalConfig config;
  std::string config_hash;
  std::vector<DatasetEntry> entries;
};

struct DatasetRequest {
  std::size_t n_holograms = 1;
  std::size_t count_min = 50;
  std::size_t count_max = 200;
  std::uint64_t master_seed = 0;
  unsigned jobs = 1;
};

inline std::string entry_stem(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%05zu", index);
  return buf;
}

inline nlohmann::json to_json(const DatasetManifest& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : m.entries) {
    entries.push_back({{"scene", e.scene},
                       {"hologram", e.hologram},
                       {"maps", e.maps},
                       {"count", e.count},
                       {"seed", e.seed}});
  }
  return {{"version", m.version},
          {"config", m.config},
          {"config_hash", m.config_hash},
          {"entries", std::move(entries)}};
}

inline void validate(const DatasetRequest& req) {
  if (req.n_holograms < 1) throw Error(ErrorKind::validation, "dataset: need at least one hologram");
  if (req.count_min < 1 || req.count_max < req.count_min) {
    throw Error(ErrorKind::validation, "dataset: count range must satisfy 1 <= min <= max, got " +
                                           std::to_string(req.count_min) + ":" +
                                           std::to_string(req.count_max));
  }
}

/// Writes manifest.json, scenes/, holos/ and maps/ under `root`. Entry i uses
/// seed derive_seed(master_seed, i) for both its particle count and its scene,
/// so output is independent of the job count.
inline DatasetManifest build_dataset(const std::filesystem::path& root, const OpticalConfig& config,
                                     const DatasetRequest& req) {
  namespace fs = std::filesystem;
  validate(config);
  validate(req);
  std::error_code ec;
  for (const char* sub : {"scenes", "holos", "maps"}) {
    fs::create_directories(root / sub, ec);
    if (ec) throw Error(ErrorKind::io, "cannot create " + (root / sub).string() + ": " + ec.message());
  }

  DatasetManifest manifest;
  manifest.config = config;
  manifest.config_hash = config_hash(config);
  manifest.entries.resize(req.n_holograms);

  parallel_for(req.n_holograms, req.jobs, [&](std::size_t i) {
    try {
      DatasetEntry e;
      const std::string stem = entry_stem(i);
      e.scene = "scenes/" + stem + ".particles.jsonl";
      e.hologram = "holos/" + stem + ".f32";
      e.maps = "maps/" + stem + ".png";
      e.seed = derive_seed(req.master_seed, i);
      std::mt19937_64 count_rng(derive_seed(e.seed, 1));
      e.count = static_cast<std::size_t>(uniform_int(count_rng, static_cast<std::int64_t>(req.count_min),
                                                     static_cast<std::int64_t>(req.count_max)));
      const ParticleScene scene = generate_scene(config, e.count, e.seed);
      const Hologram holo = normalize_hologram(synthesize_hologram(scene, config));
      save_scene(root / e.scene, scene);
      save_hologram(root / e.hologram, holo, config, fs::path(e.scene).filename().string());
      save_maps(root / e.maps, encode_maps(scene, config));
      manifest.entries[i] = std::move(e);
    } catch (const Error& err) {
      throw Error(err.kind(), "dataset entry " + std::to_string(i) + ": " + err.what());
    }
  });

  std::ofstream out(root / "manifest.json", std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + (root / "manifest.json").string());
  out << to_json(manifest).dump(2) << '\n';
  if (!out) throw Error(ErrorKind::io, "failed writing " + (root / "manifest.json").string());
  return manifest;
}

struct DatasetItem {
  std::size_t index = 0;
  Hologram hologram;
  ParticleMaps maps;
  ParticleScene scene;
};

/// Reads a manifest eagerly and entries on demand. Every entry is checked
/// against the manifest configuration when it is loaded.
class DatasetReader {
 public:
  explicit DatasetReader(const std::filesystem::path& manifest_path)
      : root_(manifest_path.parent_path()) {
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open manifest " + manifest_path.string());
    const std::string name = manifest_path.string();
    try {
      const auto j = nlohmann::json::parse(in);
      manifest_.version = j.at("version").get<int>();
      if (manifest_.version != kDatasetVersion) {
        throw Error(ErrorKind::corruption,
                    name + ": unsupported version " + std::to_string(manifest_.version));
      }
      manifest_.config = j.at("config").get<OpticalConfig>();
      manifest_.config_hash = j.at("config_hash").get<std::string>();
      for (const auto& e : j.at("entries")) {
        manifest_.entries.push_back({e.at("scene").get<std::string>(),
                                     e.at("hologram").get<std::string>(),
                                     e.at("maps").get<std::string>(),
                                     e.at("count").get<std::size_t>(),
                                     e.at("seed").get<std::uint64_t>()});
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::corruption, name + ": " + e.what());
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::corruption) throw;
      throw Error(ErrorKind::corruption, name + ": " + e.what());
    }
    validate(manifest_.config);
    if (config_hash(manifest_.config) != manifest_.config_hash) {
      throw Error(ErrorKind::config_mismatch,
                  name + ": config_hash " + manifest_.config_hash +
                      " does not match the embedded config (" + config_hash(manifest_.config) + ")");
    }
  }

  const DatasetManifest& manifest() const { return manifest_; }
  const std::filesystem::path& root() const { return root_; }
  std::size_t size() const { return manifest_.entries.size(); }

  DatasetItem load(std::size_t i) const {
    if (i >= size()) throw Error(ErrorKind::validation, "dataset: entry index out of range");
    const DatasetEntry& e = manifest_.entries[i];
    const OpticalConfig& c = manifest_.config;
    DatasetItem item;
    item.index = i;

    const auto holo_path = root_ / e.hologram;
    HologramMeta meta;
    item.hologram = load_hologram(holo_path, &meta);
    if (meta.config_hash != manifest_.config_hash) {
      throw Error(ErrorKind::config_mismatch, holo_path.string() + ": config_hash " +
                                                  meta.config_hash + " differs from manifest " +
                                                  manifest_.config_hash);
    }
    if (meta.grid_size != c.grid_size || meta.pixel_pitch != c.pixel_pitch ||
        meta.wavelength != c.wavelength) {
      throw Error(ErrorKind::config_mismatch,
                  holo_path.string() + ": grid_size/pixel_pitch_m/wavelength_m differ from manifest");
    }

    const auto maps_path = root_ / e.maps;
    item.maps = load_maps(maps_path);
    if (item.maps.rows() != c.grid_size || item.maps.cols() != c.grid_size) {
      throw Error(ErrorKind::corruption, maps_path.string() + ": maps are " +
                                             std::to_string(item.maps.rows()) + "x" +
                                             std::to_string(item.maps.cols()) + ", expected " +
                                             std::to_string(c.grid_size));
    }

    const auto scene_path = root_ / e.scene;
    item.scene = load_scene(scene_path);
    if (item.scene.size() != e.count) {
      throw Error(ErrorKind::corruption, scene_path.string() + ": count is " +
                                             std::to_string(item.scene.size()) + ", manifest says " +
                                             std::to_string(e.count));
    }
    item.scene.seed = e.seed;
    return item;
  }

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = DatasetItem;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    iterator(const DatasetReader* r, std::size_t i) : reader_(r), index_(i) {}
    DatasetItem operator*() const { return reader_->load(index_); }
    iterator& operator++() {
      ++index_;
      return *this;
    }
    void operator++(int) { ++index_; }
    friend bool operator==(const iterator& a, const iterator& b) { return a.index_ == b.index_; }

   private:
    const DatasetReader* reader_ = nullptr;
    std::size_t index_ = 0;
  };

  iterator begin() const { return {this, 0}; }
  iterator end() const { return {this, size()}; }

 private:
  std::filesystem::path root_;
  DatasetManifest manifest_;
};

inline DatasetReader read_dataset(const std::filesystem::path& manifest_path) {
  return DatasetReader(manifest_path);
}

}  // namespace holofield
