#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "xnocs/manifest.hpp"
#include "xnocs/types.hpp"

namespace xnocs {

// Synthetic corruption standing in for network prediction error: isotropic
// Gaussian noise on valid coordinates (clamped to [0,1]) and random pixel
// dropout.
struct NoiseModel {
  double sigma = 0.0;
  double dropout = 0.0;
};

struct PipelineConfig {
  std::vector<std::string> meshes;
  int views = 20;
  int width = 128;
  int height = 128;
  double radius_min = 1.2;
  double radius_max = 2.5;
  std::uint64_t seed = 0;
  NoiseModel noise;               // consumed by the sweep, not by rendering
  std::string out_dir;
  std::string background_dir;     // optional: composite first-hit color over these
};

PipelineConfig config_from_json(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);

struct PipelineResult {
  std::vector<std::filesystem::path> manifests;
  std::vector<std::string> errors;  // one line per failed instance
};

// Renders every instance: normalized mesh, per-view maps/masks (and colored
// maps when the mesh has vertex colors), one manifest per instance.
// Deterministic per seed. Partial outputs of a failing instance are removed.
PipelineResult run_pipeline(const PipelineConfig& config);

NocsMap corrupt_map(const NocsMap& map, const NoiseModel& noise, std::uint64_t seed);

struct SweepOptions {
  std::vector<int> view_counts;
  NoiseModel noise;
  int seeds = 20;
  std::uint64_t base_seed = 0;
};

struct SweepRow {
  int k = 0;
  double median_total_scaled = 0.0;
  std::vector<double> per_seed;
};

// For each k and seed: pick k views (nested prefixes of a per-seed view
// permutation), corrupt the ground-truth maps, union the readouts of both
// maps, and compute Chamfer x100 against the reference cloud.
std::vector<SweepRow> run_view_sweep(const Manifest& manifest,
                                     const std::filesystem::path& manifest_dir,
                                     const PointCloud& reference, const SweepOptions& options);

}  // namespace xnocs
