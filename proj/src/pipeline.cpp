#include "xnocs/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "xnocs/aggregate.hpp"
#include "xnocs/error.hpp"
#include "xnocs/image_io.hpp"
#include "xnocs/map_codec.hpp"
#include "xnocs/mesh_io.hpp"
#include "xnocs/metrics.hpp"
#include "xnocs/normalize.hpp"
#include "xnocs/peeler.hpp"
#include "xnocs/rng.hpp"

namespace xnocs {

namespace fs = std::filesystem;

PipelineConfig config_from_json(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    PipelineConfig c;
    if (j.contains("meshes"))
      for (const auto& m : j.at("meshes")) c.meshes.push_back(m.get<std::string>());
    c.views = j.value("views", c.views);
    c.width = j.value("width", c.width);
    c.height = j.value("height", c.height);
    c.radius_min = j.value("radius_min", c.radius_min);
    c.radius_max = j.value("radius_max", c.radius_max);
    c.seed = j.value("seed", c.seed);
    if (j.contains("noise")) {
      c.noise.sigma = j.at("noise").value("sigma", 0.0);
      c.noise.dropout = j.at("noise").value("dropout", 0.0);
    }
    c.out_dir = j.value("out", c.out_dir);
    c.background_dir = j.value("backgrounds", c.background_dir);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return config_from_json(text);
}

namespace {

std::string view_name(int index, const char* suffix) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "view_%03d_%s", index, suffix);
  return buf;
}

// First-hit vertex color over a background (or white), as an 8-bit RGB
// stand-in for a photo of the view.
Image8 composite_rgb(const NocsMap& color, const Image8* background) {
  Image8 img;
  img.width = color.width;
  img.height = color.height;
  img.channels = 3;
  img.data.resize(std::size_t(color.width) * color.height * 3);
  for (std::size_t i = 0; i < color.pixels.size(); ++i) {
    std::uint8_t* px = img.data.data() + 3 * i;
    if (color.pixels[i].valid) {
      const Rgb c = color.pixels[i].coord;
      px[0] = static_cast<std::uint8_t>(std::lround(c.x * 255.0));
      px[1] = static_cast<std::uint8_t>(std::lround(c.y * 255.0));
      px[2] = static_cast<std::uint8_t>(std::lround(c.z * 255.0));
    } else if (background) {
      // Nearest-pixel sample; background sizes need not match the render.
      const int u = static_cast<int>(i) % color.width;
      const int v = static_cast<int>(i) / color.width;
      const int bu = std::min(background->width - 1,
                              u * background->width / std::max(1, color.width));
      const int bv = std::min(background->height - 1,
                              v * background->height / std::max(1, color.height));
      const std::uint8_t* bp =
          background->data.data() +
          (std::size_t(bv) * background->width + bu) * background->channels;
      px[0] = bp[0];
      px[1] = background->channels >= 3 ? bp[1] : bp[0];
      px[2] = background->channels >= 3 ? bp[2] : bp[0];
    } else {
      px[0] = px[1] = px[2] = 255;
    }
  }
  return img;
}

std::vector<fs::path> list_backgrounds(const std::string& dir) {
  std::vector<fs::path> files;
  if (dir.empty()) return files;
  if (!fs::is_directory(dir)) throw InputError("background directory not found: " + dir);
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".png")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

void render_instance(const PipelineConfig& config, const fs::path& mesh_path,
                     std::size_t instance_index, const std::vector<fs::path>& backgrounds,
                     std::vector<fs::path>& manifests) {
  const Mesh raw = load_mesh(mesh_path);
  auto [mesh, record] = normalize_mesh(raw);

  const std::string stem = mesh_path.stem().string();
  const fs::path dir = fs::path(config.out_dir) / stem;
  fs::create_directories(dir);

  Manifest manifest;
  manifest.instance = stem;
  manifest.mesh = "mesh_nocs.ply";
  manifest.normalization = record;
  manifest.width = config.width;
  manifest.height = config.height;
  manifest.seed = config.seed;
  save_mesh_ply(dir / manifest.mesh, mesh);

  const std::uint64_t camera_seed = mix_seed(config.seed, instance_index);
  const auto cameras = sample_cameras(config.views, config.radius_min, config.radius_max,
                                      camera_seed, config.width, config.height);
  const Bvh bvh(mesh);

  for (int i = 0; i < config.views; ++i) {
    const ViewRender render = render_view(mesh, bvh, cameras[i]);

    ViewEntry entry;
    entry.index = i;
    entry.camera = cameras[i];
    entry.visible = view_name(i, "nocs.png");
    entry.occluded = view_name(i, "xnocs.png");
    entry.mask_visible = view_name(i, "mask_visible.png");
    entry.mask_occluded = view_name(i, "mask_occluded.png");
    save_map(dir / entry.visible, render.visible);
    save_map(dir / entry.occluded, render.occluded);
    save_mask(dir / entry.mask_visible, mask_of(render.visible));
    save_mask(dir / entry.mask_occluded, mask_of(render.occluded));
    if (render.peeled_color) {
      entry.peeled_color = view_name(i, "peeled.png");
      save_map(dir / *entry.peeled_color, *render.peeled_color);
    }
    if (render.visible_color) {
      Image8 background;
      const Image8* bg = nullptr;
      if (!backgrounds.empty()) {
        const DecodedPng png = decode_png(read_file(backgrounds[i % backgrounds.size()]));
        if (png.bit_depth == 8) {
          background = {png.width, png.height, png.channels, png.data8};
          bg = &background;
        }
      }
      entry.rgb = view_name(i, "rgb.png");
      const auto bytes = encode_png(composite_rgb(*render.visible_color, bg));
      write_file(dir / *entry.rgb, bytes);
    }
    manifest.views.push_back(std::move(entry));
  }

  const fs::path manifest_path = dir / "manifest.json";
  save_manifest(manifest_path, manifest);
  manifests.push_back(manifest_path);
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
  if (config.out_dir.empty()) throw InputError("pipeline: output directory not set");
  if (config.meshes.empty()) throw InputError("pipeline: no input meshes");
  if (config.views < 1) throw InputError("pipeline: views must be >= 1");
  fs::create_directories(config.out_dir);
  const auto backgrounds = list_backgrounds(config.background_dir);

  PipelineResult result;
  for (std::size_t i = 0; i < config.meshes.size(); ++i) {
    const fs::path mesh_path(config.meshes[i]);
    try {
      render_instance(config, mesh_path, i, backgrounds, result.manifests);
    } catch (const std::exception& e) {
      result.errors.push_back(mesh_path.string() + ": " + e.what());
      // Drop partial outputs so no manifest ever references missing files.
      std::error_code ec;
      fs::remove_all(fs::path(config.out_dir) / mesh_path.stem(), ec);
    }
  }
  return result;
}

NocsMap corrupt_map(const NocsMap& map, const NoiseModel& noise, std::uint64_t seed) {
  Rng rng(seed);
  NocsMap out(map.width, map.height, map.kind);
  for (std::size_t i = 0; i < map.pixels.size(); ++i) {
    const NocsPixel& p = map.pixels[i];
    if (!p.valid) continue;
    if (noise.dropout > 0.0 && rng.uniform() < noise.dropout) continue;
    Vec3 c = p.coord;
    if (noise.sigma > 0.0) {
      c.x += noise.sigma * rng.normal();
      c.y += noise.sigma * rng.normal();
      c.z += noise.sigma * rng.normal();
    }
    out.pixels[i] = {true, clamp_unit(c)};
  }
  return out;
}

std::vector<SweepRow> run_view_sweep(const Manifest& manifest, const fs::path& manifest_dir,
                                     const PointCloud& reference, const SweepOptions& options) {
  const int available = static_cast<int>(manifest.views.size());
  if (options.seeds < 1) throw InputError("sweep: seeds must be >= 1");
  for (int k : options.view_counts)
    if (k < 1 || k > available)
      throw InputError("sweep: view count " + std::to_string(k) + " out of range (1.." +
                       std::to_string(available) + ")");

  // Load every ground-truth map pair once.
  std::vector<NocsMap> visible, occluded;
  visible.reserve(available);
  occluded.reserve(available);
  for (const auto& view : manifest.views) {
    visible.push_back(load_map(manifest_dir / view.visible, MapKind::Visible));
    occluded.push_back(load_map(manifest_dir / view.occluded, MapKind::Occluded));
  }

  std::vector<SweepRow> rows;
  for (int k : options.view_counts) {
    SweepRow row;
    row.k = k;
    for (int s = 0; s < options.seeds; ++s) {
      const std::uint64_t seed = mix_seed(options.base_seed, std::uint64_t(s));
      // Per-seed view permutation; k-view subsets are nested prefixes so
      // adding views can only extend coverage.
      std::vector<int> perm(available);
      for (int i = 0; i < available; ++i) perm[i] = i;
      Rng shuffle_rng(seed);
      for (int i = available - 1; i > 0; --i)
        std::swap(perm[i], perm[shuffle_rng.uniform_int(std::uint64_t(i) + 1)]);

      std::vector<PointCloud> readouts;
      readouts.reserve(2 * k);
      for (int j = 0; j < k; ++j) {
        const int view = perm[j];
        const std::uint64_t vseed = mix_seed(seed, std::uint64_t(view) + 1);
        readouts.push_back(readout(corrupt_map(visible[view], options.noise, vseed)));
        readouts.push_back(readout(corrupt_map(occluded[view], options.noise, vseed + 1)));
      }
      const PointCloud united = union_clouds(readouts);
      if (united.points.empty())
        throw NumericError("sweep: union of selected views is empty");
      row.per_seed.push_back(chamfer(united, reference).total_scaled);
    }
    std::vector<double> sorted = row.per_seed;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    row.median_total_scaled = sorted.size() % 2 == 1
                                  ? sorted[mid]
                                  : 0.5 * (sorted[mid - 1] + sorted[mid]);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace xnocs
