// xnocs: NOCS / X-NOCS toolchain driver.
//
// Subcommands: normalize, render, aggregate, chamfer, pose, filter,
// equi-check, sweep. Exit codes: 0 success, 1 input error, 2 numerical
// failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "xnocs/aggregate.hpp"
#include "xnocs/error.hpp"
#include "xnocs/image_io.hpp"
#include "xnocs/map_codec.hpp"
#include "xnocs/mesh_io.hpp"
#include "xnocs/metrics.hpp"
#include "xnocs/neural.hpp"
#include "xnocs/normalize.hpp"
#include "xnocs/peeler.hpp"
#include "xnocs/pipeline.hpp"
#include "xnocs/pose.hpp"
#include "xnocs/postproc.hpp"
#include "xnocs/rng.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::string token;
  std::istringstream ss(text);
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    out.push_back(std::stoi(token));
  }
  return out;
}

void parse_size(const std::string& text, int& width, int& height) {
  const auto x = text.find('x');
  if (x == std::string::npos)
    throw xnocs::InputError("--size expects WxH, e.g. 128x128");
  width = std::stoi(text.substr(0, x));
  height = std::stoi(text.substr(x + 1));
  if (width <= 0 || height <= 0) throw xnocs::InputError("--size must be positive");
}

// ---------------------------------------------------------------------------
// equi-check: permutation-equivariance and gradient self-test
// ---------------------------------------------------------------------------

xnocs::FeatureSet random_features(std::size_t n, std::size_t dim, xnocs::Rng& rng) {
  xnocs::FeatureSet x;
  for (std::size_t i = 0; i < n; ++i) {
    xnocs::Tensor t({dim});
    for (auto& v : t.data) v = rng.uniform(-1.0, 1.0);
    x.features.push_back(std::move(t));
  }
  return x;
}

xnocs::EquivariantParams random_params(std::size_t dim, xnocs::Pool pool,
                                       xnocs::Nonlinearity nl, xnocs::Rng& rng) {
  xnocs::EquivariantParams p;
  p.dim = dim;
  p.pool = pool;
  p.nonlinearity = nl;
  p.lambda_weight.resize(dim * dim);
  p.gamma_weight.resize(dim * dim);
  p.bias.resize(dim);
  for (auto& v : p.lambda_weight) v = rng.uniform(-1.0, 1.0);
  for (auto& v : p.gamma_weight) v = rng.uniform(-1.0, 1.0);
  for (auto& v : p.bias) v = rng.uniform(-0.5, 0.5);
  return p;
}

double equivariance_deviation(const xnocs::EquivariantParams& params,
                              const xnocs::FeatureSet& x, const std::vector<int>& perm) {
  xnocs::FeatureSet permuted;
  for (int i : perm) permuted.features.push_back(x.features[i]);
  const auto y = xnocs::equivariant_layer(params, x);
  const auto y_perm = xnocs::equivariant_layer(params, permuted);
  double dev = 0.0;
  for (std::size_t i = 0; i < perm.size(); ++i)
    for (std::size_t e = 0; e < y.features[0].size(); ++e)
      dev = std::max(dev, std::abs(y_perm.features[i].data[e] -
                                   y.features[perm[i]].data[e]));
  return dev;
}

int run_equi_check(int n, int dim, std::uint64_t seed) {
  xnocs::Rng rng(seed);
  double max_equi_dev = 0.0;
  double max_grad_err = 0.0;

  for (xnocs::Pool pool : {xnocs::Pool::Average, xnocs::Pool::Max})
    for (xnocs::Nonlinearity nl : {xnocs::Nonlinearity::ReLU, xnocs::Nonlinearity::Identity}) {
      const auto params = random_params(dim, pool, nl, rng);
      const auto x = random_features(n, dim, rng);
      for (int trial = 0; trial < 32; ++trial) {
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = n - 1; i > 0; --i)
          std::swap(perm[i], perm[rng.uniform_int(std::uint64_t(i) + 1)]);
        max_equi_dev = std::max(max_equi_dev, equivariance_deviation(params, x, perm));
      }

      // Central finite differences on a scalar projection of the output.
      xnocs::FeatureSet upstream = random_features(n, dim, rng);
      const auto grads = xnocs::equivariant_backward(params, x, upstream);
      const double h = 1e-5;
      auto objective = [&](const xnocs::FeatureSet& probe) {
        const auto y = xnocs::equivariant_layer(params, probe);
        double s = 0.0;
        for (std::size_t i = 0; i < y.n(); ++i)
          for (std::size_t e = 0; e < y.features[i].size(); ++e)
            s += y.features[i].data[e] * upstream.features[i].data[e];
        return s;
      };
      for (int probe = 0; probe < 16; ++probe) {
        const std::size_t vi = rng.uniform_int(n);
        const std::size_t el = rng.uniform_int(dim);
        xnocs::FeatureSet xm = x;
        xnocs::FeatureSet xp = x;
        xp.features[vi].data[el] += h;
        xm.features[vi].data[el] -= h;
        const double fd = (objective(xp) - objective(xm)) / (2.0 * h);
        const double an = grads.x.features[vi].data[el];
        const double err = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6});
        max_grad_err = std::max(max_grad_err, err);
      }
    }

  Json out;
  out["n"] = n;
  out["dim"] = dim;
  out["seed"] = seed;
  out["max_equivariance_deviation"] = max_equi_dev;
  out["max_gradient_rel_error"] = max_grad_err;
  out["pass"] = max_equi_dev <= 1e-12 && max_grad_err <= 1e-4;
  std::cout << out.dump(2) << "\n";
  return out["pass"].get<bool>() ? 0 : 2;
}

Json pose_to_json(const xnocs::PoseEstimate& est) {
  Json j;
  j["projection"] = est.projection;
  j["intrinsics"] = est.intrinsics.m;
  j["rotation"] = est.rotation.m;
  j["translation"] = {est.translation.x, est.translation.y, est.translation.z};
  j["reprojection_rmse"] = est.reprojection_rmse;
  return j;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"NOCS / X-NOCS shape-representation toolchain"};
  app.require_subcommand(1);

  // normalize ---------------------------------------------------------------
  auto* cmd_norm = app.add_subcommand("normalize", "Normalize a mesh into the unit NOCS cube");
  std::string norm_in, norm_out, norm_record;
  bool norm_ascii = false;
  cmd_norm->add_option("input", norm_in, "input mesh (.obj or .ply)")->required();
  cmd_norm->add_option("output", norm_out, "output mesh (.ply)")->required();
  cmd_norm->add_option("--record", norm_record, "write the normalization record as JSON");
  cmd_norm->add_flag("--ascii", norm_ascii, "write ASCII PLY");
  cmd_norm->callback([&] {
    const xnocs::Mesh mesh = xnocs::load_mesh(norm_in);
    auto [normalized, record] = xnocs::normalize_mesh(mesh);
    xnocs::save_mesh_ply(norm_out, normalized,
                         norm_ascii ? xnocs::PlyFormat::Ascii
                                    : xnocs::PlyFormat::BinaryLittleEndian);
    if (!norm_record.empty()) xnocs::save_record(norm_record, record);
  });

  // render --------------------------------------------------------------------
  auto* cmd_render = app.add_subcommand("render", "Render ground-truth (X-)NOCS maps");
  std::vector<std::string> render_meshes;
  std::string render_config, render_size, render_out, render_backgrounds;
  int render_views = -1;
  std::int64_t render_seed = -1;
  double render_rmin = -1.0, render_rmax = -1.0;
  cmd_render->add_option("meshes", render_meshes, "input meshes");
  cmd_render->add_option("--config", render_config, "pipeline config JSON");
  cmd_render->add_option("--views", render_views, "views per instance");
  cmd_render->add_option("--seed", render_seed, "camera sampling seed");
  cmd_render->add_option("--size", render_size, "image size WxH");
  cmd_render->add_option("--radius-min", render_rmin, "camera shell inner radius (NOCS units)");
  cmd_render->add_option("--radius-max", render_rmax, "camera shell outer radius (NOCS units)");
  cmd_render->add_option("--out", render_out, "output directory");
  cmd_render->add_option("--backgrounds", render_backgrounds,
                         "directory of PNG backgrounds for RGB composites");
  cmd_render->callback([&] {
    xnocs::PipelineConfig config;
    if (!render_config.empty()) config = xnocs::load_config(render_config);
    for (const auto& m : render_meshes) config.meshes.push_back(m);
    if (render_views > 0) config.views = render_views;
    if (render_seed >= 0) config.seed = static_cast<std::uint64_t>(render_seed);
    if (!render_size.empty()) parse_size(render_size, config.width, config.height);
    if (render_rmin > 0.0) config.radius_min = render_rmin;
    if (render_rmax > 0.0) config.radius_max = render_rmax;
    if (!render_out.empty()) config.out_dir = render_out;
    if (!render_backgrounds.empty()) config.background_dir = render_backgrounds;

    const xnocs::PipelineResult result = xnocs::run_pipeline(config);
    for (const auto& m : result.manifests) std::cout << m.string() << "\n";
    for (const auto& e : result.errors) std::cerr << "error: " << e << "\n";
    if (!result.errors.empty()) throw xnocs::InputError("some instances failed");
  });

  // aggregate -----------------------------------------------------------------
  auto* cmd_agg = app.add_subcommand("aggregate", "Union per-view readouts into a point cloud");
  std::string agg_manifest, agg_views, agg_out;
  double agg_dedup = 0.0;
  bool agg_ascii = false, agg_no_color = false;
  cmd_agg->add_option("manifest", agg_manifest, "manifest JSON")->required();
  cmd_agg->add_option("--views", agg_views, "comma-separated view indices (default all)");
  cmd_agg->add_option("--dedup", agg_dedup, "voxel dedup cell size (NOCS units)");
  cmd_agg->add_option("--out", agg_out, "output .ply")->required();
  cmd_agg->add_flag("--ascii", agg_ascii, "write ASCII PLY");
  cmd_agg->add_flag("--no-color", agg_no_color, "emit an uncolored cloud");
  cmd_agg->callback([&] {
    const xnocs::Manifest manifest = xnocs::load_manifest(agg_manifest);
    const fs::path dir = fs::path(agg_manifest).parent_path();
    std::vector<int> views;
    if (agg_views.empty()) {
      views.resize(manifest.views.size());
      std::iota(views.begin(), views.end(), 0);
    } else {
      views = parse_int_list(agg_views);
    }
    std::vector<xnocs::PointCloud> readouts;
    for (int v : views) {
      if (v < 0 || v >= static_cast<int>(manifest.views.size()))
        throw xnocs::InputError("view index " + std::to_string(v) + " out of range");
      const auto& entry = manifest.views[v];
      const auto visible = xnocs::load_map(dir / entry.visible, xnocs::MapKind::Visible);
      const auto occluded = xnocs::load_map(dir / entry.occluded, xnocs::MapKind::Occluded);
      // Visible points take the view's RGB image, occluded points the
      // peeled-color map.
      std::optional<xnocs::NocsMap> rgb, peel;
      if (!agg_no_color && entry.rgb)
        rgb = xnocs::decode_rgb_image(xnocs::read_file(dir / *entry.rgb));
      if (!agg_no_color && entry.peeled_color)
        peel = xnocs::load_map(dir / *entry.peeled_color, xnocs::MapKind::PeeledColor);
      readouts.push_back(xnocs::readout(visible, rgb ? &*rgb : nullptr));
      readouts.push_back(xnocs::readout(occluded, peel ? &*peel : nullptr));
    }
    const auto cloud = xnocs::union_clouds(
        readouts, agg_dedup > 0.0 ? std::optional<double>(agg_dedup) : std::nullopt);
    xnocs::save_cloud_ply(agg_out, cloud,
                          agg_ascii ? xnocs::PlyFormat::Ascii
                                    : xnocs::PlyFormat::BinaryLittleEndian);
    std::cout << cloud.size() << " points -> " << agg_out << "\n";
  });

  // chamfer ---------------------------------------------------------------------
  auto* cmd_chamfer = app.add_subcommand("chamfer", "Two-way Chamfer distance (x100)");
  std::string chamfer_a, chamfer_b;
  bool chamfer_brute = false;
  cmd_chamfer->add_option("a", chamfer_a, "first cloud (.ply)")->required();
  cmd_chamfer->add_option("b", chamfer_b, "second cloud (.ply)")->required();
  cmd_chamfer->add_flag("--brute", chamfer_brute, "use the O(n^2) scan");
  cmd_chamfer->callback([&] {
    const auto a = xnocs::load_cloud_ply(chamfer_a);
    const auto b = xnocs::load_cloud_ply(chamfer_b);
    const auto r = chamfer_brute ? xnocs::chamfer_bruteforce(a, b) : xnocs::chamfer(a, b);
    Json j;
    j["forward_term"] = r.forward_term;
    j["backward_term"] = r.backward_term;
    j["total_scaled"] = r.total_scaled;
    std::cout << j.dump(2) << "\n";
  });

  // pose ----------------------------------------------------------------------
  auto* cmd_pose = app.add_subcommand("pose", "Camera pose from a NOCS map by DLT");
  std::string pose_map;
  int pose_stride = 1;
  cmd_pose->add_option("map", pose_map, "NOCS map (.png)")->required();
  cmd_pose->add_option("--stride", pose_stride, "pixel sampling stride");
  cmd_pose->callback([&] {
    const auto map = xnocs::load_map(pose_map);
    const auto corr = xnocs::correspondences_from_map(map, pose_stride);
    const auto est = xnocs::dlt_pose(corr);
    std::cout << pose_to_json(est).dump(2) << "\n";
  });

  // filter ----------------------------------------------------------------------
  auto* cmd_filter = app.add_subcommand("filter", "Bilateral map filter / outlier removal");
  std::string filter_in, filter_out;
  double filter_sigma_s = 2.0, filter_sigma_r = 0.05, filter_mult = 2.0;
  int filter_radius = 5, filter_k = 16;
  cmd_filter->add_option("input", filter_in, "input map (.png) or cloud (.ply)")->required();
  cmd_filter->add_option("--out", filter_out, "output path")->required();
  cmd_filter->add_option("--sigma-spatial", filter_sigma_s, "bilateral spatial sigma (px)");
  cmd_filter->add_option("--sigma-range", filter_sigma_r, "bilateral range sigma (NOCS)");
  cmd_filter->add_option("--radius", filter_radius, "bilateral window radius (px)");
  cmd_filter->add_option("--k", filter_k, "outlier filter neighbor count");
  cmd_filter->add_option("--mult", filter_mult, "outlier filter stddev multiplier");
  cmd_filter->callback([&] {
    const std::string ext = fs::path(filter_in).extension().string();
    if (ext == ".png") {
      const auto map = xnocs::load_map(filter_in);
      const auto filtered =
          xnocs::bilateral_filter(map, filter_sigma_s, filter_sigma_r, filter_radius);
      xnocs::save_map(filter_out, filtered);
    } else if (ext == ".ply") {
      const auto cloud = xnocs::load_cloud_ply(filter_in);
      const auto filtered = xnocs::statistical_outlier_removal(cloud, filter_k, filter_mult);
      xnocs::save_cloud_ply(filter_out, filtered);
      std::cout << cloud.size() - filtered.size() << " points removed\n";
    } else {
      throw xnocs::InputError("filter: expected .png or .ply input");
    }
  });

  // equi-check -------------------------------------------------------------------
  auto* cmd_equi = app.add_subcommand("equi-check",
                                      "Equivariance and gradient self-test for the set layers");
  int equi_n = 5, equi_dim = 64;
  std::uint64_t equi_seed = 0;
  cmd_equi->add_option("--n", equi_n, "number of views");
  cmd_equi->add_option("--dim", equi_dim, "feature dimension");
  cmd_equi->add_option("--seed", equi_seed, "random seed");
  int equi_status = 0;
  cmd_equi->callback([&] { equi_status = run_equi_check(equi_n, equi_dim, equi_seed); });

  // sweep --------------------------------------------------------------------------
  auto* cmd_sweep = app.add_subcommand("sweep", "Chamfer vs view count, with optional noise");
  std::string sweep_manifest, sweep_reference, sweep_views = "1,2,3,5,10,20";
  double sweep_sigma = 0.0, sweep_dropout = 0.0;
  int sweep_seeds = 20;
  std::uint64_t sweep_seed = 0;
  cmd_sweep->add_option("manifest", sweep_manifest, "manifest JSON")->required();
  cmd_sweep->add_option("--reference", sweep_reference, "reference cloud (.ply)")->required();
  cmd_sweep->add_option("--views", sweep_views, "comma-separated view counts");
  cmd_sweep->add_option("--sigma", sweep_sigma, "coordinate noise sigma (NOCS units)");
  cmd_sweep->add_option("--dropout", sweep_dropout, "valid-pixel dropout probability");
  cmd_sweep->add_option("--seeds", sweep_seeds, "number of random seeds");
  cmd_sweep->add_option("--seed", sweep_seed, "base seed");
  cmd_sweep->callback([&] {
    const xnocs::Manifest manifest = xnocs::load_manifest(sweep_manifest);
    const fs::path dir = fs::path(sweep_manifest).parent_path();
    const auto reference = xnocs::load_cloud_ply(sweep_reference);
    xnocs::SweepOptions options;
    options.view_counts = parse_int_list(sweep_views);
    options.noise = {sweep_sigma, sweep_dropout};
    options.seeds = sweep_seeds;
    options.base_seed = sweep_seed;
    const auto rows = xnocs::run_view_sweep(manifest, dir, reference, options);
    Json out = Json::array();
    for (const auto& row : rows) {
      Json r;
      r["k"] = row.k;
      r["median_total_scaled"] = row.median_total_scaled;
      r["per_seed"] = row.per_seed;
      out.push_back(std::move(r));
    }
    std::cout << out.dump(2) << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return equi_status;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const xnocs::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const xnocs::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
