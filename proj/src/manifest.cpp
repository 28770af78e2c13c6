#include "xnocs/manifest.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "xnocs/error.hpp"

namespace xnocs {

namespace {

using Json = nlohmann::ordered_json;

Json camera_to_json(const Camera& cam) {
  Json j;
  j["fx"] = cam.fx;
  j["fy"] = cam.fy;
  j["cx"] = cam.cx;
  j["cy"] = cam.cy;
  j["rotation"] = cam.rotation.m;
  j["translation"] = {cam.translation.x, cam.translation.y, cam.translation.z};
  j["width"] = cam.width;
  j["height"] = cam.height;
  return j;
}

Camera camera_from_json(const nlohmann::json& j) {
  Camera cam;
  cam.fx = j.at("fx").get<double>();
  cam.fy = j.at("fy").get<double>();
  cam.cx = j.at("cx").get<double>();
  cam.cy = j.at("cy").get<double>();
  const auto rot = j.at("rotation");
  if (rot.size() != 9) throw InputError("manifest: camera rotation must have 9 entries");
  for (int i = 0; i < 9; ++i) cam.rotation.m[i] = rot.at(i).get<double>();
  const auto tr = j.at("translation");
  if (tr.size() != 3) throw InputError("manifest: camera translation must have 3 entries");
  cam.translation = {tr.at(0).get<double>(), tr.at(1).get<double>(), tr.at(2).get<double>()};
  cam.width = j.at("width").get<int>();
  cam.height = j.at("height").get<int>();
  cam.validate();
  return cam;
}

}  // namespace

std::string manifest_to_json(const Manifest& manifest) {
  Json j;
  j["instance"] = manifest.instance;
  j["mesh"] = manifest.mesh;
  j["normalization"] = {
      {"translation",
       {manifest.normalization.translation.x, manifest.normalization.translation.y,
        manifest.normalization.translation.z}},
      {"scale", manifest.normalization.scale}};
  j["width"] = manifest.width;
  j["height"] = manifest.height;
  j["seed"] = manifest.seed;
  j["views"] = Json::array();
  for (const auto& view : manifest.views) {
    Json v;
    v["index"] = view.index;
    v["visible"] = view.visible;
    v["occluded"] = view.occluded;
    v["mask_visible"] = view.mask_visible;
    v["mask_occluded"] = view.mask_occluded;
    v["peeled_color"] = view.peeled_color ? Json(*view.peeled_color) : Json(nullptr);
    if (view.rgb) v["rgb"] = *view.rgb;
    v["camera"] = camera_to_json(view.camera);
    j["views"].push_back(std::move(v));
  }
  return j.dump(2) + "\n";
}

Manifest manifest_from_json(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    Manifest m;
    m.instance = j.at("instance").get<std::string>();
    m.mesh = j.at("mesh").get<std::string>();
    const auto& norm = j.at("normalization");
    m.normalization.translation = {norm.at("translation").at(0).get<double>(),
                                   norm.at("translation").at(1).get<double>(),
                                   norm.at("translation").at(2).get<double>()};
    m.normalization.scale = norm.at("scale").get<double>();
    m.width = j.at("width").get<int>();
    m.height = j.at("height").get<int>();
    m.seed = j.value("seed", std::uint64_t(0));
    for (const auto& vj : j.at("views")) {
      ViewEntry v;
      v.index = vj.at("index").get<int>();
      v.visible = vj.at("visible").get<std::string>();
      v.occluded = vj.at("occluded").get<std::string>();
      v.mask_visible = vj.at("mask_visible").get<std::string>();
      v.mask_occluded = vj.at("mask_occluded").get<std::string>();
      if (vj.contains("peeled_color") && !vj.at("peeled_color").is_null())
        v.peeled_color = vj.at("peeled_color").get<std::string>();
      if (vj.contains("rgb") && !vj.at("rgb").is_null())
        v.rgb = vj.at("rgb").get<std::string>();
      v.camera = camera_from_json(vj.at("camera"));
      m.views.push_back(std::move(v));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("manifest: ") + e.what());
  }
}

void save_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InputError("cannot write " + path.string());
  os << manifest_to_json(manifest);
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return manifest_from_json(text);
}

}  // namespace xnocs
