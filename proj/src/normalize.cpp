#include "xnocs/normalize.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "xnocs/error.hpp"

namespace xnocs {

std::pair<Mesh, NormalizationRecord> normalize_mesh(const Mesh& mesh) {
  if (mesh.vertices.empty()) throw InputError("normalize: empty mesh");
  const Box3 box = mesh.bounds();
  const double diag = box.diagonal();
  if (!(diag > 0.0)) throw NumericError("normalize: bounding box diagonal is zero");

  NormalizationRecord record;
  record.translation = -box.center();
  record.scale = 1.0 / diag;

  Mesh out = mesh;
  for (auto& v : out.vertices) v = clamp_unit(record.apply(v));
  return {std::move(out), record};
}

PointCloud denormalize_points(const PointCloud& cloud, const NormalizationRecord& record) {
  PointCloud out = cloud;
  for (auto& p : out.points) p = record.invert(p);
  return out;
}

void save_record(const std::filesystem::path& path, const NormalizationRecord& record) {
  nlohmann::ordered_json j;
  j["translation"] = {record.translation.x, record.translation.y, record.translation.z};
  j["scale"] = record.scale;
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw InputError("cannot write " + path.string());
  os << j.dump(2) << "\n";
}

NormalizationRecord load_record(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open " + path.string());
  nlohmann::json j;
  try {
    is >> j;
    NormalizationRecord record;
    record.translation = {j.at("translation").at(0).get<double>(),
                          j.at("translation").at(1).get<double>(),
                          j.at("translation").at(2).get<double>()};
    record.scale = j.at("scale").get<double>();
    if (!(record.scale > 0.0)) throw InputError("normalization record: scale must be positive");
    return record;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("normalization record " + path.string() + ": " + e.what());
  }
}

}  // namespace xnocs
