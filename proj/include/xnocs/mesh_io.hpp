#pragma once

#include <filesystem>
#include <iosfwd>

#include "xnocs/types.hpp"

namespace xnocs {

enum class PlyFormat { Ascii, BinaryLittleEndian };

// Loads a mesh from .obj or .ply (dispatch on extension) and runs
// cleanup_mesh on the result. Throws InputError on parse failures.
Mesh load_mesh(const std::filesystem::path& path);

Mesh parse_obj(std::istream& in);
Mesh parse_ply_mesh(std::istream& in);

void save_mesh_ply(const std::filesystem::path& path, const Mesh& mesh,
                   PlyFormat format = PlyFormat::BinaryLittleEndian);

PointCloud load_cloud_ply(const std::filesystem::path& path);
void save_cloud_ply(const std::filesystem::path& path, const PointCloud& cloud,
                    PlyFormat format = PlyFormat::BinaryLittleEndian);

}  // namespace xnocs
