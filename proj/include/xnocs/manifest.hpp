#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "xnocs/normalize.hpp"
#include "xnocs/types.hpp"

namespace xnocs {

// One rendered view: file paths relative to the manifest location plus the
// full camera that produced it.
struct ViewEntry {
  int index = 0;
  std::string visible;
  std::string occluded;
  std::string mask_visible;
  std::string mask_occluded;
  std::optional<std::string> peeled_color;
  std::optional<std::string> rgb;
  Camera camera;
};

struct Manifest {
  std::string instance;
  std::string mesh;  // normalized mesh, relative path
  NormalizationRecord normalization;
  int width = 0;
  int height = 0;
  std::uint64_t seed = 0;
  std::vector<ViewEntry> views;
};

// Serialization is key-ordered and reproducible byte-for-byte.
std::string manifest_to_json(const Manifest& manifest);
Manifest manifest_from_json(const std::string& text);

void save_manifest(const std::filesystem::path& path, const Manifest& manifest);
Manifest load_manifest(const std::filesystem::path& path);

}  // namespace xnocs
