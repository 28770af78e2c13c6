#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "xnocs/types.hpp"

namespace xnocs {

// Encodes a map as 16-bit RGBA PNG: channel = round(coord * 65535), alpha
// 65535 for valid pixels and 0 for invalid, invalid pixels store RGB = 0.
std::vector<std::uint8_t> encode_map(const NocsMap& map);

// Inverse of encode_map; validity round-trips exactly and coordinates within
// 1/65535 per component. The PNG kind is not stored in the stream, so the
// caller supplies it. Throws InputError naming the offending property on
// wrong bit depth or channel count.
NocsMap decode_map(std::span<const std::uint8_t> bytes, MapKind kind = MapKind::Visible);

Mask mask_of(const NocsMap& map);

// Masks serialize as 8-bit grayscale PNG, 255 for set bits.
std::vector<std::uint8_t> encode_mask(const Mask& mask);
Mask decode_mask(std::span<const std::uint8_t> bytes);

// Loads an 8-bit RGB(A) PNG as a PeeledColor-kind map (coord slot = RGB in
// [0,1]); pixels with zero alpha decode as invalid.
NocsMap decode_rgb_image(std::span<const std::uint8_t> bytes);

void save_map(const std::filesystem::path& path, const NocsMap& map);
NocsMap load_map(const std::filesystem::path& path, MapKind kind = MapKind::Visible);
void save_mask(const std::filesystem::path& path, const Mask& mask);
Mask load_mask(const std::filesystem::path& path);

}  // namespace xnocs
