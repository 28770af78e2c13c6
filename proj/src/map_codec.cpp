#include "xnocs/map_codec.hpp"

#include <cmath>

#include "xnocs/error.hpp"
#include "xnocs/image_io.hpp"

namespace xnocs {

namespace {
constexpr double kScale = 65535.0;

std::uint16_t quantize(double c) {
  return static_cast<std::uint16_t>(std::lround(c * kScale));
}
}  // namespace

std::vector<std::uint8_t> encode_map(const NocsMap& map) {
  Image16 img;
  img.width = map.width;
  img.height = map.height;
  img.channels = 4;
  img.data.resize(std::size_t(map.width) * map.height * 4);
  for (std::size_t i = 0; i < map.pixels.size(); ++i) {
    const NocsPixel& p = map.pixels[i];
    std::uint16_t* px = img.data.data() + 4 * i;
    if (p.valid) {
      px[0] = quantize(p.coord.x);
      px[1] = quantize(p.coord.y);
      px[2] = quantize(p.coord.z);
      px[3] = 65535;
    } else {
      px[0] = px[1] = px[2] = px[3] = 0;
    }
  }
  return encode_png(img);
}

NocsMap decode_map(std::span<const std::uint8_t> bytes, MapKind kind) {
  const DecodedPng png = decode_png(bytes);
  if (png.bit_depth != 16)
    throw InputError("decode_map: unsupported bit depth " + std::to_string(png.bit_depth) +
                     " (expected 16)");
  if (png.channels != 4)
    throw InputError("decode_map: unsupported channel count " + std::to_string(png.channels) +
                     " (expected 4, RGBA)");
  NocsMap map(png.width, png.height, kind);
  for (std::size_t i = 0; i < map.pixels.size(); ++i) {
    const std::uint16_t* px = png.data16.data() + 4 * i;
    if (px[3] != 0)
      map.pixels[i] = {true, Vec3{px[0] / kScale, px[1] / kScale, px[2] / kScale}};
    else
      map.pixels[i] = {false, {}};
  }
  return map;
}

Mask mask_of(const NocsMap& map) {
  Mask mask(map.width, map.height);
  for (std::size_t i = 0; i < map.pixels.size(); ++i)
    mask.bits[i] = map.pixels[i].valid ? 1 : 0;
  return mask;
}

std::vector<std::uint8_t> encode_mask(const Mask& mask) {
  Image8 img;
  img.width = mask.width;
  img.height = mask.height;
  img.channels = 1;
  img.data.resize(mask.bits.size());
  for (std::size_t i = 0; i < mask.bits.size(); ++i) img.data[i] = mask.bits[i] ? 255 : 0;
  return encode_png(img);
}

Mask decode_mask(std::span<const std::uint8_t> bytes) {
  const DecodedPng png = decode_png(bytes);
  if (png.bit_depth != 8 || png.channels != 1)
    throw InputError("decode_mask: expected 8-bit grayscale PNG");
  Mask mask(png.width, png.height);
  for (std::size_t i = 0; i < mask.bits.size(); ++i) mask.bits[i] = png.data8[i] > 127 ? 1 : 0;
  return mask;
}

NocsMap decode_rgb_image(std::span<const std::uint8_t> bytes) {
  const DecodedPng png = decode_png(bytes);
  if (png.bit_depth != 8 || (png.channels != 3 && png.channels != 4))
    throw InputError("decode_rgb_image: expected 8-bit RGB or RGBA PNG");
  NocsMap map(png.width, png.height, MapKind::PeeledColor);
  const int ch = png.channels;
  for (std::size_t i = 0; i < map.pixels.size(); ++i) {
    const std::uint8_t* px = png.data8.data() + ch * i;
    const bool valid = ch == 3 || px[3] != 0;
    if (valid)
      map.pixels[i] = {true, Vec3{px[0] / 255.0, px[1] / 255.0, px[2] / 255.0}};
    else
      map.pixels[i] = {false, {}};
  }
  return map;
}

void save_map(const std::filesystem::path& path, const NocsMap& map) {
  const auto bytes = encode_map(map);
  write_file(path, bytes);
}

NocsMap load_map(const std::filesystem::path& path, MapKind kind) {
  return decode_map(read_file(path), kind);
}

void save_mask(const std::filesystem::path& path, const Mask& mask) {
  const auto bytes = encode_mask(mask);
  write_file(path, bytes);
}

Mask load_mask(const std::filesystem::path& path) { return decode_mask(read_file(path)); }

}  // namespace xnocs
