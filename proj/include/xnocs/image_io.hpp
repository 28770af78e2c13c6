#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace xnocs {

// 16-bit-per-channel image, host byte order.
struct Image16 {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint16_t> data;  // row-major, interleaved
};

// 8-bit-per-channel image.
struct Image8 {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;
};

// Decoded PNG of either depth; exactly one of data16/data8 is populated.
struct DecodedPng {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint16_t> data16;
  std::vector<std::uint8_t> data8;
};

std::vector<std::uint8_t> encode_png(const Image16& image);
std::vector<std::uint8_t> encode_png(const Image8& image);

// Decodes any grayscale/RGB/RGBA PNG at its native bit depth. Palette images
// are expanded to RGB. Throws InputError on malformed streams.
DecodedPng decode_png(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace xnocs
