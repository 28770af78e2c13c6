#include "xnocs/image_io.hpp"

#include <png.h>

#include <bit>
#include <csetjmp>
#include <cstring>
#include <fstream>

#include "xnocs/error.hpp"

namespace xnocs {

namespace {

struct ByteSink {
  std::vector<std::uint8_t> bytes;
};

struct ByteSource {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

void sink_write(png_structp png, png_bytep data, png_size_t len) {
  auto* sink = static_cast<ByteSink*>(png_get_io_ptr(png));
  sink->bytes.insert(sink->bytes.end(), data, data + len);
}

void sink_flush(png_structp) {}

void source_read(png_structp png, png_bytep out, png_size_t len) {
  auto* src = static_cast<ByteSource*>(png_get_io_ptr(png));
  if (src->offset + len > src->bytes.size()) png_error(png, "truncated stream");
  std::memcpy(out, src->bytes.data() + src->offset, len);
  src->offset += len;
}

// libpng is a C library; errors are reported by longjmp back to the caller,
// which then raises a proper exception with the stored message.
void on_error(png_structp png, png_const_charp msg) {
  auto* slot = static_cast<std::string*>(png_get_error_ptr(png));
  if (slot) *slot = msg;
  png_longjmp(png, 1);
}

void on_warning(png_structp, png_const_charp) {}

int color_type_for(int channels) {
  switch (channels) {
    case 1: return PNG_COLOR_TYPE_GRAY;
    case 2: return PNG_COLOR_TYPE_GRAY_ALPHA;
    case 3: return PNG_COLOR_TYPE_RGB;
    case 4: return PNG_COLOR_TYPE_RGBA;
    default: throw InputError("png: unsupported channel count " + std::to_string(channels));
  }
}

template <typename Pixel>
std::vector<std::uint8_t> encode_impl(int width, int height, int channels,
                                      const std::vector<Pixel>& data, int bit_depth) {
  if (width <= 0 || height <= 0) throw InputError("png: empty image");
  if (data.size() != std::size_t(width) * height * channels)
    throw InputError("png: pixel buffer size mismatch");
  const int color_type = color_type_for(channels);

  std::string errmsg;
  ByteSink sink;
  std::vector<png_bytep> rows(height);
  const std::size_t stride = std::size_t(width) * channels;
  for (int y = 0; y < height; ++y)
    rows[y] = reinterpret_cast<png_bytep>(const_cast<Pixel*>(data.data() + y * stride));

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &errmsg, on_error, on_warning);
  if (!png) throw Error("png: failed to allocate write struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("png: failed to allocate info struct");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("png: " + errmsg);
  }

  png_set_write_fn(png, &sink, sink_write, sink_flush);
  png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return std::move(sink.bytes);
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Image16& image) {
  return encode_impl(image.width, image.height, image.channels, image.data, 16);
}

std::vector<std::uint8_t> encode_png(const Image8& image) {
  return encode_impl(image.width, image.height, image.channels, image.data, 8);
}

DecodedPng decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
    throw InputError("png: not a PNG stream");

  std::string errmsg;
  DecodedPng out;
  ByteSource src{bytes};
  std::vector<png_bytep> rows;

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &errmsg, on_error, on_warning);
  if (!png) throw Error("png: failed to allocate read struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error("png: failed to allocate info struct");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw InputError("png: " + errmsg);
  }

  png_set_read_fn(png, &src, source_read);
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (png_get_bit_depth(png, info) == 16 && std::endian::native == std::endian::little)
    png_set_swap(png);
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = static_cast<int>(png_get_channels(png, info));
  out.bit_depth = static_cast<int>(png_get_bit_depth(png, info));

  const std::size_t stride = std::size_t(out.width) * out.channels;
  rows.resize(out.height);
  if (out.bit_depth == 16) {
    out.data16.resize(stride * out.height);
    for (int y = 0; y < out.height; ++y)
      rows[y] = reinterpret_cast<png_bytep>(out.data16.data() + y * stride);
  } else {
    out.data8.resize(stride * out.height);
    for (int y = 0; y < out.height; ++y) rows[y] = out.data8.data() + y * stride;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("short write to " + path.string());
}

}  // namespace xnocs
