#include "retouch/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "retouch/color.hpp"

namespace retouch {

IoError::IoError(const std::string& message)
    : std::runtime_error("IoError: " + message) {}

namespace {

struct ByteReader {
  const std::vector<std::uint8_t>* bytes;
  std::size_t pos = 0;
};

void read_callback(png_structp png, png_bytep out, png_size_t n) {
  auto* reader = static_cast<ByteReader*>(png_get_io_ptr(png));
  if (reader->pos + n > reader->bytes->size())
    png_error(png, "unexpected end of PNG stream");
  std::memcpy(out, reader->bytes->data() + reader->pos, n);
  reader->pos += n;
}

void write_callback(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + n);
}

void flush_callback(png_structp) {}

struct DecodedPng {
  png_uint_32 width = 0, height = 0;
  int bit_depth = 0;
  int channels = 0;
  std::vector<std::uint16_t> samples;  // interleaved, host byte order
};

// Decodes to interleaved RGB (16-bit samples scaled from the source depth)
// or, when `keep_gray` is set, to a single 8-bit channel.
DecodedPng decode(const std::vector<std::uint8_t>& bytes, bool keep_gray) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("cannot allocate PNG reader");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("cannot allocate PNG info");
  }
  std::vector<png_bytep> rows;
  std::vector<std::uint8_t> raw;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("malformed PNG stream");
  }
  ByteReader reader{&bytes};
  png_set_read_fn(png, &reader, read_callback);
  png_read_info(png, info);

  DecodedPng out;
  out.width = png_get_image_width(png, info);
  out.height = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);

  if (keep_gray) {
    if (color_type != PNG_COLOR_TYPE_GRAY || depth != 8) {
      png_destroy_read_struct(&png, &info, nullptr);
      throw IoError("segmentation must be an 8-bit grayscale PNG");
    }
  } else {
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8)
      png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
      png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    if (depth == 16) png_set_swap(png);  // network order -> host LE
  }
  png_read_update_info(png, info);
  depth = png_get_bit_depth(png, info);
  out.bit_depth = depth;
  out.channels = png_get_channels(png, info);

  const std::size_t rowbytes = png_get_rowbytes(png, info);
  raw.resize(rowbytes * out.height);
  rows.resize(out.height);
  for (png_uint_32 r = 0; r < out.height; ++r) rows[r] = raw.data() + r * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n = static_cast<std::size_t>(out.width) * out.height * out.channels;
  out.samples.resize(n);
  if (depth == 16) {
    std::memcpy(out.samples.data(), raw.data(), n * 2);
  } else {
    for (std::size_t i = 0; i < n; ++i) out.samples[i] = raw[i];
  }
  return out;
}

Image image_from(const DecodedPng& d) {
  if (d.channels != 3) throw IoError("expected an RGB decode");
  const float scale = d.bit_depth == 16 ? 65535.0f : 255.0f;
  Image img(d.height, d.width);
  std::size_t i = 0;
  for (png_uint_32 r = 0; r < d.height; ++r)
    for (png_uint_32 c = 0; c < d.width; ++c) {
      img.r(r, c) = srgb_decode_f(static_cast<float>(d.samples[i++]) / scale);
      img.g(r, c) = srgb_decode_f(static_cast<float>(d.samples[i++]) / scale);
      img.b(r, c) = srgb_decode_f(static_cast<float>(d.samples[i++]) / scale);
    }
  return img;
}

}  // namespace

Image decode_png(const std::vector<std::uint8_t>& bytes) {
  return image_from(decode(bytes, /*keep_gray=*/false));
}

Image read_png(const std::string& path) { return decode_png(read_file(path)); }

std::vector<std::uint8_t> encode_png(const Image& img) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("cannot allocate PNG writer");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("cannot allocate PNG info");
  }
  std::vector<std::uint8_t> out;
  std::vector<std::uint16_t> row;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG encode failed");
  }
  png_set_write_fn(png, &out, write_callback, flush_callback);

  // Pinned settings: byte-stable output for identical images.
  png_set_compression_level(png, 6);
  png_set_filter(png, 0, PNG_FILTER_NONE);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()),
               static_cast<png_uint_32>(img.height()), 16, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_set_swap(png);  // host LE -> network order

  row.resize(static_cast<std::size_t>(img.width()) * 3);
  auto quantize = [](float linear) {
    const float s = srgb_encode_f(std::min(1.0f, std::max(0.0f, linear)));
    return static_cast<std::uint16_t>(std::lround(s * 65535.0f));
  };
  for (Eigen::Index r = 0; r < img.height(); ++r) {
    std::size_t i = 0;
    for (Eigen::Index c = 0; c < img.width(); ++c) {
      row[i++] = quantize(img.r(r, c));
      row[i++] = quantize(img.g(r, c));
      row[i++] = quantize(img.b(r, c));
    }
    png_write_row(png, reinterpret_cast<png_bytep>(row.data()));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void write_png(const Image& img, const std::string& path) {
  write_file(path, encode_png(img));
}

Segmentation decode_segmentation(const std::vector<std::uint8_t>& bytes) {
  const DecodedPng d = decode(bytes, /*keep_gray=*/true);
  Segmentation seg(d.height, d.width);
  std::size_t i = 0;
  for (png_uint_32 r = 0; r < d.height; ++r)
    for (png_uint_32 c = 0; c < d.width; ++c)
      seg(r, c) = static_cast<std::uint8_t>(d.samples[i++]);
  return seg;
}

Segmentation read_segmentation(const std::string& path) {
  return decode_segmentation(read_file(path));
}

void write_segmentation(const Segmentation& seg, const std::string& path) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("cannot allocate PNG writer");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("cannot allocate PNG info");
  }
  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> row;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG encode failed");
  }
  png_set_write_fn(png, &out, write_callback, flush_callback);
  png_set_compression_level(png, 6);
  png_set_filter(png, 0, PNG_FILTER_NONE);
  png_set_IHDR(png, info, static_cast<png_uint_32>(seg.cols()),
               static_cast<png_uint_32>(seg.rows()), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  row.resize(static_cast<std::size_t>(seg.cols()));
  for (Eigen::Index r = 0; r < seg.rows(); ++r) {
    for (Eigen::Index c = 0; c < seg.cols(); ++c) row[c] = seg(r, c);
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  write_file(path, out);
}

MaskBuffer read_mask_png(const std::string& path) {
  const Image img = decode_png(read_file(path));
  MaskBuffer mask(img.height(), img.width());
  for (Eigen::Index r = 0; r < img.height(); ++r)
    for (Eigen::Index c = 0; c < img.width(); ++c)
      mask(r, c) = srgb_encode_f(luminance(img.r(r, c), img.g(r, c), img.b(r, c)));
  return mask;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to '" + path + "'");
}

}  // namespace retouch
