#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "retouch/image.hpp"

namespace retouch {

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& message);
};

/// Reads an 8- or 16-bit PNG (gray, palette, RGB or RGBA) as linear-light
/// RGB. Samples are interpreted as sRGB-encoded and decoded on load.
Image read_png(const std::string& path);
Image decode_png(const std::vector<std::uint8_t>& bytes);

/// Writes a 16-bit RGB PNG with sRGB encoding. The encoder settings are
/// pinned so identical images produce identical bytes.
void write_png(const Image& img, const std::string& path);
std::vector<std::uint8_t> encode_png(const Image& img);

/// Single-channel 8-bit PNG of per-pixel category ids.
Segmentation read_segmentation(const std::string& path);
Segmentation decode_segmentation(const std::vector<std::uint8_t>& bytes);
void write_segmentation(const Segmentation& seg, const std::string& path);

/// Grayscale mask in [0,1] from any PNG (luminance of the decoded pixels).
MaskBuffer read_mask_png(const std::string& path);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace retouch
