#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace stereoflow::detail {

// Decoded raster: interleaved samples, one uint16 per sample regardless of
// the source bit depth.
struct RawImage {
  int width = 0;
  int height = 0;
  int channels = 1;
  int bit_depth = 8;  // 8 or 16
  std::vector<std::uint16_t> samples;
};

RawImage png_decode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> png_encode(const RawImage& image);

RawImage pnm_decode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> pnm_encode(const RawImage& image);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);

bool has_suffix(const std::string& s, const std::string& suffix);

}  // namespace stereoflow::detail
