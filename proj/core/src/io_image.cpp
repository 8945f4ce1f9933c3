#include <cmath>

#include "detail/png_codec.hpp"
#include "stereoflow/io.hpp"

namespace stereoflow {

using detail::RawImage;

namespace {

Image raw_to_image(const RawImage& raw) {
  const double scale = raw.bit_depth == 8 ? 255.0 : 65535.0;
  Field f(raw.height, raw.width, raw.channels);
  for (std::size_t i = 0; i < f.size(); ++i) {
    f.data()[i] = raw.samples[i] / scale;
  }
  return Image(std::move(f));
}

RawImage image_to_raw(const Image& image, int bit_depth) {
  RawImage raw;
  raw.width = image.width();
  raw.height = image.height();
  raw.channels = image.channels();
  raw.bit_depth = bit_depth;
  const double scale = bit_depth == 8 ? 255.0 : 65535.0;
  const Field& f = image.field();
  raw.samples.resize(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    raw.samples[i] = std::uint16_t(std::lround(f.data()[i] * scale));
  }
  return raw;
}

}  // namespace

Image read_image(const std::string& path) {
  const auto bytes = detail::read_file_bytes(path);
  if (bytes.size() >= 8 && bytes[0] == 137 && bytes[1] == 'P') {
    return raw_to_image(detail::png_decode(bytes));
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) {
    return raw_to_image(detail::pnm_decode(bytes));
  }
  throw IoError("unsupported image format: " + path);
}

void write_image(const Image& image, const std::string& path) {
  if (detail::has_suffix(path, ".png")) {
    detail::write_file_bytes(path, detail::png_encode(image_to_raw(image, 8)));
  } else if (detail::has_suffix(path, ".pgm") || detail::has_suffix(path, ".ppm")) {
    if (detail::has_suffix(path, ".pgm") && image.channels() != 1) {
      throw IoError("pgm requires a single channel image");
    }
    if (detail::has_suffix(path, ".ppm") && image.channels() != 3) {
      throw IoError("ppm requires a 3-channel image");
    }
    detail::write_file_bytes(path, detail::pnm_encode(image_to_raw(image, 8)));
  } else {
    throw IoError("unsupported image extension: " + path);
  }
}

void write_image_png16(const Image& image, const std::string& path) {
  detail::write_file_bytes(path, detail::png_encode(image_to_raw(image, 16)));
}

}  // namespace stereoflow
