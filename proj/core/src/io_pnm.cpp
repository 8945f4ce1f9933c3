// Binary PGM (P5) and PPM (P6) with maxval up to 65535.

#include <cctype>

#include "detail/png_codec.hpp"
#include "stereoflow/errors.hpp"

namespace stereoflow::detail {

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
long next_token(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (std::isspace(bytes[pos])) {
      ++pos;
    } else if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
  if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
    throw IoError("pnm: malformed header");
  }
  long v = 0;
  while (pos < bytes.size() && std::isdigit(bytes[pos])) {
    v = v * 10 + (bytes[pos] - '0');
    if (v > 1 << 30) throw IoError("pnm: header value out of range");
    ++pos;
  }
  return v;
}

}  // namespace

RawImage pnm_decode(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw IoError("pnm: expected binary P5 or P6");
  }
  RawImage im;
  im.channels = bytes[1] == '5' ? 1 : 3;
  std::size_t pos = 2;
  im.width = int(next_token(bytes, pos));
  im.height = int(next_token(bytes, pos));
  const long maxval = next_token(bytes, pos);
  if (im.width <= 0 || im.height <= 0) throw IoError("pnm: bad dimensions");
  if (maxval <= 0 || maxval > 65535) throw IoError("pnm: bad maxval");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw IoError("pnm: malformed header");
  ++pos;  // single whitespace before payload

  im.bit_depth = maxval > 255 ? 16 : 8;
  const std::size_t count = std::size_t(im.width) * im.height * im.channels;
  const std::size_t payload = count * (im.bit_depth / 8);
  if (bytes.size() - pos < payload) throw IoError("pnm: truncated payload");
  im.samples.resize(count);
  if (im.bit_depth == 8) {
    for (std::size_t i = 0; i < count; ++i) im.samples[i] = bytes[pos + i];
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      im.samples[i] = std::uint16_t((bytes[pos + 2 * i] << 8) | bytes[pos + 2 * i + 1]);
    }
  }
  // Carry maxval through as full-scale: callers normalize by the depth.
  if (maxval != 255 && maxval != 65535) {
    const double scale = (im.bit_depth == 8 ? 255.0 : 65535.0) / double(maxval);
    for (auto& s : im.samples) {
      const double v = s * scale;
      s = std::uint16_t(v + 0.5);
    }
  }
  return im;
}

std::vector<std::uint8_t> pnm_encode(const RawImage& im) {
  if (im.channels != 1 && im.channels != 3) throw IoError("pnm: encode expects 1 or 3 channels");
  const int maxval = im.bit_depth == 8 ? 255 : 65535;
  std::string header = std::string(im.channels == 1 ? "P5" : "P6") + "\n" +
                       std::to_string(im.width) + " " + std::to_string(im.height) +
                       "\n" + std::to_string(maxval) + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  if (im.bit_depth == 8) {
    for (std::uint16_t s : im.samples) out.push_back(std::uint8_t(s));
  } else {
    for (std::uint16_t s : im.samples) {
      out.push_back(std::uint8_t(s >> 8));
      out.push_back(std::uint8_t(s & 0xff));
    }
  }
  return out;
}

}  // namespace stereoflow::detail
