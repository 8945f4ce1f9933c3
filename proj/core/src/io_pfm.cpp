// PFM: float32 raster, "Pf" (gray) / "PF" (RGB), rows stored bottom-up,
// negative scale marks little-endian payloads.

#include <cmath>
#include <cstring>

#include "detail/png_codec.hpp"
#include "stereoflow/io.hpp"

namespace stereoflow {

namespace {

std::string pfm_token(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
  while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
  std::string tok;
  while (pos < bytes.size() && !std::isspace(bytes[pos])) tok.push_back(char(bytes[pos++]));
  if (tok.empty()) throw IoError("pfm: malformed header");
  return tok;
}

}  // namespace

Field read_pfm(const std::string& path) {
  const auto bytes = detail::read_file_bytes(path);
  std::size_t pos = 0;
  const std::string magic = pfm_token(bytes, pos);
  int channels;
  if (magic == "Pf") {
    channels = 1;
  } else if (magic == "PF") {
    channels = 3;
  } else {
    throw IoError("pfm: bad magic");
  }
  const int w = std::stoi(pfm_token(bytes, pos));
  const int h = std::stoi(pfm_token(bytes, pos));
  const double scale = std::stod(pfm_token(bytes, pos));
  if (w <= 0 || h <= 0 || scale == 0.0) throw IoError("pfm: bad header values");
  if (pos >= bytes.size()) throw IoError("pfm: truncated header");
  ++pos;  // single whitespace after the scale line

  const bool little_endian = scale < 0.0;
  const std::size_t count = std::size_t(w) * h * channels;
  if (bytes.size() - pos < count * 4) throw IoError("pfm: truncated payload");

  Field f(h, w, channels);
  for (int row = 0; row < h; ++row) {
    const int y = h - 1 - row;  // bottom-up storage
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < channels; ++c) {
        std::uint8_t b[4];
        std::memcpy(b, &bytes[pos], 4);
        pos += 4;
        if (!little_endian) std::swap(b[0], b[3]), std::swap(b[1], b[2]);
        float v;
        std::memcpy(&v, b, 4);
        f(y, x, c) = v;
      }
    }
  }
  return f;
}

void write_pfm(const Field& field, const std::string& path) {
  if (field.channels() != 1 && field.channels() != 3) {
    throw IoError("pfm: expects 1 or 3 channels");
  }
  std::string header = std::string(field.channels() == 1 ? "Pf" : "PF") + "\n" +
                       std::to_string(field.width()) + " " +
                       std::to_string(field.height()) + "\n-1.0\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (int row = 0; row < field.height(); ++row) {
    const int y = field.height() - 1 - row;
    for (int x = 0; x < field.width(); ++x) {
      for (int c = 0; c < field.channels(); ++c) {
        const float v = float(field(y, x, c));
        std::uint8_t b[4];
        std::memcpy(b, &v, 4);
        out.insert(out.end(), b, b + 4);
      }
    }
  }
  detail::write_file_bytes(path, out);
}

}  // namespace stereoflow
