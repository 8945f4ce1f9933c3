// Flow and disparity exchange formats.

#include <cmath>
#include <cstring>

#include "detail/png_codec.hpp"
#include "stereoflow/io.hpp"

namespace stereoflow {

namespace {

constexpr float kFloTag = 202021.25f;

void push_le32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(std::uint8_t(v));
  out.push_back(std::uint8_t(v >> 8));
  out.push_back(std::uint8_t(v >> 16));
  out.push_back(std::uint8_t(v >> 24));
}

std::uint32_t read_le32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) |
         (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
}

float bits_to_float(std::uint32_t bits) {
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

std::uint32_t float_to_bits(float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  return bits;
}

FlowFile read_flo(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 12) throw IoError("flo: truncated header");
  if (bits_to_float(read_le32(&bytes[0])) != kFloTag) {
    throw IoError("flo: bad magic tag");
  }
  const std::int32_t w = std::int32_t(read_le32(&bytes[4]));
  const std::int32_t h = std::int32_t(read_le32(&bytes[8]));
  if (w <= 0 || h <= 0 || w > 1 << 20 || h > 1 << 20) {
    throw IoError("flo: dimensions out of range");
  }
  const std::size_t need = 12 + std::size_t(w) * h * 2 * 4;
  if (bytes.size() < need) throw IoError("flo: truncated payload");
  Field f(h, w, 2);
  std::size_t pos = 12;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      f(y, x, 0) = bits_to_float(read_le32(&bytes[pos]));
      f(y, x, 1) = bits_to_float(read_le32(&bytes[pos + 4]));
      pos += 8;
    }
  }
  return {CorrField(std::move(f)), Field(h, w, 1, 1.0)};
}

FlowFile read_flow_kitti(const std::vector<std::uint8_t>& bytes) {
  const detail::RawImage raw = detail::png_decode(bytes);
  if (raw.channels != 3 || raw.bit_depth != 16) {
    throw IoError("kitti flow png must be 16-bit with 3 channels");
  }
  Field f(raw.height, raw.width, 2);
  Field valid(raw.height, raw.width, 1);
  for (int y = 0; y < raw.height; ++y) {
    for (int x = 0; x < raw.width; ++x) {
      const std::size_t i = (std::size_t(y) * raw.width + x) * 3;
      f(y, x, 0) = (double(raw.samples[i]) - 32768.0) / 64.0;
      f(y, x, 1) = (double(raw.samples[i + 1]) - 32768.0) / 64.0;
      valid(y, x) = raw.samples[i + 2] > 0 ? 1.0 : 0.0;
    }
  }
  return {CorrField(std::move(f)), std::move(valid)};
}

}  // namespace

FlowFile read_flow(const std::string& path) {
  const auto bytes = detail::read_file_bytes(path);
  if (bytes.size() >= 4 && bits_to_float(read_le32(&bytes[0])) == kFloTag) {
    return read_flo(bytes);
  }
  if (bytes.size() >= 1 && bytes[0] == 137) {
    return read_flow_kitti(bytes);
  }
  throw IoError("unsupported flow format: " + path);
}

void write_flow(const CorrField& flow, const std::string& path, FlowFormat format) {
  if (format == FlowFormat::KittiPng) {
    write_flow_kitti(flow, Field(flow.height(), flow.width(), 1, 1.0), path);
    return;
  }
  std::vector<std::uint8_t> out;
  push_le32(out, float_to_bits(kFloTag));
  push_le32(out, std::uint32_t(flow.width()));
  push_le32(out, std::uint32_t(flow.height()));
  for (int y = 0; y < flow.height(); ++y) {
    for (int x = 0; x < flow.width(); ++x) {
      push_le32(out, float_to_bits(float(flow.u(y, x))));
      push_le32(out, float_to_bits(float(flow.v(y, x))));
    }
  }
  detail::write_file_bytes(path, out);
}

void write_flow_kitti(const CorrField& flow, const Field& valid,
                      const std::string& path) {
  require_same_extent(flow.field(), valid, "write_flow_kitti");
  detail::RawImage raw;
  raw.width = flow.width();
  raw.height = flow.height();
  raw.channels = 3;
  raw.bit_depth = 16;
  raw.samples.resize(std::size_t(raw.width) * raw.height * 3);
  auto quantize = [](double v) {
    const double q = std::lround(v * 64.0) + 32768.0;
    return std::uint16_t(std::clamp(q, 0.0, 65535.0));
  };
  for (int y = 0; y < raw.height; ++y) {
    for (int x = 0; x < raw.width; ++x) {
      const std::size_t i = (std::size_t(y) * raw.width + x) * 3;
      raw.samples[i] = quantize(flow.u(y, x));
      raw.samples[i + 1] = quantize(flow.v(y, x));
      raw.samples[i + 2] = valid(y, x) > 0.0 ? 1 : 0;
    }
  }
  detail::write_file_bytes(path, detail::png_encode(raw));
}

DisparityFile read_disparity(const std::string& path) {
  if (detail::has_suffix(path, ".pfm")) {
    Field f = read_pfm(path);
    if (f.channels() != 1) throw IoError("pfm disparity must be single channel");
    Field valid(f.height(), f.width(), 1);
    for (int y = 0; y < f.height(); ++y) {
      for (int x = 0; x < f.width(); ++x) {
        valid(y, x) = std::isfinite(f(y, x)) ? 1.0 : 0.0;
        if (!std::isfinite(f(y, x))) f(y, x) = 0.0;
      }
    }
    return {std::move(f), std::move(valid)};
  }
  const detail::RawImage raw = detail::png_decode(detail::read_file_bytes(path));
  if (raw.channels != 1 || raw.bit_depth != 16) {
    throw IoError("kitti disparity png must be 16-bit single channel");
  }
  Field f(raw.height, raw.width, 1);
  Field valid(raw.height, raw.width, 1);
  for (std::size_t i = 0; i < f.size(); ++i) {
    f.data()[i] = raw.samples[i] / 256.0;
    valid.data()[i] = raw.samples[i] > 0 ? 1.0 : 0.0;
  }
  return {std::move(f), std::move(valid)};
}

void write_disparity_kitti(const Field& disparity, const Field& valid,
                           const std::string& path) {
  require_same_extent(disparity, valid, "write_disparity_kitti");
  if (disparity.channels() != 1) throw IoError("disparity must be single channel");
  detail::RawImage raw;
  raw.width = disparity.width();
  raw.height = disparity.height();
  raw.channels = 1;
  raw.bit_depth = 16;
  raw.samples.resize(disparity.size());
  for (std::size_t i = 0; i < disparity.size(); ++i) {
    if (valid.data()[i] > 0.0) {
      const double q = std::clamp(std::round(disparity.data()[i] * 256.0), 1.0, 65535.0);
      raw.samples[i] = std::uint16_t(q);
    } else {
      raw.samples[i] = 0;  // 0 marks missing ground truth
    }
  }
  detail::write_file_bytes(path, detail::png_encode(raw));
}

Field read_mask_png(const std::string& path) {
  const detail::RawImage raw = detail::png_decode(detail::read_file_bytes(path));
  if (raw.channels != 1) throw IoError("mask png must be single channel");
  Field f(raw.height, raw.width, 1);
  for (std::size_t i = 0; i < f.size(); ++i) {
    f.data()[i] = raw.samples[i] > 0 ? 1.0 : 0.0;
  }
  return f;
}

void write_mask_png(const Field& mask, const std::string& path) {
  if (mask.channels() != 1) throw IoError("mask must be single channel");
  detail::RawImage raw;
  raw.width = mask.width();
  raw.height = mask.height();
  raw.channels = 1;
  raw.bit_depth = 8;
  raw.samples.resize(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    raw.samples[i] = mask.data()[i] > 0.0 ? 255 : 0;
  }
  detail::write_file_bytes(path, detail::png_encode(raw));
}

}  // namespace stereoflow
