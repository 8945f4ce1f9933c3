// Minimal PNG codec over zlib: 8/16-bit grayscale and RGB, non-interlaced,
// non-paletted — the subset the exchanged datasets actually use.

#include <zlib.h>

#include <cstring>
#include <fstream>

#include "detail/png_codec.hpp"
#include "stereoflow/errors.hpp"

namespace stereoflow::detail {

namespace {

constexpr std::uint8_t kSignature[8] = {137, 80, 78, 71, 13, 10, 26, 10};

std::uint32_t read_be32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

void push_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(std::uint8_t(v >> 24));
  out.push_back(std::uint8_t(v >> 16));
  out.push_back(std::uint8_t(v >> 8));
  out.push_back(std::uint8_t(v));
}

int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

void append_chunk(std::vector<std::uint8_t>& out, const char type[4],
                  const std::vector<std::uint8_t>& data) {
  push_be32(out, std::uint32_t(data.size()));
  const std::size_t type_at = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const std::uint32_t crc = ::crc32(0, out.data() + type_at, uInt(4 + data.size()));
  push_be32(out, crc);
}

}  // namespace

RawImage png_decode(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kSignature, 8) != 0) {
    throw IoError("png: bad signature");
  }

  RawImage im;
  int color_type = -1;
  std::vector<std::uint8_t> idat;
  bool saw_ihdr = false, saw_iend = false;

  std::size_t pos = 8;
  while (pos + 12 <= bytes.size() && !saw_iend) {
    const std::uint32_t len = read_be32(&bytes[pos]);
    if (pos + 12 + len > bytes.size()) throw IoError("png: truncated chunk");
    const char* type = reinterpret_cast<const char*>(&bytes[pos + 4]);
    const std::uint8_t* data = &bytes[pos + 8];
    const std::uint32_t crc_stored = read_be32(&bytes[pos + 8 + len]);
    const std::uint32_t crc_actual = ::crc32(0, &bytes[pos + 4], uInt(4 + len));
    if (crc_stored != crc_actual) throw IoError("png: chunk crc mismatch");

    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (len != 13) throw IoError("png: bad IHDR length");
      im.width = int(read_be32(data));
      im.height = int(read_be32(data + 4));
      im.bit_depth = data[8];
      color_type = data[9];
      if (data[10] != 0 || data[11] != 0) throw IoError("png: unsupported compression/filter method");
      if (data[12] != 0) throw IoError("png: interlaced images are not supported");
      if (im.bit_depth != 8 && im.bit_depth != 16) {
        throw IoError("png: only 8/16-bit depths are supported");
      }
      if (color_type == 0) {
        im.channels = 1;
      } else if (color_type == 2) {
        im.channels = 3;
      } else {
        throw IoError("png: only grayscale and RGB color types are supported");
      }
      if (im.width <= 0 || im.height <= 0 || im.width > 1 << 20 || im.height > 1 << 20) {
        throw IoError("png: dimensions out of range");
      }
      saw_ihdr = true;
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      if (!saw_ihdr) throw IoError("png: IDAT before IHDR");
      idat.insert(idat.end(), data, data + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      saw_iend = true;
    }
    pos += 12 + len;
  }
  if (!saw_ihdr || !saw_iend) throw IoError("png: missing IHDR or IEND");

  const int bytes_per_sample = im.bit_depth / 8;
  const std::size_t row_bytes = std::size_t(im.width) * im.channels * bytes_per_sample;
  const std::size_t raw_size = (row_bytes + 1) * im.height;
  std::vector<std::uint8_t> raw(raw_size);
  uLongf out_len = raw_size;
  const int zrc = ::uncompress(raw.data(), &out_len, idat.data(), uLong(idat.size()));
  if (zrc != Z_OK || out_len != raw_size) throw IoError("png: inflate failed");

  const int bpp = im.channels * bytes_per_sample;
  std::vector<std::uint8_t> prev(row_bytes, 0);
  im.samples.resize(std::size_t(im.width) * im.height * im.channels);
  for (int y = 0; y < im.height; ++y) {
    std::uint8_t* row = raw.data() + std::size_t(y) * (row_bytes + 1);
    const int filter = row[0];
    std::uint8_t* cur = row + 1;
    switch (filter) {
      case 0:
        break;
      case 1:
        for (std::size_t i = bpp; i < row_bytes; ++i) cur[i] = std::uint8_t(cur[i] + cur[i - bpp]);
        break;
      case 2:
        for (std::size_t i = 0; i < row_bytes; ++i) cur[i] = std::uint8_t(cur[i] + prev[i]);
        break;
      case 3:
        for (std::size_t i = 0; i < row_bytes; ++i) {
          const int left = i >= std::size_t(bpp) ? cur[i - bpp] : 0;
          cur[i] = std::uint8_t(cur[i] + ((left + prev[i]) >> 1));
        }
        break;
      case 4:
        for (std::size_t i = 0; i < row_bytes; ++i) {
          const int left = i >= std::size_t(bpp) ? cur[i - bpp] : 0;
          const int upleft = i >= std::size_t(bpp) ? prev[i - bpp] : 0;
          cur[i] = std::uint8_t(cur[i] + paeth(left, prev[i], upleft));
        }
        break;
      default:
        throw IoError("png: unknown row filter");
    }
    std::memcpy(prev.data(), cur, row_bytes);
    std::uint16_t* dst = im.samples.data() + std::size_t(y) * im.width * im.channels;
    if (im.bit_depth == 8) {
      for (std::size_t i = 0; i < row_bytes; ++i) dst[i] = cur[i];
    } else {
      for (std::size_t i = 0; i < row_bytes / 2; ++i) {
        dst[i] = std::uint16_t((cur[2 * i] << 8) | cur[2 * i + 1]);
      }
    }
  }
  return im;
}

std::vector<std::uint8_t> png_encode(const RawImage& im) {
  if (im.channels != 1 && im.channels != 3) throw IoError("png: encode expects 1 or 3 channels");
  if (im.bit_depth != 8 && im.bit_depth != 16) throw IoError("png: encode expects 8/16-bit depth");

  const int bytes_per_sample = im.bit_depth / 8;
  const std::size_t row_bytes = std::size_t(im.width) * im.channels * bytes_per_sample;
  std::vector<std::uint8_t> raw;
  raw.reserve((row_bytes + 1) * im.height);
  for (int y = 0; y < im.height; ++y) {
    raw.push_back(0);  // filter: none
    const std::uint16_t* src = im.samples.data() + std::size_t(y) * im.width * im.channels;
    if (im.bit_depth == 8) {
      for (std::size_t i = 0; i < row_bytes; ++i) raw.push_back(std::uint8_t(src[i]));
    } else {
      for (std::size_t i = 0; i < row_bytes / 2; ++i) {
        raw.push_back(std::uint8_t(src[i] >> 8));
        raw.push_back(std::uint8_t(src[i] & 0xff));
      }
    }
  }

  uLongf bound = ::compressBound(uLong(raw.size()));
  std::vector<std::uint8_t> compressed(bound);
  if (::compress2(compressed.data(), &bound, raw.data(), uLong(raw.size()),
                  Z_DEFAULT_COMPRESSION) != Z_OK) {
    throw IoError("png: deflate failed");
  }
  compressed.resize(bound);

  std::vector<std::uint8_t> out(kSignature, kSignature + 8);
  std::vector<std::uint8_t> ihdr;
  push_be32(ihdr, std::uint32_t(im.width));
  push_be32(ihdr, std::uint32_t(im.height));
  ihdr.push_back(std::uint8_t(im.bit_depth));
  ihdr.push_back(im.channels == 1 ? 0 : 2);
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  append_chunk(out, "IHDR", ihdr);
  append_chunk(out, "IDAT", compressed);
  append_chunk(out, "IEND", {});
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            std::streamsize(bytes.size()));
  if (!out) throw IoError("short write: " + path);
}

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace stereoflow::detail
