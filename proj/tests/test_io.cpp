#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "common/oracles.hpp"
#include "stereoflow/config.hpp"
#include "stereoflow/io.hpp"

using namespace stereoflow;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("stereoflow_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::vector<unsigned char> slurp(const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "rb");
  REQUIRE(f != nullptr);
  std::vector<unsigned char> bytes;
  unsigned char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) bytes.insert(bytes.end(), buf, buf + n);
  std::fclose(f);
  return bytes;
}

Field quantized_field(int h, int w, int c, int levels, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(0, levels);
  Field f(h, w, c);
  for (std::size_t i = 0; i < f.size(); ++i) {
    f.data()[i] = double(d(rng)) / levels;
  }
  return f;
}

}  // namespace

TEST_CASE("8-bit png round trip is exact") {
  TempDir tmp;
  std::mt19937_64 rng(113);
  for (int channels : {1, 3}) {
    const Image img{quantized_field(13, 9, channels, 255, rng)};
    const std::string path = tmp.file("img" + std::to_string(channels) + ".png");
    write_image(img, path);
    const Image back = read_image(path);
    REQUIRE(back.field().same_shape(img.field()));
    for (std::size_t i = 0; i < back.field().size(); ++i) {
      CHECK(back.field().data()[i] == img.field().data()[i]);
    }
  }
}

TEST_CASE("16-bit png hits the normalization endpoints") {
  TempDir tmp;
  Field f(2, 2, 1);
  f(0, 0) = 0.0;
  f(0, 1) = 1.0;           // encodes as 65535 -> reads back as exactly 1.0
  f(1, 0) = 32768.0 / 65535.0;
  f(1, 1) = 0.25;
  const std::string path = tmp.file("img16.png");
  write_image_png16(Image{f}, path);
  const Image back = read_image(path);
  CHECK(back.field()(0, 0) == 0.0);
  CHECK(back.field()(0, 1) == 1.0);
  CHECK(back.field()(1, 0) == 32768.0 / 65535.0);
  CHECK(std::fabs(back.field()(1, 1) - 0.25) < 1.0 / 65535.0);
}

TEST_CASE("pgm fixture bytes decode to the expected values") {
  TempDir tmp;
  // 4x2 P5, maxval 255, payload written by hand
  const unsigned char bytes[] = {'P', '5', '\n', '4', ' ', '2', '\n',
                                 '2', '5', '5', '\n',
                                 0, 64, 128, 255, 10, 20, 30, 40};
  const std::string path = tmp.file("fixture.pgm");
  FILE* f = std::fopen(path.c_str(), "wb");
  REQUIRE(f != nullptr);
  std::fwrite(bytes, 1, sizeof bytes, f);
  std::fclose(f);
  const Image img = read_image(path);
  REQUIRE(img.width() == 4);
  REQUIRE(img.height() == 2);
  CHECK(img.field()(0, 0) == 0.0);
  CHECK(img.field()(0, 1) == 64.0 / 255.0);
  CHECK(img.field()(0, 3) == 1.0);
  CHECK(img.field()(1, 2) == 30.0 / 255.0);
}

TEST_CASE("pgm and ppm round trip") {
  TempDir tmp;
  std::mt19937_64 rng(127);
  const Image gray{quantized_field(6, 5, 1, 255, rng)};
  write_image(gray, tmp.file("g.pgm"));
  const Image gback = read_image(tmp.file("g.pgm"));
  for (std::size_t i = 0; i < gback.field().size(); ++i) {
    CHECK(gback.field().data()[i] == gray.field().data()[i]);
  }
  const Image rgb{quantized_field(6, 5, 3, 255, rng)};
  write_image(rgb, tmp.file("c.ppm"));
  const Image cback = read_image(tmp.file("c.ppm"));
  for (std::size_t i = 0; i < cback.field().size(); ++i) {
    CHECK(cback.field().data()[i] == rgb.field().data()[i]);
  }
}

TEST_CASE("flo files round trip bitwise") {
  TempDir tmp;
  std::mt19937_64 rng(131);
  Field f(7, 5, 2);
  std::uniform_real_distribution<double> d(-30.0, 30.0);
  for (std::size_t i = 0; i < f.size(); ++i) f.data()[i] = d(rng);
  const CorrField flow{f};

  const std::string p1 = tmp.file("a.flo");
  const std::string p2 = tmp.file("b.flo");
  write_flow(flow, p1, FlowFormat::Flo);
  const FlowFile back = read_flow(p1);
  REQUIRE(back.flow.height() == 7);
  REQUIRE(back.flow.width() == 5);
  CHECK(back.valid.min_value() == 1.0);
  write_flow(back.flow, p2, FlowFormat::Flo);
  CHECK(slurp(p1) == slurp(p2));
  // float32 storage: read-back equals the float-rounded field
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 5; ++x) {
      CHECK(back.flow.u(y, x) == double(float(flow.u(y, x))));
      CHECK(back.flow.v(y, x) == double(float(flow.v(y, x))));
    }
  }
}

TEST_CASE("kitti flow png encoding") {
  TempDir tmp;
  // channel value 32768 encodes u = 0; 32832 encodes u = 1
  Field f(1, 2, 2, 0.0);
  f(0, 1, 0) = 1.0;
  const std::string path = tmp.file("k.png");
  write_flow(CorrField{f}, path, FlowFormat::KittiPng);
  const FlowFile back = read_flow(path);
  CHECK(back.flow.u(0, 0) == 0.0);
  CHECK(back.flow.u(0, 1) == 1.0);
  CHECK(back.valid(0, 0) == 1.0);

  // quantization stays within 1/64 px
  std::mt19937_64 rng(137);
  Field r(6, 6, 2);
  std::uniform_real_distribution<double> d(-100.0, 100.0);
  for (std::size_t i = 0; i < r.size(); ++i) r.data()[i] = d(rng);
  const std::string path2 = tmp.file("k2.png");
  write_flow(CorrField{r}, path2, FlowFormat::KittiPng);
  const FlowFile b2 = read_flow(path2);
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 6; ++x) {
      CHECK(std::fabs(b2.flow.u(y, x) - r(y, x, 0)) <= 0.5 / 64.0 + 1e-12);
      CHECK(std::fabs(b2.flow.v(y, x) - r(y, x, 1)) <= 0.5 / 64.0 + 1e-12);
    }
  }
}

TEST_CASE("kitti disparity png encoding") {
  TempDir tmp;
  Field disp(2, 3, 1, 0.0);
  disp(0, 0) = 1.0;    // encodes as 256
  disp(0, 1) = 37.25;  // representable at 1/256
  Field valid(2, 3, 1, 1.0);
  valid(1, 2) = 0.0;
  const std::string path = tmp.file("d.png");
  write_disparity_kitti(disp, valid, path);
  const DisparityFile back = read_disparity(path);
  CHECK(back.disparity(0, 0) == 1.0);
  CHECK(back.disparity(0, 1) == 37.25);
  CHECK(back.valid(1, 2) == 0.0);
  CHECK(back.valid(0, 0) == 1.0);
  // disparity zero on a valid pixel quantizes to the smallest valid code
  CHECK(back.disparity(1, 0) == doctest::Approx(1.0 / 256.0));
}

TEST_CASE("pfm round trips bitwise") {
  TempDir tmp;
  std::mt19937_64 rng(139);
  Field f(5, 4, 1);
  std::uniform_real_distribution<double> d(-5.0, 80.0);
  for (std::size_t i = 0; i < f.size(); ++i) f.data()[i] = double(float(d(rng)));
  const std::string p1 = tmp.file("a.pfm");
  const std::string p2 = tmp.file("b.pfm");
  write_pfm(f, p1);
  const Field back = read_pfm(p1);
  REQUIRE(back.same_shape(f));
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(back.data()[i] == f.data()[i]);
  write_pfm(back, p2);
  CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("mask png round trip") {
  TempDir tmp;
  Field m(4, 4, 1, 1.0);
  m(2, 2) = 0.0;
  m(0, 3) = 0.0;
  const std::string path = tmp.file("m.png");
  write_mask_png(m, path);
  const Field back = read_mask_png(path);
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(back.data()[i] == m.data()[i]);
}

TEST_CASE("malformed inputs raise typed errors") {
  TempDir tmp;
  const std::string path = tmp.file("junk.flo");
  FILE* f = std::fopen(path.c_str(), "wb");
  const char garbage[] = "not a flow file at all";
  std::fwrite(garbage, 1, sizeof garbage, f);
  std::fclose(f);
  CHECK_THROWS_AS(read_flow(path), IoError);
  CHECK_THROWS_AS(read_image(path), IoError);
  CHECK_THROWS_AS(read_image(tmp.file("missing.png")), IoError);

  // corrupt a png crc
  Field m(4, 4, 1, 1.0);
  const std::string png = tmp.file("ok.png");
  write_mask_png(m, png);
  auto bytes = slurp(png);
  bytes[bytes.size() - 5] ^= 0xff;
  FILE* g = std::fopen(png.c_str(), "wb");
  std::fwrite(bytes.data(), 1, bytes.size(), g);
  std::fclose(g);
  CHECK_THROWS_AS(read_mask_png(png), IoError);
}

TEST_CASE("zero flow renders as white") {
  const Image img = flow_to_color(CorrField::zero(4, 4), 1.0);
  for (std::size_t i = 0; i < img.field().size(); ++i) {
    CHECK(img.field().data()[i] == 1.0);
  }
}

TEST_CASE("color wheel matches the independent reference on a sweep") {
  const int n = 48;
  const double maxmag = 2.0;
  Field f(1, n, 2);
  for (int i = 0; i < n; ++i) {
    const double ang = 2.0 * 3.14159265358979323846 * i / n;
    f(0, i, 0) = 0.8 * maxmag * std::cos(ang);
    f(0, i, 1) = 0.8 * maxmag * std::sin(ang);
  }
  const Image img = flow_to_color(CorrField{f}, maxmag);
  for (int i = 0; i < n; ++i) {
    double want[3];
    oracle::flow_color_reference(f(0, i, 0), f(0, i, 1), maxmag, want);
    for (int c = 0; c < 3; ++c) {
      CHECK(img.field()(0, i, c) == doctest::Approx(want[c]).epsilon(1e-9));
    }
  }
}

TEST_CASE("pure rightward flow at max magnitude hits the wheel start color") {
  Field f(1, 1, 2);
  f(0, 0, 0) = 3.0;
  f(0, 0, 1) = 0.0;
  const Image img = flow_to_color(CorrField{f}, 3.0);
  double want[3];
  oracle::flow_color_reference(3.0, 0.0, 3.0, want);
  for (int c = 0; c < 3; ++c) {
    CHECK(img.field()(0, 0, c) == doctest::Approx(want[c]).epsilon(1e-9));
  }
}

TEST_CASE("key-value parser") {
  const KeyValueFile kv = KeyValueFile::parse("a = 1\n# comment\nb = two words\na = 3\n");
  CHECK(kv.get_int("a", 0) == 3);  // last value wins
  CHECK(kv.all("a").size() == 2);
  CHECK(kv.get("b", "") == "two words");
  CHECK(kv.get("missing", "dflt") == "dflt");
  CHECK_THROWS_AS(KeyValueFile::parse("not a pair\n"), ConfigError);
  CHECK_THROWS_AS(kv.get_int("b", 0), ConfigError);
}
