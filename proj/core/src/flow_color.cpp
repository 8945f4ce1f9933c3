// Direction-as-hue flow rendering on the standard 55-entry color wheel.

#include <algorithm>
#include <cmath>
#include <vector>

#include "stereoflow/io.hpp"

namespace stereoflow {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<std::array<double, 3>> make_color_wheel() {
  const int RY = 15, YG = 6, GC = 4, CB = 11, BM = 13, MR = 6;
  std::vector<std::array<double, 3>> wheel;
  wheel.reserve(RY + YG + GC + CB + BM + MR);
  for (int i = 0; i < RY; ++i) wheel.push_back({255.0, 255.0 * i / RY, 0.0});
  for (int i = 0; i < YG; ++i) wheel.push_back({255.0 - 255.0 * i / YG, 255.0, 0.0});
  for (int i = 0; i < GC; ++i) wheel.push_back({0.0, 255.0, 255.0 * i / GC});
  for (int i = 0; i < CB; ++i) wheel.push_back({0.0, 255.0 - 255.0 * i / CB, 255.0});
  for (int i = 0; i < BM; ++i) wheel.push_back({255.0 * i / BM, 0.0, 255.0});
  for (int i = 0; i < MR; ++i) wheel.push_back({255.0, 0.0, 255.0 - 255.0 * i / MR});
  return wheel;
}

}  // namespace

Image flow_to_color(const CorrField& flow, double max_magnitude) {
  const int h = flow.height(), w = flow.width();
  static const std::vector<std::array<double, 3>> wheel = make_color_wheel();
  const int ncols = int(wheel.size());

  double maxrad = max_magnitude;
  if (maxrad <= 0.0) {
    std::vector<double> mags;
    mags.reserve(std::size_t(h) * w);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        mags.push_back(std::hypot(flow.u(y, x), flow.v(y, x)));
      }
    }
    const std::size_t k = std::size_t(0.99 * double(mags.size() - 1));
    std::nth_element(mags.begin(), mags.begin() + k, mags.end());
    maxrad = std::max(mags[k], 1e-9);
  }

  Field out(h, w, 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double u = flow.u(y, x) / maxrad;
      const double v = flow.v(y, x) / maxrad;
      const double rad = std::hypot(u, v);
      const double a = std::atan2(-v, -u) / kPi;  // [-1, 1]
      const double fk = (a + 1.0) / 2.0 * (ncols - 1);
      const int k0 = int(fk);
      const int k1 = (k0 + 1) % ncols;
      const double f = fk - k0;
      for (int c = 0; c < 3; ++c) {
        double col = ((1.0 - f) * wheel[k0][c] + f * wheel[k1][c]) / 255.0;
        if (rad <= 1.0) {
          col = 1.0 - rad * (1.0 - col);  // saturation grows with magnitude
        } else {
          col *= 0.75;  // out of range
        }
        out(y, x, c) = col;
      }
    }
  }
  return Image(std::move(out));
}

}  // namespace stereoflow
