#pragma once

// Shared bilinear sampling kernel. The forward definition lives here so the
// value-level warp and the tape op cannot drift apart.

#include "stereoflow/field.hpp"

namespace stereoflow::detail {

struct BilinearTap {
  int x0, x1, y0, y1;
  double fx, fy;
  bool inside_x;  // clamp inactive along x (derivative survives)
  bool inside_y;
};

inline BilinearTap make_tap(double x, double y, int w, int h) {
  BilinearTap t;
  t.inside_x = x > 0.0 && x < double(w - 1);
  t.inside_y = y > 0.0 && y < double(h - 1);
  if (x < 0.0) x = 0.0;
  if (x > double(w - 1)) x = double(w - 1);
  if (y < 0.0) y = 0.0;
  if (y > double(h - 1)) y = double(h - 1);
  int x0 = static_cast<int>(x);
  if (x0 > w - 2) x0 = w >= 2 ? w - 2 : 0;
  int y0 = static_cast<int>(y);
  if (y0 > h - 2) y0 = h >= 2 ? h - 2 : 0;
  t.x0 = x0;
  t.x1 = x0 + 1 < w ? x0 + 1 : x0;
  t.y0 = y0;
  t.y1 = y0 + 1 < h ? y0 + 1 : y0;
  t.fx = x - x0;
  t.fy = y - y0;
  return t;
}

// out(p) = bilinear sample of src at p + corr(p), border-clamped.
inline void warp_forward(const Field& src, const Field& corr, Field& out) {
  const int h = src.height(), w = src.width(), c = src.channels();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const BilinearTap t =
          make_tap(x + corr(y, x, 0), y + corr(y, x, 1), w, h);
      const double w00 = (1.0 - t.fy) * (1.0 - t.fx);
      const double w01 = (1.0 - t.fy) * t.fx;
      const double w10 = t.fy * (1.0 - t.fx);
      const double w11 = t.fy * t.fx;
      for (int ch = 0; ch < c; ++ch) {
        out(y, x, ch) = w00 * src(t.y0, t.x0, ch) + w01 * src(t.y0, t.x1, ch) +
                        w10 * src(t.y1, t.x0, ch) + w11 * src(t.y1, t.x1, ch);
      }
    }
  }
}

inline void validity_forward(const Field& corr, Field& out) {
  const int h = corr.height(), w = corr.width();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double sx = x + corr(y, x, 0);
      const double sy = y + corr(y, x, 1);
      out(y, x) = (sx >= 0.0 && sx <= double(w - 1) && sy >= 0.0 &&
                   sy <= double(h - 1))
                      ? 1.0
                      : 0.0;
    }
  }
}

}  // namespace stereoflow::detail
