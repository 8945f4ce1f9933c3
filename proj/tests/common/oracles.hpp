#pragma once

// Independent reference implementations used only by tests. These stay
// deliberately decoupled from the library kernels they check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "stereoflow/field.hpp"
#include "stereoflow/tape.hpp"

namespace oracle {

using stereoflow::Field;
using stereoflow::Tape;
using stereoflow::Var;

inline Field random_field(int h, int w, int c, std::mt19937_64& rng,
                          double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Field f(h, w, c);
  for (std::size_t i = 0; i < f.size(); ++i) f.data()[i] = dist(rng);
  return f;
}

// Displacements whose sample points stay off the bilinear lattice and away
// from the border, so the warp is differentiable there.
inline Field random_smooth_corr(int h, int w, std::mt19937_64& rng,
                                double max_mag = 1.6) {
  std::uniform_real_distribution<double> frac(0.25, 0.75);
  std::uniform_int_distribution<int> whole(-int(max_mag), int(max_mag) - 1);
  Field f(h, w, 2);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 2; ++c) {
        const int limit_lo = c == 0 ? -x : -y;
        const int limit_hi = c == 0 ? (w - 2 - x) : (h - 2 - y);
        int base = std::clamp(whole(rng), limit_lo + 1, limit_hi - 1);
        if (limit_lo + 1 > limit_hi - 1) base = 0;  // tiny fields
        f(y, x, c) = base + frac(rng);
      }
    }
  }
  return f;
}

// Scalar bilinear interpolation with border clamping.
inline double bilinear_sample(const Field& src, double x, double y, int ch) {
  const int w = src.width(), h = src.height();
  x = std::clamp(x, 0.0, double(w - 1));
  y = std::clamp(y, 0.0, double(h - 1));
  int x0 = int(std::floor(x));
  int y0 = int(std::floor(y));
  int x1 = std::min(x0 + 1, w - 1);
  int y1 = std::min(y0 + 1, h - 1);
  if (x0 == w - 1) x0 = x1;
  if (y0 == h - 1) y0 = y1;
  const double fx = x - std::floor(x);
  const double fy = y - std::floor(y);
  const double top = (1.0 - fx) * src(y0, x0, ch) + fx * src(y0, x1, ch);
  const double bot = (1.0 - fx) * src(y1, x0, ch) + fx * src(y1, x1, ch);
  return (1.0 - fy) * top + fy * bot;
}

// Sliding-window SSIM with clipped windows, channel-averaged.
inline Field ssim_brute(const Field& a, const Field& b, int window, double c1,
                        double c2) {
  const int h = a.height(), w = a.width(), ch = a.channels();
  const int r = window / 2;
  Field out(h, w, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = 0; k < ch; ++k) {
        double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
        int n = 0;
        for (int yy = std::max(0, y - r); yy <= std::min(h - 1, y + r); ++yy) {
          for (int xx = std::max(0, x - r); xx <= std::min(w - 1, x + r); ++xx) {
            const double va = a(yy, xx, k), vb = b(yy, xx, k);
            sa += va;
            sb += vb;
            saa += va * va;
            sbb += vb * vb;
            sab += va * vb;
            ++n;
          }
        }
        const double mu_a = sa / n, mu_b = sb / n;
        const double var_a = saa / n - mu_a * mu_a;
        const double var_b = sbb / n - mu_b * mu_b;
        const double cov = sab / n - mu_a * mu_b;
        acc += ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) /
               ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
      }
      out(y, x) = acc / ch;
    }
  }
  return out;
}

// 2x2 block means with edge replication for odd trailing rows/columns.
inline Field pool_brute(const Field& a) {
  const int oh = (a.height() + 1) / 2, ow = (a.width() + 1) / 2;
  Field out(oh, ow, a.channels());
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      for (int c = 0; c < a.channels(); ++c) {
        double s = 0.0;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            s += a(std::min(2 * y + dy, a.height() - 1),
                   std::min(2 * x + dx, a.width() - 1), c);
          }
        }
        out(y, x, c) = s / 4.0;
      }
    }
  }
  return out;
}

// Central finite differences against the tape's reverse-mode gradients.
// `build` records a scalar loss from the supplied leaves.
struct GradCheck {
  double max_rel_err = 0.0;
  int checked = 0;
};

inline double rel_err(double a, double b) {
  const double m = std::max(std::fabs(a), std::fabs(b));
  if (m < 1e-7) return 0.0;
  return std::fabs(a - b) / m;
}

inline GradCheck check_gradients(
    std::vector<Field> inputs,
    const std::function<Var(Tape&, const std::vector<Var>&)>& build,
    double h = 1e-3, int stride = 1) {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(inputs.size());
  for (const Field& f : inputs) leaves.push_back(tape.leaf(f));
  Var loss = build(tape, leaves);
  tape.backward(loss);

  std::vector<Field> analytic;
  analytic.reserve(leaves.size());
  for (Var v : leaves) analytic.push_back(tape.grad(v));

  GradCheck result;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    Field work = inputs[i];
    for (std::size_t e = 0; e < work.size(); e += stride) {
      const double saved = work.data()[e];
      work.data()[e] = saved + h;
      tape.set_leaf(leaves[i], work);
      tape.forward();
      const double fp = tape.scalar(loss);
      work.data()[e] = saved - h;
      tape.set_leaf(leaves[i], work);
      tape.forward();
      const double fm = tape.scalar(loss);
      work.data()[e] = saved;
      const double fd = (fp - fm) / (2.0 * h);
      result.max_rel_err = std::max(result.max_rel_err,
                                    rel_err(fd, analytic[i].data()[e]));
      ++result.checked;
    }
    tape.set_leaf(leaves[i], inputs[i]);
  }
  tape.forward();
  return result;
}

// Independent transcription of the 55-color wheel rendering.
inline void flow_color_reference(double u, double v, double maxrad,
                                 double rgb[3]) {
  static std::vector<std::array<double, 3>> wheel = [] {
    std::vector<std::array<double, 3>> cw;
    const int seg[6] = {15, 6, 4, 11, 13, 6};
    // transitions R->Y->G->C->B->M->R
    const double from[6][3] = {{255, 0, 0},  {255, 255, 0}, {0, 255, 0},
                               {0, 255, 255}, {0, 0, 255},  {255, 0, 255}};
    const double to[6][3] = {{255, 255, 0}, {0, 255, 0},  {0, 255, 255},
                             {0, 0, 255},   {255, 0, 255}, {255, 0, 0}};
    for (int s = 0; s < 6; ++s) {
      for (int i = 0; i < seg[s]; ++i) {
        const double t = double(i) / seg[s];
        cw.push_back({from[s][0] + t * (to[s][0] - from[s][0]),
                      from[s][1] + t * (to[s][1] - from[s][1]),
                      from[s][2] + t * (to[s][2] - from[s][2])});
      }
    }
    return cw;
  }();
  const int ncols = int(wheel.size());
  const double un = u / maxrad, vn = v / maxrad;
  const double rad = std::sqrt(un * un + vn * vn);
  const double a = std::atan2(-vn, -un) / 3.14159265358979323846;
  const double fk = (a + 1.0) / 2.0 * (ncols - 1);
  const int k0 = int(fk);
  const int k1 = (k0 + 1) % ncols;
  const double f = fk - k0;
  for (int c = 0; c < 3; ++c) {
    double col = ((1.0 - f) * wheel[k0][c] + f * wheel[k1][c]) / 255.0;
    col = rad <= 1.0 ? 1.0 - rad * (1.0 - col) : col * 0.75;
    rgb[c] = col;
  }
}

}  // namespace oracle
