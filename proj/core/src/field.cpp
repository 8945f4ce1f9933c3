#include "stereoflow/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stereoflow {

std::string Shape::str() const {
  return std::to_string(height) + "x" + std::to_string(width) + "x" +
         std::to_string(channels);
}

Field::Field(int height, int width, int channels, double fill)
    : h_(height), w_(width), c_(channels) {
  if (height < 0 || width < 0 || channels < 1) {
    throw ShapeError("invalid field shape " + Shape{height, width, channels}.str());
  }
  data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

Field Field::like(const Field& other, double fill) {
  return Field(other.h_, other.w_, other.c_, fill);
}

bool Field::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double Field::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : data_) m = std::min(m, v);
  return m;
}

double Field::max_value() const {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : data_) m = std::max(m, v);
  return m;
}

void require_same_extent(const Field& a, const Field& b, const char* where) {
  if (!a.same_extent(b)) {
    throw ShapeError(std::string(where) + ": extent mismatch " +
                     a.shape().str() + " vs " + b.shape().str());
  }
}

void require_same_shape(const Field& a, const Field& b, const char* where) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(where) + ": shape mismatch " +
                     a.shape().str() + " vs " + b.shape().str());
  }
}

Image::Image(Field f) : f_(std::move(f)) {
  if (f_.channels() != 1 && f_.channels() != 3) {
    throw ShapeError("image must have 1 or 3 channels, got " +
                     std::to_string(f_.channels()));
  }
  if (!f_.all_finite() || f_.min_value() < 0.0 || f_.max_value() > 1.0) {
    throw ShapeError("image intensities must be finite and within [0,1]");
  }
}

CorrField::CorrField(Field f) : f_(std::move(f)) {
  if (f_.channels() != 2) {
    throw ShapeError("correspondence field must have 2 channels, got " +
                     std::to_string(f_.channels()));
  }
  if (!f_.all_finite()) {
    throw ShapeError("correspondence field must be finite");
  }
}

CorrField CorrField::zero(int height, int width) {
  return CorrField(Field(height, width, 2, 0.0));
}

CorrField CorrField::constant(int height, int width, double u, double v) {
  Field f(height, width, 2);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      f(y, x, 0) = u;
      f(y, x, 1) = v;
    }
  }
  return CorrField(std::move(f));
}

OcclusionMap::OcclusionMap(Field f) : f_(std::move(f)) {
  if (f_.channels() != 1) {
    throw ShapeError("occlusion map must be single channel");
  }
  for (std::size_t i = 0; i < f_.size(); ++i) {
    double v = f_.data()[i];
    if (v != 0.0 && v != 1.0) {
      throw ShapeError("occlusion map values must be 0 or 1");
    }
  }
}

OcclusionMap OcclusionMap::all_visible(int height, int width) {
  return OcclusionMap(Field(height, width, 1, 1.0));
}

std::size_t OcclusionMap::visible_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < f_.size(); ++i) n += f_.data()[i] == 1.0;
  return n;
}

Field spatial_gradient(const Field& a, Axis axis, int order) {
  if (order != 1 && order != 2) {
    throw ShapeError("spatial_gradient order must be 1 or 2");
  }
  const int h = a.height(), w = a.width(), c = a.channels();
  Field out(h, w, c, 0.0);
  if (axis == Axis::X) {
    for (int y = 0; y < h; ++y) {
      for (int ch = 0; ch < c; ++ch) {
        if (order == 1) {
          for (int x = 0; x + 1 < w; ++x)
            out(y, x, ch) = a(y, x + 1, ch) - a(y, x, ch);
        } else {
          for (int x = 1; x + 1 < w; ++x)
            out(y, x, ch) = a(y, x + 1, ch) - 2.0 * a(y, x, ch) + a(y, x - 1, ch);
        }
      }
    }
  } else {
    for (int x = 0; x < w; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        if (order == 1) {
          for (int y = 0; y + 1 < h; ++y)
            out(y, x, ch) = a(y + 1, x, ch) - a(y, x, ch);
        } else {
          for (int y = 1; y + 1 < h; ++y)
            out(y, x, ch) = a(y + 1, x, ch) - 2.0 * a(y, x, ch) + a(y - 1, x, ch);
        }
      }
    }
  }
  return out;
}

Field downsample2(const Field& a) {
  const int h = a.height(), w = a.width(), c = a.channels();
  if (h < 1 || w < 1) throw ShapeError("downsample2 of empty field");
  const int oh = (h + 1) / 2, ow = (w + 1) / 2;
  Field out(oh, ow, c);
  for (int y = 0; y < oh; ++y) {
    const int y0 = 2 * y, y1 = std::min(2 * y + 1, h - 1);
    for (int x = 0; x < ow; ++x) {
      const int x0 = 2 * x, x1 = std::min(2 * x + 1, w - 1);
      for (int ch = 0; ch < c; ++ch) {
        out(y, x, ch) = 0.25 * (a(y0, x0, ch) + a(y0, x1, ch) +
                                a(y1, x0, ch) + a(y1, x1, ch));
      }
    }
  }
  return out;
}

Field upsample_bilinear(const Field& a, int target_h, int target_w) {
  const int h = a.height(), w = a.width(), c = a.channels();
  if (target_h < h || target_w < w) {
    throw ShapeError("upsample_bilinear target smaller than source");
  }
  Field out(target_h, target_w, c);
  const double sy = target_h > 1 ? double(h - 1) / (target_h - 1) : 0.0;
  const double sx = target_w > 1 ? double(w - 1) / (target_w - 1) : 0.0;
  for (int y = 0; y < target_h; ++y) {
    const double fy = y * sy;
    int y0 = static_cast<int>(fy);
    if (y0 > h - 2) y0 = std::max(h - 2, 0);
    const int y1 = std::min(y0 + 1, h - 1);
    const double wy = fy - y0;
    for (int x = 0; x < target_w; ++x) {
      const double fx = x * sx;
      int x0 = static_cast<int>(fx);
      if (x0 > w - 2) x0 = std::max(w - 2, 0);
      const int x1 = std::min(x0 + 1, w - 1);
      const double wx = fx - x0;
      for (int ch = 0; ch < c; ++ch) {
        const double top = (1.0 - wx) * a(y0, x0, ch) + wx * a(y0, x1, ch);
        const double bot = (1.0 - wx) * a(y1, x0, ch) + wx * a(y1, x1, ch);
        out(y, x, ch) = (1.0 - wy) * top + wy * bot;
      }
    }
  }
  return out;
}

Image downsample2(const Image& a) { return Image(downsample2(a.field())); }

CorrField downsample2(const CorrField& a) {
  Field f = downsample2(a.field());
  for (std::size_t i = 0; i < f.size(); ++i) f.data()[i] *= 0.5;
  return CorrField(std::move(f));
}

CorrField upsample_bilinear(const CorrField& a, int target_h, int target_w) {
  Field f = upsample_bilinear(a.field(), target_h, target_w);
  const double su = a.width() > 0 ? double(target_w) / a.width() : 1.0;
  const double sv = a.height() > 0 ? double(target_h) / a.height() : 1.0;
  for (int y = 0; y < target_h; ++y) {
    for (int x = 0; x < target_w; ++x) {
      f(y, x, 0) *= su;
      f(y, x, 1) *= sv;
    }
  }
  return CorrField(std::move(f));
}

double mean(const Field& a) {
  if (a.size() == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i];
  return s / static_cast<double>(a.size());
}

double masked_mean(const Field& a, const Field& mask) {
  require_same_shape(a, mask, "masked_mean");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += a.data()[i] * mask.data()[i];
    den += mask.data()[i];
  }
  return den > 0.0 ? num / den : 0.0;
}

Field erode(const Field& mask, int radius) {
  const int h = mask.height(), w = mask.width();
  if (mask.channels() != 1) throw ShapeError("erode expects a single channel mask");
  Field out(h, w, 1, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool all = true;
      for (int dy = -radius; dy <= radius && all; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        for (int dx = -radius; dx <= radius; ++dx) {
          const int xx = x + dx;
          if (xx < 0 || xx >= w) continue;
          if (mask(yy, xx) < 0.5) {
            all = false;
            break;
          }
        }
      }
      out(y, x) = all ? 1.0 : 0.0;
    }
  }
  return out;
}

}  // namespace stereoflow
