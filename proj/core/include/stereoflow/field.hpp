#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "stereoflow/errors.hpp"

namespace stereoflow {

enum class Axis { X, Y };

struct Shape {
  int height = 0;
  int width = 0;
  int channels = 1;

  bool operator==(const Shape&) const = default;
  std::size_t count() const {
    return static_cast<std::size_t>(height) * width * channels;
  }
  std::string str() const;
};

// Dense row-major H x W x C grid of doubles. The basic value type every
// other module works on; treated as immutable once handed to a Tape.
class Field {
 public:
  Field() = default;
  Field(int height, int width, int channels = 1, double fill = 0.0);
  static Field like(const Field& other, double fill = 0.0);

  int height() const { return h_; }
  int width() const { return w_; }
  int channels() const { return c_; }
  Shape shape() const { return {h_, w_, c_}; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(int y, int x, int c = 0) {
    return data_[(static_cast<std::size_t>(y) * w_ + x) * c_ + c];
  }
  double operator()(int y, int x, int c = 0) const {
    return data_[(static_cast<std::size_t>(y) * w_ + x) * c_ + c];
  }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_extent(const Field& other) const {
    return h_ == other.h_ && w_ == other.w_;
  }
  bool same_shape(const Field& other) const { return shape() == other.shape(); }
  bool all_finite() const;
  double min_value() const;
  double max_value() const;

 private:
  int h_ = 0, w_ = 0, c_ = 1;
  std::vector<double> data_;
};

void require_same_extent(const Field& a, const Field& b, const char* where);
void require_same_shape(const Field& a, const Field& b, const char* where);

// A frame of the input video: intensities in [0,1], 1 or 3 channels.
class Image {
 public:
  Image() = default;
  explicit Image(Field f);

  const Field& field() const { return f_; }
  int height() const { return f_.height(); }
  int width() const { return f_.width(); }
  int channels() const { return f_.channels(); }

 private:
  Field f_;
};

// Dense per-pixel displacement map. Channel 0 is the horizontal offset u
// (positive = rightward), channel 1 the vertical offset v (positive = down).
// Holds both disparity-style and flow-style correspondences.
class CorrField {
 public:
  CorrField() = default;
  explicit CorrField(Field f);
  static CorrField zero(int height, int width);
  static CorrField constant(int height, int width, double u, double v);

  const Field& field() const { return f_; }
  int height() const { return f_.height(); }
  int width() const { return f_.width(); }
  double u(int y, int x) const { return f_(y, x, 0); }
  double v(int y, int x) const { return f_(y, x, 1); }

 private:
  Field f_;
};

// Binary visibility mask: 1 = visible, 0 = occluded.
class OcclusionMap {
 public:
  OcclusionMap() = default;
  explicit OcclusionMap(Field f);
  static OcclusionMap all_visible(int height, int width);

  const Field& field() const { return f_; }
  int height() const { return f_.height(); }
  int width() const { return f_.width(); }
  double at(int y, int x) const { return f_(y, x, 0); }
  std::size_t visible_count() const;

 private:
  Field f_;
};

// ----- value-level field operations (non-differentiating paths) -----

// Forward difference (order 1) or central second difference (order 2) along
// one axis; rows/columns where the stencil exits the image are zero.
Field spatial_gradient(const Field& a, Axis axis, int order);

// 2x2 average pooling to ceil(H/2) x ceil(W/2); an odd trailing row/column
// is handled by edge replication.
Field downsample2(const Field& a);

// Align-corners bilinear resize to (target_h, target_w); target extent must
// not be smaller than the source extent.
Field upsample_bilinear(const Field& a, int target_h, int target_w);

// Typed variants: displacement values are rescaled with the extent so the
// unit stays "pixels at the current scale".
Image downsample2(const Image& a);
CorrField downsample2(const CorrField& a);
CorrField upsample_bilinear(const CorrField& a, int target_h, int target_w);

double mean(const Field& a);
double masked_mean(const Field& a, const Field& mask);  // sum(a*mask)/sum(mask)

// Binary erosion with a (2r+1)^2 window clipped at the image border.
Field erode(const Field& mask, int radius);

}  // namespace stereoflow
