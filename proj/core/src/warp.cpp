#include "stereoflow/warp.hpp"

#include "detail/warp_kernel.hpp"

namespace stereoflow {

Field bilinear_warp(const Field& source, const Field& corr) {
  require_same_extent(source, corr, "warp");
  if (corr.channels() != 2) {
    throw ShapeError("warp displacement field must have 2 channels");
  }
  Field out(source.height(), source.width(), source.channels());
  detail::warp_forward(source, corr, out);
  return out;
}

Field validity_mask(const Field& corr) {
  if (corr.channels() != 2) {
    throw ShapeError("validity_mask expects a 2-channel displacement field");
  }
  Field out(corr.height(), corr.width(), 1);
  detail::validity_forward(corr, out);
  return out;
}

Image warp(const Image& source, const CorrField& corr) {
  Field f = bilinear_warp(source.field(), corr.field());
  // Bilinear interpolation of [0,1] data stays in [0,1].
  return Image(std::move(f));
}

CorrField warp(const CorrField& source, const CorrField& corr) {
  return CorrField(bilinear_warp(source.field(), corr.field()));
}

Field warp(const OcclusionMap& source, const CorrField& corr) {
  return bilinear_warp(source.field(), corr.field());
}

OcclusionMap validity_mask(const CorrField& corr) {
  return OcclusionMap(validity_mask(corr.field()));
}

}  // namespace stereoflow
