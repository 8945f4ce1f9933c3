#include "stereoflow/occlusion.hpp"

#include "stereoflow/warp.hpp"

namespace stereoflow {

OcclusionMap estimate_occlusion(const CorrField& forward,
                                const CorrField& backward,
                                const OcclusionParams& params) {
  require_same_extent(forward.field(), backward.field(), "estimate_occlusion");
  if (params.alpha1 < 0.0 || params.alpha2 < 0.0) {
    throw ShapeError("estimate_occlusion: alpha1 and alpha2 must be nonnegative");
  }
  const int h = forward.height(), w = forward.width();
  const Field round_trip = bilinear_warp(backward.field(), forward.field());
  const Field valid = validity_mask(forward.field());
  Field mask(h, w, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double fu = forward.u(y, x), fv = forward.v(y, x);
      const double ru = round_trip(y, x, 0), rv = round_trip(y, x, 1);
      const double lhs = (fu + ru) * (fu + ru) + (fv + rv) * (fv + rv);
      const double rhs = params.alpha1 * (fu * fu + fv * fv + ru * ru + rv * rv) +
                         params.alpha2;
      mask(y, x) = (lhs < rhs && valid(y, x) == 1.0) ? 1.0 : 0.0;
    }
  }
  return OcclusionMap(std::move(mask));
}

OcclusionMap two_warp_occlusion(const OcclusionMap& flow_occ,
                                const CorrField& stereo_corr) {
  require_same_extent(flow_occ.field(), stereo_corr.field(), "two_warp_occlusion");
  const Field warped = bilinear_warp(flow_occ.field(), stereo_corr.field());
  const Field valid = validity_mask(stereo_corr.field());
  Field mask(flow_occ.height(), flow_occ.width(), 1);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask.data()[i] =
        (warped.data()[i] >= 0.5 && valid.data()[i] == 1.0) ? 1.0 : 0.0;
  }
  return OcclusionMap(std::move(mask));
}

}  // namespace stereoflow
