#pragma once

#include "stereoflow/field.hpp"

namespace stereoflow {

struct OcclusionParams {
  double alpha1 = 0.01;
  double alpha2 = 0.5;
};

// Forward-backward consistency check. A pixel p is kept visible when
//
//   |f(p) + b~(p)|^2 < alpha1 * (|f(p)|^2 + |b~(p)|^2) + alpha2,
//
// where b~ = warp(backward, forward), and its sampling location stays inside
// the image (validity). Treated as a constant during backpropagation.
OcclusionMap estimate_occlusion(const CorrField& forward,
                                const CorrField& backward,
                                const OcclusionParams& params = {});

// Transport a flow occlusion map into another view: warp by the given
// stereo correspondence, re-binarize at 0.5, and drop pixels whose sample
// location left the image.
OcclusionMap two_warp_occlusion(const OcclusionMap& flow_occ,
                                const CorrField& stereo_corr);

}  // namespace stereoflow
