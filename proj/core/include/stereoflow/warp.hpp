#pragma once

#include "stereoflow/field.hpp"
#include "stereoflow/tape.hpp"

namespace stereoflow {

// Backward bilinear warp: out(p) = sample(source, p + corr(p)). Sampling
// coordinates that leave the image are clamped to the border; use
// validity_mask to exclude those pixels downstream.
Field bilinear_warp(const Field& source, const Field& corr);

// 1 where p + corr(p) lands inside [0,W-1]x[0,H-1], else 0. Not
// differentiated anywhere.
Field validity_mask(const Field& corr);

Image warp(const Image& source, const CorrField& corr);
CorrField warp(const CorrField& source, const CorrField& corr);
Field warp(const OcclusionMap& source, const CorrField& corr);  // fractional
OcclusionMap validity_mask(const CorrField& corr);

}  // namespace stereoflow
