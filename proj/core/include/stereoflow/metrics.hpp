#pragma once

#include <cstddef>

#include "stereoflow/field.hpp"

namespace stereoflow {

struct FlowEval {
  double epe_all = 0.0, epe_noc = 0.0, epe_occ = 0.0;
  double fl_all = 0.0, fl_noc = 0.0, fl_occ = 0.0;
  std::size_t count_all = 0, count_noc = 0, count_occ = 0;
};

// Mean endpoint error and outlier rate over pixels with ground truth. A
// pixel counts as an outlier when its error exceeds 3 px AND 5% of the
// ground-truth magnitude. With a non-occluded mask, the "occ" split covers
// valid pixels outside it; without one, everything lands in "noc".
FlowEval flow_metrics(const CorrField& pred, const CorrField& gt,
                      const Field& valid, const Field* noc = nullptr);

struct DepthEval {
  double abs_rel = 0.0, sq_rel = 0.0, rmse = 0.0, rmse_log = 0.0;
  double delta1 = 0.0, delta2 = 0.0, delta3 = 0.0;  // max-ratio < 1.25^k
  std::size_t count = 0;
};

struct DepthCap {
  double min_depth = 0.001;  // meters
  double max_depth = 80.0;
};

enum class EvalCrop { None, Garg };

// Converts the horizontal disparity magnitude to depth with depth = fb/|u|,
// clamps predictions and ground truth to the cap, and evaluates over pixels
// with positive ground-truth depth inside the crop. Ratio thresholds use
// strict inequality.
DepthEval depth_metrics(const CorrField& pred_disp, const Field& gt_depth,
                        double fb, const DepthCap& cap = {},
                        EvalCrop crop = EvalCrop::None);

// Mean |v| of a correspondence field; stereo maps should keep this small.
double stereo_vertical_diagnostic(const CorrField& d);

}  // namespace stereoflow
