#include "stereoflow/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace stereoflow {

FlowEval flow_metrics(const CorrField& pred, const CorrField& gt,
                      const Field& valid, const Field* noc) {
  require_same_extent(pred.field(), gt.field(), "flow_metrics");
  require_same_extent(pred.field(), valid, "flow_metrics valid mask");
  if (noc != nullptr) require_same_extent(pred.field(), *noc, "flow_metrics noc mask");

  const int h = pred.height(), w = pred.width();
  double sum_noc = 0.0, sum_occ = 0.0;
  std::size_t n_noc = 0, n_occ = 0;
  std::size_t bad_noc = 0, bad_occ = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (valid(y, x) <= 0.0) continue;
      const double du = pred.u(y, x) - gt.u(y, x);
      const double dv = pred.v(y, x) - gt.v(y, x);
      const double epe = std::sqrt(du * du + dv * dv);
      const double mag = std::sqrt(gt.u(y, x) * gt.u(y, x) + gt.v(y, x) * gt.v(y, x));
      const bool wrong = epe > 3.0 && epe > 0.05 * mag;
      const bool in_noc = noc == nullptr || (*noc)(y, x) > 0.0;
      if (in_noc) {
        sum_noc += epe;
        bad_noc += wrong;
        ++n_noc;
      } else {
        sum_occ += epe;
        bad_occ += wrong;
        ++n_occ;
      }
    }
  }
  if (n_noc + n_occ == 0) throw EvalError("flow_metrics: no valid pixels");

  FlowEval e;
  e.count_noc = n_noc;
  e.count_occ = n_occ;
  e.count_all = n_noc + n_occ;
  e.epe_noc = n_noc ? sum_noc / double(n_noc) : 0.0;
  e.epe_occ = n_occ ? sum_occ / double(n_occ) : 0.0;
  e.epe_all = (sum_noc + sum_occ) / double(e.count_all);
  e.fl_noc = n_noc ? double(bad_noc) / double(n_noc) : 0.0;
  e.fl_occ = n_occ ? double(bad_occ) / double(n_occ) : 0.0;
  e.fl_all = double(bad_noc + bad_occ) / double(e.count_all);
  return e;
}

DepthEval depth_metrics(const CorrField& pred_disp, const Field& gt_depth,
                        double fb, const DepthCap& cap, EvalCrop crop) {
  require_same_extent(pred_disp.field(), gt_depth, "depth_metrics");
  if (fb <= 0.0) throw EvalError("depth_metrics: fb must be positive");
  if (gt_depth.channels() != 1) throw ShapeError("gt depth must be single channel");

  const int h = gt_depth.height(), w = gt_depth.width();
  int y0 = 0, y1 = h, x0 = 0, x1 = w;
  if (crop == EvalCrop::Garg) {
    y0 = static_cast<int>(0.40810811 * h);
    y1 = static_cast<int>(0.99189189 * h);
    x0 = static_cast<int>(0.03594771 * w);
    x1 = static_cast<int>(0.96405229 * w);
  }

  double abs_rel = 0.0, sq_rel = 0.0, sq = 0.0, sq_log = 0.0;
  std::size_t d1 = 0, d2 = 0, d3 = 0, n = 0;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const double gt_raw = gt_depth(y, x);
      if (!(gt_raw > 0.0) || !std::isfinite(gt_raw)) continue;
      const double disp = std::fabs(pred_disp.u(y, x));
      const double pred_raw = fb / std::max(disp, 1e-9);
      const double gt = std::clamp(gt_raw, cap.min_depth, cap.max_depth);
      const double pred = std::clamp(pred_raw, cap.min_depth, cap.max_depth);
      const double err = pred - gt;
      abs_rel += std::fabs(err) / gt;
      sq_rel += err * err / gt;
      sq += err * err;
      const double dl = std::log(pred) - std::log(gt);
      sq_log += dl * dl;
      const double ratio = std::max(pred / gt, gt / pred);
      d1 += ratio < 1.25;
      d2 += ratio < 1.25 * 1.25;
      d3 += ratio < 1.25 * 1.25 * 1.25;
      ++n;
    }
  }
  if (n == 0) throw EvalError("depth_metrics: no valid pixels");

  DepthEval e;
  e.count = n;
  e.abs_rel = abs_rel / double(n);
  e.sq_rel = sq_rel / double(n);
  e.rmse = std::sqrt(sq / double(n));
  e.rmse_log = std::sqrt(sq_log / double(n));
  e.delta1 = double(d1) / double(n);
  e.delta2 = double(d2) / double(n);
  e.delta3 = double(d3) / double(n);
  return e;
}

double stereo_vertical_diagnostic(const CorrField& d) {
  const int h = d.height(), w = d.width();
  if (h == 0 || w == 0) return 0.0;
  double s = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) s += std::fabs(d.v(y, x));
  }
  return s / double(h) / double(w);
}

}  // namespace stereoflow
