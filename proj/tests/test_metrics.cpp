#include <doctest.h>

#include <cmath>
#include <random>

#include "common/oracles.hpp"
#include "stereoflow/metrics.hpp"

using namespace stereoflow;

namespace {

CorrField shifted(const CorrField& base, double du, double dv) {
  Field f = base.field();
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      f(y, x, 0) += du;
      f(y, x, 1) += dv;
    }
  }
  return CorrField{std::move(f)};
}

}  // namespace

TEST_CASE("flow metrics closed forms") {
  const CorrField gt = CorrField::constant(8, 8, 10.0, 0.0);
  const Field valid(8, 8, 1, 1.0);

  const FlowEval perfect = flow_metrics(gt, gt, valid);
  CHECK(perfect.epe_all == 0.0);
  CHECK(perfect.fl_all == 0.0);

  // error (4,0) on magnitude 10: 4 > 3 and 4 > 0.5 -> every pixel wrong
  const FlowEval off4 = flow_metrics(shifted(gt, 4.0, 0.0), gt, valid);
  CHECK(off4.epe_all == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(off4.fl_all == 1.0);

  // error (2,0): below the 3 px gate -> no outliers
  const FlowEval off2 = flow_metrics(shifted(gt, 2.0, 0.0), gt, valid);
  CHECK(off2.epe_all == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(off2.fl_all == 0.0);

  // error 4 on magnitude 100: 4 < 5% of 100 -> correct under the conjunction
  const CorrField gt_big = CorrField::constant(8, 8, 100.0, 0.0);
  const FlowEval big = flow_metrics(shifted(gt_big, 4.0, 0.0), gt_big, valid);
  CHECK(big.fl_all == 0.0);
}

TEST_CASE("flow metrics splits and recombination") {
  std::mt19937_64 rng(101);
  const int h = 16, w = 16;
  Field pf(h, w, 2), gf(h, w, 2), valid(h, w, 1), noc(h, w, 1);
  std::uniform_real_distribution<double> d(-5.0, 5.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      pf(y, x, 0) = d(rng);
      pf(y, x, 1) = d(rng);
      gf(y, x, 0) = d(rng);
      gf(y, x, 1) = d(rng);
      valid(y, x) = (x + y) % 5 == 0 ? 0.0 : 1.0;
      noc(y, x) = x < w / 2 ? 1.0 : 0.0;
    }
  }
  const CorrField pred{pf}, gt{gf};
  const FlowEval e = flow_metrics(pred, gt, valid, &noc);
  CHECK(e.count_all == e.count_noc + e.count_occ);
  CHECK(e.count_occ > 0);
  CHECK(std::fabs(e.epe_all * double(e.count_all) -
                  (e.epe_noc * double(e.count_noc) + e.epe_occ * double(e.count_occ))) <
        1e-12 * e.epe_all * double(e.count_all) + 1e-12);
  CHECK(e.fl_all >= 0.0);
  CHECK(e.fl_all <= 1.0);

  // translation consistency: shifting pred and gt together changes nothing
  const FlowEval shifted_eval =
      flow_metrics(shifted(pred, 1.5, -2.0), shifted(gt, 1.5, -2.0), valid, &noc);
  CHECK(shifted_eval.epe_all == doctest::Approx(e.epe_all).epsilon(1e-12));
  CHECK(shifted_eval.fl_all == e.fl_all);
}

TEST_CASE("flow metrics with no valid pixels throws") {
  const CorrField z = CorrField::zero(4, 4);
  CHECK_THROWS_AS(flow_metrics(z, z, Field(4, 4, 1, 0.0)), EvalError);
}

TEST_CASE("depth metrics closed forms") {
  const double fb = 320.0;
  // gt depth 10 m everywhere; disparity 32 -> depth 10
  Field gt_depth(6, 6, 1, 10.0);
  const CorrField exact = CorrField::constant(6, 6, 32.0, 0.0);
  const DepthEval perfect = depth_metrics(exact, gt_depth, fb);
  CHECK(perfect.abs_rel == 0.0);
  CHECK(perfect.sq_rel == 0.0);
  CHECK(perfect.rmse == 0.0);
  CHECK(perfect.rmse_log == 0.0);
  CHECK(perfect.delta1 == 1.0);

  // pred 12 m vs gt 10 m: abs rel 0.2, sq rel 0.4, rmse 2
  const CorrField pred12 = CorrField::constant(6, 6, fb / 12.0, 0.0);
  const DepthEval e = depth_metrics(pred12, gt_depth, fb);
  CHECK(e.abs_rel == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(e.sq_rel == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(e.rmse == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(e.delta1 == 1.0);  // ratio 1.2 < 1.25

  // ratio exactly 1.25 fails the strict delta1 threshold
  const CorrField pred125 = CorrField::constant(6, 6, fb / 12.5, 0.0);
  const DepthEval e125 = depth_metrics(pred125, gt_depth, fb);
  CHECK(e125.delta1 == 0.0);
  CHECK(e125.delta2 == 1.0);
  CHECK(e125.delta3 == 1.0);
}

TEST_CASE("depth metrics honor the cap, the valid mask and the sign") {
  const double fb = 320.0;
  Field gt_depth(4, 4, 1, 10.0);
  gt_depth(0, 0) = 0.0;   // no ground truth here
  gt_depth(1, 1) = 500.0; // capped to 80
  // negative disparity sign must not matter
  const CorrField pred = CorrField::constant(4, 4, -32.0, 0.0);
  const DepthEval e = depth_metrics(pred, gt_depth, fb);
  CHECK(e.count == 15);
  // the capped pixel: pred 10 vs gt 80
  CHECK(e.abs_rel == doctest::Approx((14 * 0.0 + (80.0 - 10.0) / 80.0) / 15.0));

  CHECK_THROWS_AS(depth_metrics(pred, Field(4, 4, 1, 0.0), fb), EvalError);
  CHECK_THROWS_AS(depth_metrics(pred, gt_depth, -1.0), EvalError);
}

TEST_CASE("delta thresholds are monotone") {
  std::mt19937_64 rng(107);
  Field gt_depth = oracle::random_field(8, 8, 1, rng, 5.0, 60.0);
  Field disp(8, 8, 2, 0.0);
  std::uniform_real_distribution<double> d(4.0, 64.0);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) disp(y, x, 0) = d(rng);
  const DepthEval e = depth_metrics(CorrField{disp}, gt_depth, 320.0);
  CHECK(e.delta1 <= e.delta2);
  CHECK(e.delta2 <= e.delta3);
}

TEST_CASE("garg crop restricts the evaluated region") {
  Field gt_depth(100, 100, 1, 10.0);
  const CorrField pred = CorrField::constant(100, 100, 32.0, 0.0);
  const DepthEval full = depth_metrics(pred, gt_depth, 320.0);
  const DepthEval crop = depth_metrics(pred, gt_depth, 320.0, {}, EvalCrop::Garg);
  CHECK(full.count == 10000);
  CHECK(crop.count < full.count);
  CHECK(crop.count == std::size_t((99 - 40) * (96 - 3)));
}

TEST_CASE("vertical diagnostic") {
  CHECK(stereo_vertical_diagnostic(CorrField::zero(5, 5)) == 0.0);
  CHECK(stereo_vertical_diagnostic(CorrField::constant(5, 5, 0.0, 0.5)) == 0.5);

  std::mt19937_64 rng(109);
  Field f(8, 8, 2);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  double want = 0.0;
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      f(y, x, 0) = d(rng);
      f(y, x, 1) = d(rng);
      want += std::fabs(f(y, x, 1));
    }
  }
  want /= 64.0;
  CHECK(stereo_vertical_diagnostic(CorrField{f}) == doctest::Approx(want).epsilon(1e-12));
}
