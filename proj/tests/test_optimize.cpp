#include <doctest.h>

#include <cmath>
#include <thread>
#include <vector>

#include "common/scenes.hpp"
#include "stereoflow/metrics.hpp"
#include "stereoflow/optimize.hpp"
#include "stereoflow/synth.hpp"

using namespace stereoflow;

namespace {

OptimizerConfig quick_config(int levels, int iters) {
  OptimizerConfig c;
  c.pyramid_levels = levels;
  c.iterations_per_level = iters;
  c.scales = 3;
  return c;
}

bool fields_equal(const Field& a, const Field& b) {
  if (!a.same_shape(b)) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.data()[i] != b.data()[i]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("adam walks down a convex quadratic monotonically") {
  // f(x) = 0.5 |x - c|^2
  std::vector<double> x(8, 0.0);
  const std::vector<double> c = {3.0, -2.0, 5.0, 0.5, -4.0, 1.0, 2.5, -1.5};
  AdamOptimizer adam(x.size(), 0.02, 0.9, 0.999, 1e-8);
  auto f = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += 0.5 * (x[i] - c[i]) * (x[i] - c[i]);
    return s;
  };
  double prev = f();
  std::vector<double> grad(x.size());
  for (int it = 0; it < 120; ++it) {
    for (std::size_t i = 0; i < x.size(); ++i) grad[i] = x[i] - c[i];
    adam.step(x.data(), grad.data());
    const double cur = f();
    CHECK(cur <= prev);
    prev = cur;
  }
  CHECK(prev < f() + 1e-12);
}

TEST_CASE("static cycle stays at the zero field") {
  SceneSpec spec = scenes::rigid(21, 16);
  spec.background_vx = spec.background_vy = 0.0;
  spec.background_depth = std::numeric_limits<double>::infinity();
  const Cycle cycle = render_cycle(spec);

  const CycleResult res =
      optimize_cycle(cycle, LossWeights{}, quick_config(2, 10));
  const Field valid(16, 16, 1, 1.0);
  for (int m = 0; m < kMapCount; ++m) {
    const FlowEval e =
        flow_metrics(res.maps[m], CorrField::zero(16, 16), valid);
    CHECK(e.epe_all < 0.05);
  }
}

TEST_CASE("flow pair recovers a global translation") {
  const Cycle cycle = render_cycle(scenes::rigid(33, 32));
  const auto& gt = *cycle.ground_truth;
  OptimizerConfig cfg = quick_config(3, 150);
  const PairResult res = optimize_pair(cycle.frame(FrameId::LeftT),
                                       cycle.frame(FrameId::LeftT1),
                                       PairMode::Flow, LossWeights{}, cfg);
  const Field valid(32, 32, 1, 1.0);
  const FlowEval fwd = flow_metrics(
      res.forward, gt.maps[static_cast<int>(MapId::FlowLtToLt1)], valid);
  const FlowEval bwd = flow_metrics(
      res.backward, gt.maps[static_cast<int>(MapId::FlowLt1ToLt)], valid);
  CHECK(fwd.epe_all < 0.5);
  CHECK(bwd.epe_all < 0.5);
}

TEST_CASE("stereo pair recovers a uniform disparity") {
  const Cycle cycle = render_cycle(scenes::rigid(39, 32));
  const auto& gt = *cycle.ground_truth;
  OptimizerConfig cfg = quick_config(3, 150);
  const PairResult res = optimize_pair(cycle.frame(FrameId::LeftT),
                                       cycle.frame(FrameId::RightT),
                                       PairMode::Stereo, LossWeights{}, cfg);
  const Field valid(32, 32, 1, 1.0);
  const FlowEval fwd = flow_metrics(
      res.forward, gt.maps[static_cast<int>(MapId::DispLtToRt)], valid);
  CHECK(fwd.epe_all < 0.5);
  CHECK(stereo_vertical_diagnostic(res.forward) < 0.3);
}

TEST_CASE("loss history is segment-monotone between mask refreshes") {
  const Cycle cycle = render_cycle(scenes::rigid(33, 32));
  OptimizerConfig cfg = quick_config(2, 60);
  const PairResult res = optimize_pair(cycle.frame(FrameId::LeftT),
                                       cycle.frame(FrameId::LeftT1),
                                       PairMode::Flow, LossWeights{}, cfg);
  REQUIRE(!res.history.empty());
  double segment_start = res.history.front().total;
  for (std::size_t i = 1; i < res.history.size(); ++i) {
    const auto& row = res.history[i];
    const auto& prev = res.history[i - 1];
    if (row.masks_refreshed || row.level != prev.level) {
      segment_start = row.total;
      continue;
    }
    // each smooth segment must end no higher than it started
    if (i + 1 == res.history.size() || res.history[i + 1].masks_refreshed ||
        res.history[i + 1].level != row.level) {
      CHECK(row.total <= segment_start + 1e-9);
    }
  }
}

TEST_CASE("optimization is deterministic") {
  const Cycle cycle = render_cycle(scenes::rigid(47, 16));
  OptimizerConfig cfg = quick_config(2, 30);
  const PairResult a = optimize_pair(cycle.frame(FrameId::LeftT),
                                     cycle.frame(FrameId::LeftT1),
                                     PairMode::Flow, LossWeights{}, cfg);
  const PairResult b = optimize_pair(cycle.frame(FrameId::LeftT),
                                     cycle.frame(FrameId::LeftT1),
                                     PairMode::Flow, LossWeights{}, cfg);
  CHECK(fields_equal(a.forward.field(), b.forward.field()));
  CHECK(fields_equal(a.backward.field(), b.backward.field()));
}

TEST_CASE("concurrent runs match serial runs") {
  const Cycle c1 = render_cycle(scenes::rigid(51, 16));
  const Cycle c2 = render_cycle(scenes::standard_occlusion(52));
  OptimizerConfig cfg = quick_config(2, 20);

  const PairResult s1 = optimize_pair(c1.frame(FrameId::LeftT),
                                      c1.frame(FrameId::LeftT1),
                                      PairMode::Flow, LossWeights{}, cfg);
  const CycleResult s2 = optimize_cycle(c2, LossWeights{}, cfg);

  PairResult t1;
  CycleResult t2;
  std::thread th1([&] {
    t1 = optimize_pair(c1.frame(FrameId::LeftT), c1.frame(FrameId::LeftT1),
                       PairMode::Flow, LossWeights{}, cfg);
  });
  std::thread th2([&] { t2 = optimize_cycle(c2, LossWeights{}, cfg); });
  th1.join();
  th2.join();

  CHECK(fields_equal(s1.forward.field(), t1.forward.field()));
  for (int m = 0; m < kMapCount; ++m) {
    CHECK(fields_equal(s2.maps[m].field(), t2.maps[m].field()));
  }
}

TEST_CASE("config validation") {
  OptimizerConfig bad;
  bad.step_size = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  OptimizerConfig bad2;
  bad2.pyramid_levels = 0;
  CHECK_THROWS_AS(bad2.validate(), ConfigError);
}

TEST_CASE("optimizer and weight configs load from key-value text") {
  const KeyValueFile kv = KeyValueFile::parse(R"(
alpha = 0.9
lambda_sm = 5
step_size = 0.01
iterations_per_level = 42
two_warp_variant = 2
occlusion_transport = target
alpha2 = 0.75
)");
  const LossWeights w = load_loss_weights(kv);
  CHECK(w.alpha == 0.9);
  CHECK(w.lambda_sm == 5.0);
  CHECK(w.lambda_lr == 0.5);  // untouched default
  const OptimizerConfig c = load_optimizer_config(kv);
  CHECK(c.step_size == 0.01);
  CHECK(c.iterations_per_level == 42);
  CHECK(c.two_warp.variant == 2);
  CHECK(c.two_warp.occ_transport == TwoWarpConfig::OccTransport::TargetTimeStereo);
  CHECK(c.occlusion.alpha2 == 0.75);
}
