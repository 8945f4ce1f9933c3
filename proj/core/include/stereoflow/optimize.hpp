#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "stereoflow/config.hpp"
#include "stereoflow/cycle.hpp"
#include "stereoflow/loss.hpp"

namespace stereoflow {

struct OptimizerConfig {
  int pyramid_levels = 4;
  int iterations_per_level = 300;
  double step_size = 0.02;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  // Occlusion/validity masks are re-estimated from the current fields every
  // this many iterations and held fixed in between.
  int occlusion_refresh_interval = 25;
  int scales = 4;  // scales inside the multi-scale objective
  // Charbonnier eps for the smoothness magnitude during optimization (the
  // exact |.| subgradient chatters and stalls Adam on flat fields).
  double smoothness_eps = 1e-3;
  // Width-normalized smoothness/left-right units, matching the unit the
  // regularizer weights were tuned for.
  bool normalize_units = true;
  bool enable_two_warp = true;
  TwoWarpConfig two_warp{};
  OcclusionParams occlusion{};
  unsigned long long seed = 0;  // recorded with outputs; optimization itself
                                // is deterministic and draws no randomness

  void validate() const;
};

struct LossHistoryRow {
  int iteration = 0;  // running index across levels
  int level = 0;      // pyramid level, 0 = finest
  double rec = 0.0, smooth = 0.0, lr = 0.0, two_warp = 0.0, total = 0.0;
  bool masks_refreshed = false;
};

struct CycleResult {
  std::array<CorrField, kMapCount> maps;
  std::array<OcclusionMap, 4> occlusion;  // final flow-direction estimates
  std::vector<LossHistoryRow> history;
  int degenerate_mask_events = 0;
};

// Coarse-to-fine minimization of the cycle objective over all eight
// correspondence fields. Fields start at zero on the coarsest level and are
// bilinearly upsampled (with displacement rescaling) between levels.
CycleResult optimize_cycle(const Cycle& cycle, const LossWeights& weights,
                           const OptimizerConfig& config);

struct PairResult {
  CorrField forward;   // a -> b
  CorrField backward;  // b -> a
  std::array<OcclusionMap, 2> occlusion;  // all-visible in stereo mode
  std::vector<LossHistoryRow> history;
  int degenerate_mask_events = 0;
};

// Single-pair baseline: flow mode masks occlusion and drops the left-right
// term, stereo mode keeps the left-right term with all-visible masks.
PairResult optimize_pair(const Image& a, const Image& b, PairMode mode,
                         const LossWeights& weights,
                         const OptimizerConfig& config);

// Elementwise Adam with bias correction.
class AdamOptimizer {
 public:
  AdamOptimizer(std::size_t size, double step, double beta1, double beta2,
                double eps);
  void step(double* params, const double* grads);
  void reset();
  std::size_t size() const { return m_.size(); }

 private:
  double step_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

LossWeights load_loss_weights(const KeyValueFile& kv);
OptimizerConfig load_optimizer_config(const KeyValueFile& kv);

}  // namespace stereoflow
