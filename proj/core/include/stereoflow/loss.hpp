#pragma once

#include <array>
#include <vector>

#include "stereoflow/cycle.hpp"
#include "stereoflow/field.hpp"
#include "stereoflow/occlusion.hpp"
#include "stereoflow/tape.hpp"

namespace stereoflow {

struct LossWeights {
  double alpha = 0.85;       // SSIM share of the photometric term
  double beta = 10.0;        // edge sensitivity of the smoothness weight
  double lambda_sm = 10.0;
  double lambda_lr = 0.5;
  double lambda_2warp = 0.2;
  double ssim_c1 = 1e-4;     // (0.01)^2 for unit dynamic range
  double ssim_c2 = 9e-4;     // (0.03)^2
  int ssim_window = 3;

  void validate() const;
};

// Which double-reconstruction pair the cycle consistency term compares.
// Variant 1: route the target frame through its stereo counterpart, then
// the flow link; reference is the direct flow reconstruction. Variant 2:
// route through the temporal neighbor, then the stereo link; reference is
// the direct stereo reconstruction. Variant 3: variant 1 applied to the
// opposite diagonal of the cycle (targets the t+1 row).
struct TwoWarpConfig {
  int variant = 1;  // 1, 2 or 3
  // Stereo map used to transport a flow occlusion map into the target
  // view: the map at the time opposite the target frame (literal reading)
  // or at the target frame's own time.
  enum class OccTransport { OppositeTimeStereo, TargetTimeStereo };
  OccTransport occ_transport = OccTransport::OppositeTimeStereo;
};

// One double-warp route and its single-warp reference.
struct TwoWarpPath {
  FrameId target;
  MapId inner;             // first warp, applied to frame `inner_source`
  FrameId inner_source;
  MapId outer;             // second warp, lives in `target`
  MapId direct;            // one-warp reference map for `target`
  FrameId direct_source;
  MapId occ_flow_forward;  // flow map whose occlusion gates the loss
  bool transport_occ;      // warp the occlusion by a stereo map first
  MapId occ_transport_map;
};

// The primary path and its mirrored (left/right swapped) counterpart.
std::array<TwoWarpPath, 2> two_warp_paths(const TwoWarpConfig& cfg);

struct CycleLossOptions {
  int scales = 4;
  bool enable_two_warp = true;
  TwoWarpConfig two_warp{};
  OcclusionParams occlusion{};
  // Charbonnier relaxation sqrt(x^2 + eps^2) of the smoothness magnitude,
  // used during optimization; 0 keeps the exact absolute value. The plain
  // subgradient of |.| chatters at flat fields and stalls per-element Adam.
  double smoothness_eps = 0.0;
  // Measure smoothness and left-right residuals on width-normalized
  // displacements (the unit the regularizer weights were tuned for in the
  // encoder/decoder lineage); off = plain pixel units.
  bool normalize_units = false;
};

// Scalar values of every individual term, for reporting and tests.
struct CycleLossReport {
  int scales = 0;
  std::vector<std::array<double, kMapCount>> rec;     // [scale][map]
  std::vector<std::array<double, kMapCount>> smooth;  // [scale][map]
  std::vector<std::array<double, 4>> lr;              // [scale][direction]
  std::array<double, 2> two_warp{0.0, 0.0};           // finest scale only
  double rec_total = 0.0;
  double smooth_total = 0.0;
  double lr_total = 0.0;
  double two_warp_total = 0.0;
  double total = 0.0;  // rec + lambda_sm*sm + lambda_lr*lr + lambda_2warp*2warp
  int degenerate_mask_events = 0;
};

// Constant masks entering the loss; recomputed from the current maps at a
// configurable interval and held fixed in between, so each optimization
// segment sees a smooth objective.
struct CycleMasks {
  int scales = 0;
  std::vector<std::array<Field, kMapCount>> rec;  // occlusion x validity, eroded
  std::vector<std::array<Field, 4>> lr_validity;
  std::array<Field, 2> two_warp;                  // finest scale
  std::array<OcclusionMap, 4> flow_occlusion;     // finest scale, flow_index order
};

CycleMasks compute_cycle_masks(const std::array<Field, kMapCount>& maps,
                               const LossWeights& weights,
                               const CycleLossOptions& opts);

// ----- graph builders (all losses are built on a Tape) -----

// Per-pixel SSIM over a clipped box window, averaged over channels.
Var ssim_graph(Tape& t, Var a, Var b, const LossWeights& w);
// alpha*(1-SSIM)/2 + (1-alpha)*|a-b|, per pixel, channel-averaged.
Var photometric_graph(Tape& t, Var target, Var reconstructed, const LossWeights& w);
Var reconstruction_loss_graph(Tape& t, Var target, Var reconstructed,
                              Field mask, const LossWeights& w);
Var smoothness_loss_graph(Tape& t, Var corr, Var image, double beta,
                          double charbonnier_eps = 0.0);
Var lr_consistency_graph(Tape& t, Var d_lr, Var d_rl, const Field& validity);

struct CycleLossGraph {
  std::array<Var, kMapCount> maps;  // leaves at the working resolution
  Var total;
  Var rec_sum, smooth_sum, lr_sum, two_warp_sum;
  std::vector<std::array<Var, kMapCount>> rec, smooth;
  std::vector<std::array<Var, 4>> lr;
  std::array<Var, 2> two_warp{};

  CycleLossReport report(const Tape& t, const LossWeights& w) const;
};

// Multi-scale total objective. Coarser map scales are derived inside the
// graph by 2x pooling with displacement rescaling, so gradients reach the
// working-resolution leaves; images are constants per scale.
CycleLossGraph build_cycle_loss(Tape& t, const Cycle& cycle,
                                const std::array<Field, kMapCount>& initial_maps,
                                const CycleMasks& masks,
                                const LossWeights& weights,
                                const CycleLossOptions& opts);

struct PairMasks {
  int scales = 0;
  std::vector<std::array<Field, 2>> rec;
  std::vector<std::array<Field, 2>> lr_validity;  // stereo mode only
  std::array<OcclusionMap, 2> occlusion;          // finest scale (flow mode)
};

PairMasks compute_pair_masks(const std::array<Field, 2>& maps, PairMode mode,
                             const LossWeights& weights, int scales,
                             const OcclusionParams& occ = {});

struct PairLossGraph {
  std::array<Var, 2> maps;  // forward (a->b), backward (b->a)
  Var total;
  Var rec_sum, smooth_sum, lr_sum;
};

PairLossGraph build_pair_loss(Tape& t, const Image& a, const Image& b,
                              const std::array<Field, 2>& initial_maps,
                              const PairMasks& masks, const LossWeights& weights,
                              PairMode mode, int scales,
                              double smoothness_eps = 0.0,
                              bool normalize_units = false);

// ----- one-shot evaluation entry points -----

Field ssim(const Image& a, const Image& b, const LossWeights& w = {});
double reconstruction_loss(const Image& target, const Image& reconstructed,
                           const Field& mask, const LossWeights& w = {});
double smoothness_loss(const CorrField& corr, const Image& image, double beta);
double lr_consistency_loss(const CorrField& d_lr, const CorrField& d_rl);
// Primary path of the configured variant, at the maps' own resolution.
double two_warp_loss(const Cycle& cycle,
                     const std::array<CorrField, kMapCount>& maps,
                     const TwoWarpConfig& cfg, const LossWeights& w = {});
CycleLossReport total_loss(const Cycle& cycle,
                           const std::array<CorrField, kMapCount>& maps,
                           const LossWeights& weights,
                           const CycleLossOptions& opts = {});

}  // namespace stereoflow
