#include "stereoflow/loss.hpp"

#include <cmath>

#include "stereoflow/warp.hpp"

namespace stereoflow {

// ----- cycle topology -----

FrameId map_target(MapId m) {
  switch (m) {
    case MapId::DispLtToRt: return FrameId::LeftT;
    case MapId::DispRtToLt: return FrameId::RightT;
    case MapId::DispLt1ToRt1: return FrameId::LeftT1;
    case MapId::DispRt1ToLt1: return FrameId::RightT1;
    case MapId::FlowLtToLt1: return FrameId::LeftT;
    case MapId::FlowLt1ToLt: return FrameId::LeftT1;
    case MapId::FlowRtToRt1: return FrameId::RightT;
    case MapId::FlowRt1ToRt: return FrameId::RightT1;
  }
  return FrameId::LeftT;
}

FrameId map_source(MapId m) {
  switch (m) {
    case MapId::DispLtToRt: return FrameId::RightT;
    case MapId::DispRtToLt: return FrameId::LeftT;
    case MapId::DispLt1ToRt1: return FrameId::RightT1;
    case MapId::DispRt1ToLt1: return FrameId::LeftT1;
    case MapId::FlowLtToLt1: return FrameId::LeftT1;
    case MapId::FlowLt1ToLt: return FrameId::LeftT;
    case MapId::FlowRtToRt1: return FrameId::RightT1;
    case MapId::FlowRt1ToRt: return FrameId::RightT;
  }
  return FrameId::LeftT;
}

bool is_flow_map(MapId m) { return static_cast<int>(m) >= 4; }

MapId reverse_map(MapId m) {
  switch (m) {
    case MapId::DispLtToRt: return MapId::DispRtToLt;
    case MapId::DispRtToLt: return MapId::DispLtToRt;
    case MapId::DispLt1ToRt1: return MapId::DispRt1ToLt1;
    case MapId::DispRt1ToLt1: return MapId::DispLt1ToRt1;
    case MapId::FlowLtToLt1: return MapId::FlowLt1ToLt;
    case MapId::FlowLt1ToLt: return MapId::FlowLtToLt1;
    case MapId::FlowRtToRt1: return MapId::FlowRt1ToRt;
    case MapId::FlowRt1ToRt: return MapId::FlowRtToRt1;
  }
  return m;
}

int flow_index(MapId m) { return static_cast<int>(m) - 4; }

const char* map_name(MapId m) {
  switch (m) {
    case MapId::DispLtToRt: return "D_lt_rt";
    case MapId::DispRtToLt: return "D_rt_lt";
    case MapId::DispLt1ToRt1: return "D_lt1_rt1";
    case MapId::DispRt1ToLt1: return "D_rt1_lt1";
    case MapId::FlowLtToLt1: return "F_lt_lt1";
    case MapId::FlowLt1ToLt: return "F_lt1_lt";
    case MapId::FlowRtToRt1: return "F_rt_rt1";
    case MapId::FlowRt1ToRt: return "F_rt1_rt";
  }
  return "?";
}

const char* frame_name(FrameId f) {
  switch (f) {
    case FrameId::LeftT: return "I_lt";
    case FrameId::RightT: return "I_rt";
    case FrameId::LeftT1: return "I_lt1";
    case FrameId::RightT1: return "I_rt1";
  }
  return "?";
}

void Cycle::validate() const {
  for (int i = 1; i < kFrameCount; ++i) {
    if (!frames[i].field().same_extent(frames[0].field()) ||
        frames[i].channels() != frames[0].channels()) {
      throw ShapeError("cycle frames must share extent and channel count");
    }
  }
}

void LossWeights::validate() const {
  if (alpha < 0.0 || alpha > 1.0) throw ConfigError("alpha must lie in [0,1]");
  if (beta < 0.0 || lambda_sm < 0.0 || lambda_lr < 0.0 || lambda_2warp < 0.0) {
    throw ConfigError("loss weights must be nonnegative");
  }
  if (ssim_c1 <= 0.0 || ssim_c2 <= 0.0) throw ConfigError("ssim stabilizers must be positive");
  if (ssim_window < 1 || ssim_window % 2 == 0) {
    throw ConfigError("ssim window must be odd and positive");
  }
}

// ----- two-warp route descriptors -----

std::array<TwoWarpPath, 2> two_warp_paths(const TwoWarpConfig& cfg) {
  const bool opposite = cfg.occ_transport == TwoWarpConfig::OccTransport::OppositeTimeStereo;
  TwoWarpPath primary, mirrored;
  switch (cfg.variant) {
    case 1:
      // Target right,t through left,t (stereo outer, flow inner); the
      // reference is the direct temporal reconstruction.
      primary = {FrameId::RightT,  MapId::FlowLtToLt1, FrameId::LeftT1,
                 MapId::DispRtToLt, MapId::FlowRtToRt1, FrameId::RightT1,
                 MapId::FlowLtToLt1,
                 true, opposite ? MapId::DispRt1ToLt1 : MapId::DispRtToLt};
      mirrored = {FrameId::LeftT,  MapId::FlowRtToRt1, FrameId::RightT1,
                  MapId::DispLtToRt, MapId::FlowLtToLt1, FrameId::LeftT1,
                  MapId::FlowRtToRt1,
                  true, opposite ? MapId::DispLt1ToRt1 : MapId::DispLtToRt};
      break;
    case 2:
      // Target right,t through right,t+1 (flow outer, stereo inner); the
      // reference is the direct stereo reconstruction. The gating flow
      // occlusion already lives in the target frame.
      primary = {FrameId::RightT,  MapId::DispRt1ToLt1, FrameId::LeftT1,
                 MapId::FlowRtToRt1, MapId::DispRtToLt, FrameId::LeftT,
                 MapId::FlowRtToRt1,
                 false, MapId::DispRtToLt};
      mirrored = {FrameId::LeftT,  MapId::DispLt1ToRt1, FrameId::RightT1,
                  MapId::FlowLtToLt1, MapId::DispLtToRt, FrameId::RightT,
                  MapId::FlowLtToLt1,
                  false, MapId::DispLtToRt};
      break;
    case 3:
      // Variant 1 over the opposite diagonal: targets the t+1 row and uses
      // the backward flow maps.
      primary = {FrameId::RightT1, MapId::FlowLt1ToLt, FrameId::LeftT,
                 MapId::DispRt1ToLt1, MapId::FlowRt1ToRt, FrameId::RightT,
                 MapId::FlowLt1ToLt,
                 true, opposite ? MapId::DispRtToLt : MapId::DispRt1ToLt1};
      mirrored = {FrameId::LeftT1, MapId::FlowRt1ToRt, FrameId::RightT,
                  MapId::DispLt1ToRt1, MapId::FlowLt1ToLt, FrameId::LeftT,
                  MapId::FlowRt1ToRt,
                  true, opposite ? MapId::DispLtToRt : MapId::DispLt1ToRt1};
      break;
    default:
      throw ConfigError("two-warp variant must be 1, 2 or 3");
  }
  return {primary, mirrored};
}

// ----- graph builders -----

Var ssim_graph(Tape& t, Var a, Var b, const LossWeights& w) {
  const int win = w.ssim_window;
  Var mu_a = t.box_mean(a, win);
  Var mu_b = t.box_mean(b, win);
  Var mu_a2 = t.square(mu_a);
  Var mu_b2 = t.square(mu_b);
  Var mu_ab = mu_a * mu_b;
  Var sigma_a = t.box_mean(t.square(a), win) - mu_a2;
  Var sigma_b = t.box_mean(t.square(b), win) - mu_b2;
  Var sigma_ab = t.box_mean(a * b, win) - mu_ab;
  Var num = t.affine(mu_ab, 2.0, w.ssim_c1) * t.affine(sigma_ab, 2.0, w.ssim_c2);
  Var den = (mu_a2 + mu_b2 + w.ssim_c1) * (sigma_a + sigma_b + w.ssim_c2);
  return t.channel_mean(num / den);
}

Var photometric_graph(Tape& t, Var target, Var reconstructed, const LossWeights& w) {
  Var s = ssim_graph(t, target, reconstructed, w);
  Var ssim_cost = t.affine(s, -0.5, 0.5);  // (1 - SSIM)/2
  Var l1 = t.channel_mean(t.abs(target - reconstructed));
  return t.affine(ssim_cost, w.alpha, 0.0) + t.affine(l1, 1.0 - w.alpha, 0.0);
}

Var reconstruction_loss_graph(Tape& t, Var target, Var reconstructed,
                              Field mask, const LossWeights& w) {
  return t.reduce_mean(photometric_graph(t, target, reconstructed, w),
                       std::move(mask));
}

Var smoothness_loss_graph(Tape& t, Var corr, Var image, double beta,
                          double charbonnier_eps) {
  Var total{};
  for (Axis axis : {Axis::X, Axis::Y}) {
    Var raw = t.spatial_gradient(corr, axis, 2);
    Var d2 = charbonnier_eps > 0.0
                 ? t.sqrt(t.affine(t.square(raw), 1.0,
                                   charbonnier_eps * charbonnier_eps))
                 : t.abs(raw);
    // channel mean * channel count = sum over u and v
    Var corr_cost = t.affine(t.channel_mean(d2), double(corr.shape().channels), 0.0);
    Var d1 = t.channel_mean(t.abs(t.spatial_gradient(image, axis, 1)));
    Var weight = t.exp(t.affine(d1, -beta, 0.0));
    Var term = corr_cost * weight;
    total = axis == Axis::X ? term : total + term;
  }
  return t.reduce_mean(total);
}

Var lr_consistency_graph(Tape& t, Var d_lr, Var d_rl, const Field& validity) {
  Var residual = t.abs(d_lr + t.warp(d_rl, d_lr));
  Var per_pixel = t.affine(t.channel_mean(residual), 2.0, 0.0);
  Var masked = per_pixel * t.constant(validity);
  return t.reduce_mean(masked);
}

namespace {

Field corr_downsample_field(const Field& f) {
  Field d = stereoflow::downsample2(f);
  for (std::size_t i = 0; i < d.size(); ++i) d.data()[i] *= 0.5;
  return d;
}

// Binary mask marking pixels whose inner-warp sample was valid, seen from
// the target frame of the outer warp.
Field transported_validity(const Field& inner_validity, const Field& outer_corr) {
  Field warped = bilinear_warp(inner_validity, outer_corr);
  Field out = Field::like(warped);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data()[i] = warped.data()[i] >= 0.5 ? 1.0 : 0.0;
  }
  return out;
}

Field mask_product(const Field& a, const Field& b) {
  require_same_shape(a, b, "mask_product");
  Field out = Field::like(a);
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.data()[i] = a.data()[i] * b.data()[i];
  }
  return out;
}

Field scalar_field(double v) { return Field(1, 1, 1, v); }

}  // namespace

CycleMasks compute_cycle_masks(const std::array<Field, kMapCount>& maps,
                               const LossWeights& weights,
                               const CycleLossOptions& opts) {
  const int erode_r = weights.ssim_window / 2;
  CycleMasks out;
  out.scales = opts.scales;
  out.rec.resize(opts.scales);
  out.lr_validity.resize(opts.scales);

  std::array<Field, kMapCount> level = maps;
  for (int s = 0; s < opts.scales; ++s) {
    if (s > 0) {
      for (auto& f : level) f = corr_downsample_field(f);
    }
    std::array<Field, kMapCount> validity;
    std::array<OcclusionMap, 4> occ;
    for (int m = 0; m < kMapCount; ++m) {
      validity[m] = validity_mask(level[m]);
    }
    for (int m = 4; m < kMapCount; ++m) {
      const MapId id = static_cast<MapId>(m);
      occ[flow_index(id)] = estimate_occlusion(
          CorrField(level[m]), CorrField(level[static_cast<int>(reverse_map(id))]),
          opts.occlusion);
    }
    for (int m = 0; m < kMapCount; ++m) {
      const MapId id = static_cast<MapId>(m);
      Field mask = is_flow_map(id)
                       ? mask_product(occ[flow_index(id)].field(), validity[m])
                       : validity[m];
      out.rec[s][m] = erode(mask, erode_r);
    }
    // lr directions: (t: l->r), (t: r->l), (t+1: l->r), (t+1: r->l)
    out.lr_validity[s] = {validity[0], validity[1], validity[2], validity[3]};

    if (s == 0) {
      out.flow_occlusion = occ;
      if (opts.enable_two_warp) {
        const auto paths = two_warp_paths(opts.two_warp);
        for (int k = 0; k < 2; ++k) {
          const TwoWarpPath& p = paths[k];
          const int outer = static_cast<int>(p.outer);
          const int inner = static_cast<int>(p.inner);
          const int direct = static_cast<int>(p.direct);
          const OcclusionMap& occ_flow = occ[flow_index(p.occ_flow_forward)];
          Field gate;
          if (p.transport_occ) {
            gate = two_warp_occlusion(
                       occ_flow, CorrField(level[static_cast<int>(p.occ_transport_map)]))
                       .field();
          } else {
            gate = occ_flow.field();
          }
          Field mask = mask_product(gate, validity[outer]);
          mask = mask_product(mask, transported_validity(validity[inner], level[outer]));
          mask = mask_product(mask, validity[direct]);
          out.two_warp[k] = erode(mask, erode_r);
        }
      }
    }
  }
  return out;
}

CycleLossGraph build_cycle_loss(Tape& t, const Cycle& cycle,
                                const std::array<Field, kMapCount>& initial_maps,
                                const CycleMasks& masks,
                                const LossWeights& weights,
                                const CycleLossOptions& opts) {
  weights.validate();
  cycle.validate();
  const int scales = opts.scales;
  if (masks.scales != scales) throw ShapeError("mask pyramid does not match scale count");

  CycleLossGraph g;
  g.rec.resize(scales);
  g.smooth.resize(scales);
  g.lr.resize(scales);

  // Leaves at the working resolution; coarser scales derived on the tape.
  std::vector<std::array<Var, kMapCount>> map_pyr(scales);
  for (int m = 0; m < kMapCount; ++m) {
    g.maps[m] = t.leaf(initial_maps[m]);
    map_pyr[0][m] = g.maps[m];
  }
  for (int s = 1; s < scales; ++s) {
    for (int m = 0; m < kMapCount; ++m) {
      map_pyr[s][m] = t.affine(t.downsample2(map_pyr[s - 1][m]), 0.5, 0.0);
    }
  }

  std::vector<std::array<Var, kFrameCount>> img_pyr(scales);
  {
    std::array<Field, kFrameCount> level;
    for (int f = 0; f < kFrameCount; ++f) level[f] = cycle.frames[f].field();
    for (int s = 0; s < scales; ++s) {
      if (s > 0) {
        for (auto& f : level) f = downsample2(f);
      }
      for (int f = 0; f < kFrameCount; ++f) img_pyr[s][f] = t.constant(level[f]);
    }
  }

  Var rec_sum{}, smooth_sum{}, lr_sum{};
  for (int s = 0; s < scales; ++s) {
    for (int m = 0; m < kMapCount; ++m) {
      const MapId id = static_cast<MapId>(m);
      Var target = img_pyr[s][static_cast<int>(map_target(id))];
      Var source = img_pyr[s][static_cast<int>(map_source(id))];
      Var recon = t.warp(source, map_pyr[s][m]);
      g.rec[s][m] = reconstruction_loss_graph(t, target, recon, masks.rec[s][m], weights);
      Var sm = smoothness_loss_graph(t, map_pyr[s][m], target, weights.beta,
                                     opts.smoothness_eps);
      if (opts.normalize_units) {
        sm = t.affine(sm, 1.0 / map_pyr[s][m].shape().width, 0.0);
      }
      g.smooth[s][m] = sm;
      rec_sum = rec_sum.valid() ? rec_sum + g.rec[s][m] : g.rec[s][m];
      smooth_sum = smooth_sum.valid() ? smooth_sum + g.smooth[s][m] : g.smooth[s][m];
    }
    const std::array<std::pair<MapId, MapId>, 4> lr_dirs = {{
        {MapId::DispLtToRt, MapId::DispRtToLt},
        {MapId::DispRtToLt, MapId::DispLtToRt},
        {MapId::DispLt1ToRt1, MapId::DispRt1ToLt1},
        {MapId::DispRt1ToLt1, MapId::DispLt1ToRt1},
    }};
    for (int k = 0; k < 4; ++k) {
      Var lr = lr_consistency_graph(t, map_pyr[s][static_cast<int>(lr_dirs[k].first)],
                                    map_pyr[s][static_cast<int>(lr_dirs[k].second)],
                                    masks.lr_validity[s][k]);
      if (opts.normalize_units) {
        lr = t.affine(lr, 1.0 / map_pyr[s][0].shape().width, 0.0);
      }
      g.lr[s][k] = lr;
      lr_sum = lr_sum.valid() ? lr_sum + g.lr[s][k] : g.lr[s][k];
    }
  }

  Var tw_sum{};
  if (opts.enable_two_warp) {
    const auto paths = two_warp_paths(opts.two_warp);
    for (int k = 0; k < 2; ++k) {
      const TwoWarpPath& p = paths[k];
      Var inner = t.warp(img_pyr[0][static_cast<int>(p.inner_source)],
                         map_pyr[0][static_cast<int>(p.inner)]);
      Var twice = t.warp(inner, map_pyr[0][static_cast<int>(p.outer)]);
      Var direct = t.warp(img_pyr[0][static_cast<int>(p.direct_source)],
                          map_pyr[0][static_cast<int>(p.direct)]);
      g.two_warp[k] =
          reconstruction_loss_graph(t, twice, direct, masks.two_warp[k], weights);
      tw_sum = tw_sum.valid() ? tw_sum + g.two_warp[k] : g.two_warp[k];
    }
  } else {
    tw_sum = t.constant(scalar_field(0.0));
  }

  g.rec_sum = rec_sum;
  g.smooth_sum = smooth_sum;
  g.lr_sum = lr_sum;
  g.two_warp_sum = tw_sum;
  g.total = rec_sum + t.affine(smooth_sum, weights.lambda_sm, 0.0) +
            t.affine(lr_sum, weights.lambda_lr, 0.0) +
            t.affine(tw_sum, weights.lambda_2warp, 0.0);
  return g;
}

CycleLossReport CycleLossGraph::report(const Tape& t, const LossWeights& w) const {
  CycleLossReport r;
  r.scales = static_cast<int>(rec.size());
  r.rec.resize(r.scales);
  r.smooth.resize(r.scales);
  r.lr.resize(r.scales);
  for (int s = 0; s < r.scales; ++s) {
    for (int m = 0; m < kMapCount; ++m) {
      r.rec[s][m] = t.scalar(rec[s][m]);
      r.smooth[s][m] = t.scalar(smooth[s][m]);
    }
    for (int k = 0; k < 4; ++k) r.lr[s][k] = t.scalar(lr[s][k]);
  }
  for (int k = 0; k < 2; ++k) {
    r.two_warp[k] = two_warp[k].valid() ? t.scalar(two_warp[k]) : 0.0;
  }
  r.rec_total = t.scalar(rec_sum);
  r.smooth_total = t.scalar(smooth_sum);
  r.lr_total = t.scalar(lr_sum);
  r.two_warp_total = t.scalar(two_warp_sum);
  r.total = t.scalar(total);
  r.degenerate_mask_events = t.degenerate_mask_events();
  (void)w;
  return r;
}

PairMasks compute_pair_masks(const std::array<Field, 2>& maps, PairMode mode,
                             const LossWeights& weights, int scales,
                             const OcclusionParams& occ_params) {
  const int erode_r = weights.ssim_window / 2;
  PairMasks out;
  out.scales = scales;
  out.rec.resize(scales);
  out.lr_validity.resize(scales);
  std::array<Field, 2> level = maps;
  for (int s = 0; s < scales; ++s) {
    if (s > 0) {
      for (auto& f : level) f = corr_downsample_field(f);
    }
    std::array<Field, 2> validity = {validity_mask(level[0]), validity_mask(level[1])};
    if (mode == PairMode::Flow) {
      std::array<OcclusionMap, 2> occ = {
          estimate_occlusion(CorrField(level[0]), CorrField(level[1]), occ_params),
          estimate_occlusion(CorrField(level[1]), CorrField(level[0]), occ_params)};
      out.rec[s][0] = erode(mask_product(occ[0].field(), validity[0]), erode_r);
      out.rec[s][1] = erode(mask_product(occ[1].field(), validity[1]), erode_r);
      if (s == 0) out.occlusion = occ;
    } else {
      out.rec[s][0] = erode(validity[0], erode_r);
      out.rec[s][1] = erode(validity[1], erode_r);
      if (s == 0) {
        out.occlusion = {OcclusionMap::all_visible(level[0].height(), level[0].width()),
                         OcclusionMap::all_visible(level[0].height(), level[0].width())};
      }
    }
    out.lr_validity[s] = validity;
  }
  return out;
}

PairLossGraph build_pair_loss(Tape& t, const Image& a, const Image& b,
                              const std::array<Field, 2>& initial_maps,
                              const PairMasks& masks, const LossWeights& weights,
                              PairMode mode, int scales,
                              double smoothness_eps, bool normalize_units) {
  weights.validate();
  require_same_extent(a.field(), b.field(), "build_pair_loss");
  PairLossGraph g;
  std::vector<std::array<Var, 2>> map_pyr(scales);
  for (int m = 0; m < 2; ++m) {
    g.maps[m] = t.leaf(initial_maps[m]);
    map_pyr[0][m] = g.maps[m];
  }
  for (int s = 1; s < scales; ++s) {
    for (int m = 0; m < 2; ++m) {
      map_pyr[s][m] = t.affine(t.downsample2(map_pyr[s - 1][m]), 0.5, 0.0);
    }
  }
  std::vector<std::array<Var, 2>> img_pyr(scales);
  {
    std::array<Field, 2> level = {a.field(), b.field()};
    for (int s = 0; s < scales; ++s) {
      if (s > 0) {
        for (auto& f : level) f = downsample2(f);
      }
      img_pyr[s][0] = t.constant(level[0]);
      img_pyr[s][1] = t.constant(level[1]);
    }
  }

  Var rec_sum{}, smooth_sum{}, lr_sum{};
  for (int s = 0; s < scales; ++s) {
    for (int m = 0; m < 2; ++m) {
      Var target = img_pyr[s][m];
      Var source = img_pyr[s][1 - m];
      Var recon = t.warp(source, map_pyr[s][m]);
      Var rec = reconstruction_loss_graph(t, target, recon, masks.rec[s][m], weights);
      Var sm = smoothness_loss_graph(t, map_pyr[s][m], target, weights.beta,
                                     smoothness_eps);
      if (normalize_units) {
        sm = t.affine(sm, 1.0 / map_pyr[s][m].shape().width, 0.0);
      }
      rec_sum = rec_sum.valid() ? rec_sum + rec : rec;
      smooth_sum = smooth_sum.valid() ? smooth_sum + sm : sm;
      if (mode == PairMode::Stereo) {
        Var lr = lr_consistency_graph(t, map_pyr[s][m], map_pyr[s][1 - m],
                                      masks.lr_validity[s][m]);
        if (normalize_units) {
          lr = t.affine(lr, 1.0 / map_pyr[s][m].shape().width, 0.0);
        }
        lr_sum = lr_sum.valid() ? lr_sum + lr : lr;
      }
    }
  }
  if (!lr_sum.valid()) lr_sum = t.constant(scalar_field(0.0));

  g.rec_sum = rec_sum;
  g.smooth_sum = smooth_sum;
  g.lr_sum = lr_sum;
  g.total = rec_sum + t.affine(smooth_sum, weights.lambda_sm, 0.0) +
            t.affine(lr_sum, weights.lambda_lr, 0.0);
  return g;
}

// ----- one-shot evaluation -----

Field ssim(const Image& a, const Image& b, const LossWeights& w) {
  require_same_shape(a.field(), b.field(), "ssim");
  Tape t;
  Var va = t.constant(a.field());
  Var vb = t.constant(b.field());
  return ssim_graph(t, va, vb, w).value();
}

double reconstruction_loss(const Image& target, const Image& reconstructed,
                           const Field& mask, const LossWeights& w) {
  require_same_shape(target.field(), reconstructed.field(), "reconstruction_loss");
  Tape t;
  Var vt = t.constant(target.field());
  Var vr = t.constant(reconstructed.field());
  return t.scalar(reconstruction_loss_graph(t, vt, vr, mask, w));
}

double smoothness_loss(const CorrField& corr, const Image& image, double beta) {
  require_same_extent(corr.field(), image.field(), "smoothness_loss");
  Tape t;
  Var vc = t.constant(corr.field());
  Var vi = t.constant(image.field());
  return t.scalar(smoothness_loss_graph(t, vc, vi, beta));
}

double lr_consistency_loss(const CorrField& d_lr, const CorrField& d_rl) {
  require_same_extent(d_lr.field(), d_rl.field(), "lr_consistency_loss");
  Tape t;
  Var va = t.constant(d_lr.field());
  Var vb = t.constant(d_rl.field());
  return t.scalar(lr_consistency_graph(t, va, vb, validity_mask(d_lr.field())));
}

double two_warp_loss(const Cycle& cycle,
                     const std::array<CorrField, kMapCount>& maps,
                     const TwoWarpConfig& cfg, const LossWeights& w) {
  cycle.validate();
  std::array<Field, kMapCount> fields;
  for (int m = 0; m < kMapCount; ++m) fields[m] = maps[m].field();
  CycleLossOptions opts;
  opts.scales = 1;
  opts.two_warp = cfg;
  CycleMasks masks = compute_cycle_masks(fields, w, opts);
  Tape t;
  const TwoWarpPath p = two_warp_paths(cfg)[0];
  Var inner = t.warp(t.constant(cycle.frame(p.inner_source).field()),
                     t.constant(fields[static_cast<int>(p.inner)]));
  Var twice = t.warp(inner, t.constant(fields[static_cast<int>(p.outer)]));
  Var direct = t.warp(t.constant(cycle.frame(p.direct_source).field()),
                      t.constant(fields[static_cast<int>(p.direct)]));
  return t.scalar(reconstruction_loss_graph(t, twice, direct, masks.two_warp[0], w));
}

CycleLossReport total_loss(const Cycle& cycle,
                           const std::array<CorrField, kMapCount>& maps,
                           const LossWeights& weights,
                           const CycleLossOptions& opts) {
  std::array<Field, kMapCount> fields;
  for (int m = 0; m < kMapCount; ++m) fields[m] = maps[m].field();
  CycleMasks masks = compute_cycle_masks(fields, weights, opts);
  Tape t;
  CycleLossGraph g = build_cycle_loss(t, cycle, fields, masks, weights, opts);
  return g.report(t, weights);
}

}  // namespace stereoflow
