#include "stereoflow/optimize.hpp"

#include <cmath>
#include <string>

namespace stereoflow {

void OptimizerConfig::validate() const {
  if (pyramid_levels < 1 || iterations_per_level < 1 || scales < 1) {
    throw ConfigError("optimizer counts must be positive");
  }
  if (step_size <= 0.0) throw ConfigError("step_size must be positive");
  if (smoothness_eps < 0.0) throw ConfigError("smoothness_eps must be nonnegative");
  if (occlusion_refresh_interval < 1) {
    throw ConfigError("occlusion_refresh_interval must be positive");
  }
  if (adam_beta1 < 0.0 || adam_beta1 >= 1.0 || adam_beta2 < 0.0 ||
      adam_beta2 >= 1.0 || adam_eps <= 0.0) {
    throw ConfigError("adam parameters out of range");
  }
}

AdamOptimizer::AdamOptimizer(std::size_t size, double step, double beta1,
                             double beta2, double eps)
    : step_(step), beta1_(beta1), beta2_(beta2), eps_(eps),
      m_(size, 0.0), v_(size, 0.0) {}

void AdamOptimizer::step(double* params, const double* grads) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, t_);
  const double bc2 = 1.0 - std::pow(beta2_, t_);
  for (std::size_t i = 0; i < m_.size(); ++i) {
    const double g = grads[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
    const double mhat = m_[i] / bc1;
    const double vhat = v_[i] / bc2;
    params[i] -= step_ * mhat / (std::sqrt(vhat) + eps_);
  }
}

void AdamOptimizer::reset() {
  t_ = 0;
  std::fill(m_.begin(), m_.end(), 0.0);
  std::fill(v_.begin(), v_.end(), 0.0);
}

namespace {

void check_finite_terms(double rec, double sm, double lr, double tw, int iter) {
  const auto bad = [&](double v) { return !std::isfinite(v); };
  if (bad(rec) || bad(sm) || bad(lr) || bad(tw)) {
    std::string term = bad(rec)  ? "reconstruction"
                       : bad(sm) ? "smoothness"
                       : bad(lr) ? "left-right consistency"
                                 : "two-warp consistency";
    throw OptimError("non-finite " + term + " term at iteration " +
                     std::to_string(iter));
  }
}

struct LevelExtent {
  int h, w;
};

std::vector<LevelExtent> level_extents(int h, int w, int levels) {
  std::vector<LevelExtent> ext(levels);
  ext[0] = {h, w};
  for (int k = 1; k < levels; ++k) {
    ext[k] = {(ext[k - 1].h + 1) / 2, (ext[k - 1].w + 1) / 2};
  }
  return ext;
}

}  // namespace

CycleResult optimize_cycle(const Cycle& cycle, const LossWeights& weights,
                           const OptimizerConfig& config) {
  cycle.validate();
  weights.validate();
  config.validate();

  const int levels = config.pyramid_levels;
  const auto extents = level_extents(cycle.height(), cycle.width(), levels);

  // Image pyramid, level 0 = input resolution.
  std::vector<std::array<Image, kFrameCount>> pyramid(levels);
  pyramid[0] = cycle.frames;
  for (int k = 1; k < levels; ++k) {
    for (int f = 0; f < kFrameCount; ++f) {
      pyramid[k][f] = downsample2(pyramid[k - 1][f]);
    }
  }

  CycleLossOptions opts;
  opts.scales = config.scales;
  opts.enable_two_warp = config.enable_two_warp;
  opts.two_warp = config.two_warp;
  opts.occlusion = config.occlusion;
  opts.smoothness_eps = config.smoothness_eps;
  opts.normalize_units = config.normalize_units;

  std::array<Field, kMapCount> maps;
  for (auto& m : maps) {
    m = Field(extents[levels - 1].h, extents[levels - 1].w, 2, 0.0);
  }

  CycleResult result;
  int global_iter = 0;

  for (int level = levels - 1; level >= 0; --level) {
    Cycle level_cycle;
    level_cycle.frames = pyramid[level];
    level_cycle.focal_length_times_baseline = cycle.focal_length_times_baseline;

    std::vector<AdamOptimizer> adam;
    adam.reserve(kMapCount);
    for (int m = 0; m < kMapCount; ++m) {
      adam.emplace_back(maps[m].size(), config.step_size, config.adam_beta1,
                        config.adam_beta2, config.adam_eps);
    }

    Tape tape;
    CycleLossGraph graph;
    for (int it = 0; it < config.iterations_per_level; ++it) {
      const bool refresh = it % config.occlusion_refresh_interval == 0;
      if (refresh) {
        CycleMasks masks = compute_cycle_masks(maps, weights, opts);
        tape.clear();
        graph = build_cycle_loss(tape, level_cycle, maps, masks, weights, opts);
      } else {
        for (int m = 0; m < kMapCount; ++m) tape.set_leaf(graph.maps[m], maps[m]);
        tape.forward();
      }

      const double rec = tape.scalar(graph.rec_sum);
      const double sm = tape.scalar(graph.smooth_sum);
      const double lr = tape.scalar(graph.lr_sum);
      const double tw = tape.scalar(graph.two_warp_sum);
      check_finite_terms(rec, sm, lr, tw, global_iter);
      result.history.push_back({global_iter, level, rec, sm, lr, tw,
                                tape.scalar(graph.total), refresh});
      result.degenerate_mask_events += tape.degenerate_mask_events();

      tape.backward(graph.total);
      for (int m = 0; m < kMapCount; ++m) {
        adam[m].step(maps[m].data(), tape.grad(graph.maps[m]).data());
      }
      ++global_iter;
    }

    if (level > 0) {
      for (int m = 0; m < kMapCount; ++m) {
        maps[m] = upsample_bilinear(CorrField(maps[m]), extents[level - 1].h,
                                    extents[level - 1].w)
                      .field();
      }
    }
  }

  for (int m = 0; m < kMapCount; ++m) result.maps[m] = CorrField(maps[m]);
  for (int m = 4; m < kMapCount; ++m) {
    const MapId id = static_cast<MapId>(m);
    result.occlusion[flow_index(id)] = estimate_occlusion(
        result.maps[m], result.maps[static_cast<int>(reverse_map(id))],
        config.occlusion);
  }
  return result;
}

PairResult optimize_pair(const Image& a, const Image& b, PairMode mode,
                         const LossWeights& weights,
                         const OptimizerConfig& config) {
  require_same_extent(a.field(), b.field(), "optimize_pair");
  weights.validate();
  config.validate();

  const int levels = config.pyramid_levels;
  const auto extents = level_extents(a.height(), a.width(), levels);

  std::vector<std::array<Image, 2>> pyramid(levels);
  pyramid[0] = {a, b};
  for (int k = 1; k < levels; ++k) {
    pyramid[k] = {downsample2(pyramid[k - 1][0]), downsample2(pyramid[k - 1][1])};
  }

  std::array<Field, 2> maps;
  for (auto& m : maps) {
    m = Field(extents[levels - 1].h, extents[levels - 1].w, 2, 0.0);
  }

  PairResult result;
  int global_iter = 0;

  for (int level = levels - 1; level >= 0; --level) {
    std::vector<AdamOptimizer> adam;
    for (int m = 0; m < 2; ++m) {
      adam.emplace_back(maps[m].size(), config.step_size, config.adam_beta1,
                        config.adam_beta2, config.adam_eps);
    }

    Tape tape;
    PairLossGraph graph;
    for (int it = 0; it < config.iterations_per_level; ++it) {
      const bool refresh = it % config.occlusion_refresh_interval == 0;
      if (refresh) {
        PairMasks masks = compute_pair_masks(maps, mode, weights, config.scales,
                                             config.occlusion);
        tape.clear();
        graph = build_pair_loss(tape, pyramid[level][0], pyramid[level][1], maps,
                                masks, weights, mode, config.scales,
                                config.smoothness_eps, config.normalize_units);
      } else {
        for (int m = 0; m < 2; ++m) tape.set_leaf(graph.maps[m], maps[m]);
        tape.forward();
      }

      const double rec = tape.scalar(graph.rec_sum);
      const double sm = tape.scalar(graph.smooth_sum);
      const double lr = tape.scalar(graph.lr_sum);
      check_finite_terms(rec, sm, lr, 0.0, global_iter);
      result.history.push_back({global_iter, level, rec, sm, lr, 0.0,
                                tape.scalar(graph.total), refresh});
      result.degenerate_mask_events += tape.degenerate_mask_events();

      tape.backward(graph.total);
      for (int m = 0; m < 2; ++m) {
        adam[m].step(maps[m].data(), tape.grad(graph.maps[m]).data());
      }
      ++global_iter;
    }

    if (level > 0) {
      for (int m = 0; m < 2; ++m) {
        maps[m] = upsample_bilinear(CorrField(maps[m]), extents[level - 1].h,
                                    extents[level - 1].w)
                      .field();
      }
    }
  }

  result.forward = CorrField(maps[0]);
  result.backward = CorrField(maps[1]);
  if (mode == PairMode::Flow) {
    result.occlusion = {
        estimate_occlusion(result.forward, result.backward, config.occlusion),
        estimate_occlusion(result.backward, result.forward, config.occlusion)};
  } else {
    result.occlusion = {OcclusionMap::all_visible(a.height(), a.width()),
                        OcclusionMap::all_visible(a.height(), a.width())};
  }
  return result;
}

LossWeights load_loss_weights(const KeyValueFile& kv) {
  LossWeights w;
  w.alpha = kv.get_double("alpha", w.alpha);
  w.beta = kv.get_double("beta", w.beta);
  w.lambda_sm = kv.get_double("lambda_sm", w.lambda_sm);
  w.lambda_lr = kv.get_double("lambda_lr", w.lambda_lr);
  w.lambda_2warp = kv.get_double("lambda_2warp", w.lambda_2warp);
  w.ssim_c1 = kv.get_double("ssim_c1", w.ssim_c1);
  w.ssim_c2 = kv.get_double("ssim_c2", w.ssim_c2);
  w.ssim_window = kv.get_int("ssim_window", w.ssim_window);
  w.validate();
  return w;
}

OptimizerConfig load_optimizer_config(const KeyValueFile& kv) {
  OptimizerConfig c;
  c.pyramid_levels = kv.get_int("pyramid_levels", c.pyramid_levels);
  c.iterations_per_level = kv.get_int("iterations_per_level", c.iterations_per_level);
  c.step_size = kv.get_double("step_size", c.step_size);
  c.adam_beta1 = kv.get_double("adam_beta1", c.adam_beta1);
  c.adam_beta2 = kv.get_double("adam_beta2", c.adam_beta2);
  c.adam_eps = kv.get_double("adam_eps", c.adam_eps);
  c.occlusion_refresh_interval =
      kv.get_int("occlusion_refresh_interval", c.occlusion_refresh_interval);
  c.scales = kv.get_int("scales", c.scales);
  c.smoothness_eps = kv.get_double("smoothness_eps", c.smoothness_eps);
  c.normalize_units = kv.get_int("normalize_units", c.normalize_units ? 1 : 0) != 0;
  c.seed = kv.get_uint64("seed", c.seed);
  c.enable_two_warp = kv.get_int("enable_two_warp", c.enable_two_warp ? 1 : 0) != 0;
  c.two_warp.variant = kv.get_int("two_warp_variant", c.two_warp.variant);
  const std::string transport = kv.get("occlusion_transport", "opposite");
  if (transport == "opposite") {
    c.two_warp.occ_transport = TwoWarpConfig::OccTransport::OppositeTimeStereo;
  } else if (transport == "target") {
    c.two_warp.occ_transport = TwoWarpConfig::OccTransport::TargetTimeStereo;
  } else {
    throw ConfigError("occlusion_transport must be 'opposite' or 'target'");
  }
  c.occlusion.alpha1 = kv.get_double("alpha1", c.occlusion.alpha1);
  c.occlusion.alpha2 = kv.get_double("alpha2", c.occlusion.alpha2);
  c.validate();
  return c;
}

}  // namespace stereoflow
