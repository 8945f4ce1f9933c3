#pragma once

#include <limits>
#include <vector>

#include "stereoflow/config.hpp"
#include "stereoflow/cycle.hpp"

namespace stereoflow {

// Rendered stereo-video test scenes with exact correspondence, occlusion
// and depth annotations. Textures are procedural band-limited noise defined
// on the whole plane, so translated content never runs out of pixels and
// every view can be sampled at arbitrary real coordinates.

struct SpriteSpec {
  enum class Kind { Rect, Ellipse };
  Kind kind = Kind::Rect;
  double cx = 0.0, cy = 0.0;          // center at time t in the left view
  double half_w = 4.0, half_h = 4.0;  // half extents in pixels
  double depth = 10.0;                // meters; disparity = fb / depth
  double vx = 0.0, vy = 0.0;          // flow velocity, pixels per frame
};

struct SceneSpec {
  int height = 64;
  int width = 64;
  int channels = 1;
  unsigned long long seed = 1;
  double fb = 320.0;  // focal length (px) * baseline (m)
  double background_depth = std::numeric_limits<double>::infinity();
  double background_vx = 0.0, background_vy = 0.0;
  int texture_octaves = 3;
  double texture_base_period = 16.0;
  double texture_contrast = 0.45;  // peak-to-peak fraction of [0,1]
  std::vector<SpriteSpec> sprites;

  static SceneSpec from_config(const KeyValueFile& kv);
  void validate() const;

  double background_disparity() const { return fb / background_depth; }
};

// Renders the four frames and fills Cycle::ground_truth with the eight
// analytic correspondence maps, the four flow-direction visibility masks
// (z-buffer resolved, out-of-frame counted as occluded) and per-view depth.
Cycle render_cycle(const SceneSpec& spec);

// Seeded Gaussian displacement noise, for loss landscape probes.
CorrField perturb(const CorrField& map, double noise_sigma,
                  unsigned long long seed);
std::array<CorrField, kMapCount> perturb(
    const std::array<CorrField, kMapCount>& maps, double noise_sigma,
    unsigned long long seed);

}  // namespace stereoflow
