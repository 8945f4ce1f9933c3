#include "stereoflow/synth.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace stereoflow {

namespace {

// splitmix64; stable across platforms.
inline std::uint64_t hash_u64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline double lattice_noise(std::uint64_t seed, long ix, long iy) {
  std::uint64_t h = hash_u64(seed ^ hash_u64(static_cast<std::uint64_t>(ix) * 0x9e3779b97f4a7c15ULL ^
                                             hash_u64(static_cast<std::uint64_t>(iy))));
  return double(h >> 11) * (1.0 / 9007199254740992.0);  // [0,1)
}

// Multi-octave bilinear value noise on the infinite plane, centered on 0.5.
// Octave o halves the period and the amplitude, so content survives
// repeated 2x pooling.
double texture_value(std::uint64_t seed, int channel, double x, double y,
                     int octaves, double base_period, double contrast) {
  double acc = 0.0;
  double norm = 0.0;
  double period = base_period;
  double amp = 1.0;
  for (int o = 0; o < octaves; ++o) {
    const std::uint64_t oseed = hash_u64(seed ^ (0x5bf0'3635ULL + 977u * o + 131u * channel));
    const double gx = x / period, gy = y / period;
    const double fgx = std::floor(gx), fgy = std::floor(gy);
    const long ix = static_cast<long>(fgx), iy = static_cast<long>(fgy);
    const double fx = gx - fgx, fy = gy - fgy;
    const double v00 = lattice_noise(oseed, ix, iy);
    const double v01 = lattice_noise(oseed, ix + 1, iy);
    const double v10 = lattice_noise(oseed, ix, iy + 1);
    const double v11 = lattice_noise(oseed, ix + 1, iy + 1);
    const double top = (1.0 - fx) * v00 + fx * v01;
    const double bot = (1.0 - fx) * v10 + fx * v11;
    acc += amp * ((1.0 - fy) * top + fy * bot - 0.5);
    norm += amp;
    period *= 0.5;
    amp *= 0.5;
  }
  return 0.5 + contrast * (acc / norm);
}

struct ViewOffset {
  double x, y;
};

// Displacement of an object's texture anchor in each view, relative to the
// left view at time t.
ViewOffset view_offset(FrameId f, double disparity, double vx, double vy) {
  switch (f) {
    case FrameId::LeftT: return {0.0, 0.0};
    case FrameId::RightT: return {-disparity, 0.0};
    case FrameId::LeftT1: return {vx, vy};
    case FrameId::RightT1: return {vx - disparity, vy};
  }
  return {0.0, 0.0};
}

struct SceneObject {
  // index 0 = background, 1.. = sprites (front-to-back by depth)
  bool is_background = false;
  SpriteSpec sprite;
  double disparity = 0.0;
  double depth = 0.0;
  std::uint64_t tex_seed = 0;

  bool contains(FrameId f, double px, double py) const {
    if (is_background) return true;
    const ViewOffset o = view_offset(f, disparity, sprite.vx, sprite.vy);
    const double dx = px - (sprite.cx + o.x);
    const double dy = py - (sprite.cy + o.y);
    if (sprite.kind == SpriteSpec::Kind::Rect) {
      return std::fabs(dx) <= sprite.half_w && std::fabs(dy) <= sprite.half_h;
    }
    const double nx = dx / sprite.half_w, ny = dy / sprite.half_h;
    return nx * nx + ny * ny <= 1.0;
  }
};

}  // namespace

SceneSpec SceneSpec::from_config(const KeyValueFile& kv) {
  SceneSpec s;
  s.width = kv.get_int("width", s.width);
  s.height = kv.get_int("height", s.height);
  s.channels = kv.get_int("channels", s.channels);
  s.seed = kv.get_uint64("seed", s.seed);
  s.fb = kv.get_double("fb", s.fb);
  const std::string bg_depth = kv.get("background_depth", "");
  if (!bg_depth.empty()) {
    s.background_depth = (bg_depth == "inf") ? std::numeric_limits<double>::infinity()
                                             : std::stod(bg_depth);
  }
  {
    std::istringstream v(kv.get("background_velocity", "0 0"));
    if (!(v >> s.background_vx >> s.background_vy)) {
      throw ConfigError("background_velocity expects two numbers");
    }
  }
  s.texture_octaves = kv.get_int("texture_octaves", s.texture_octaves);
  s.texture_base_period = kv.get_double("texture_base_period", s.texture_base_period);
  s.texture_contrast = kv.get_double("texture_contrast", s.texture_contrast);
  for (const std::string& line : kv.all("sprite")) {
    std::istringstream v(line);
    std::string kind;
    SpriteSpec sp;
    if (!(v >> kind >> sp.cx >> sp.cy >> sp.half_w >> sp.half_h >> sp.depth >>
          sp.vx >> sp.vy)) {
      throw ConfigError("sprite expects: kind cx cy half_w half_h depth vx vy");
    }
    if (kind == "rect") {
      sp.kind = SpriteSpec::Kind::Rect;
    } else if (kind == "ellipse") {
      sp.kind = SpriteSpec::Kind::Ellipse;
    } else {
      throw ConfigError("sprite kind must be rect or ellipse");
    }
    s.sprites.push_back(sp);
  }
  s.validate();
  return s;
}

void SceneSpec::validate() const {
  if (width < 2 || height < 2) throw DegenerateSceneError("scene extent too small");
  if (channels != 1 && channels != 3) throw DegenerateSceneError("channels must be 1 or 3");
  if (fb <= 0.0) throw DegenerateSceneError("fb must be positive");
  if (!(background_depth > 0.0)) throw DegenerateSceneError("background depth must be positive");
  if (texture_octaves < 1 || texture_base_period <= 0.0) {
    throw DegenerateSceneError("texture parameters out of range");
  }
  if (texture_contrast <= 0.0 || texture_contrast > 0.9) {
    throw DegenerateSceneError("texture_contrast must lie in (0, 0.9]");
  }
  for (const SpriteSpec& sp : sprites) {
    if (sp.depth <= 0.0) throw DegenerateSceneError("sprite depth must be positive");
    if (sp.half_w <= 0.0 || sp.half_h <= 0.0) {
      throw DegenerateSceneError("sprite extents must be positive");
    }
    if (sp.cx + sp.half_w < 0 || sp.cx - sp.half_w > width - 1 ||
        sp.cy + sp.half_h < 0 || sp.cy - sp.half_h > height - 1) {
      throw DegenerateSceneError("sprite lies entirely outside the frame");
    }
  }
}

Cycle render_cycle(const SceneSpec& spec) {
  spec.validate();
  const int h = spec.height, w = spec.width, c = spec.channels;

  std::vector<SceneObject> objects;  // nearest first
  for (std::size_t i = 0; i < spec.sprites.size(); ++i) {
    SceneObject o;
    o.sprite = spec.sprites[i];
    o.depth = o.sprite.depth;
    o.disparity = spec.fb / o.sprite.depth;
    o.tex_seed = hash_u64(spec.seed + 1000003ULL * (i + 1));
    objects.push_back(o);
  }
  std::stable_sort(objects.begin(), objects.end(),
                   [](const SceneObject& a, const SceneObject& b) {
                     return a.depth < b.depth;
                   });
  {
    SceneObject bg;
    bg.is_background = true;
    bg.sprite.vx = spec.background_vx;
    bg.sprite.vy = spec.background_vy;
    bg.depth = spec.background_depth;
    bg.disparity = std::isinf(spec.background_depth) ? 0.0 : spec.background_disparity();
    bg.tex_seed = hash_u64(spec.seed);
    objects.push_back(bg);
  }

  auto owner_at = [&](FrameId f, double px, double py) -> const SceneObject& {
    for (const SceneObject& o : objects) {
      if (o.depth < spec.background_depth || o.is_background) {
        if (o.contains(f, px, py)) return o;
      }
    }
    return objects.back();
  };

  const std::array<FrameId, kFrameCount> frames = {
      FrameId::LeftT, FrameId::RightT, FrameId::LeftT1, FrameId::RightT1};

  std::array<Field, kFrameCount> rendered;
  std::array<Field, kFrameCount> depth;
  for (FrameId f : frames) {
    const int fi = static_cast<int>(f);
    rendered[fi] = Field(h, w, c);
    depth[fi] = Field(h, w, 1);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const SceneObject& o = owner_at(f, x, y);
        const ViewOffset off = view_offset(f, o.disparity, o.sprite.vx, o.sprite.vy);
        for (int ch = 0; ch < c; ++ch) {
          rendered[fi](y, x, ch) =
              texture_value(o.tex_seed, ch, x - off.x, y - off.y,
                            spec.texture_octaves, spec.texture_base_period,
                            spec.texture_contrast);
        }
        depth[fi](y, x) = o.depth;
      }
    }
  }

  CycleGroundTruth gt;
  gt.depth = depth;
  std::array<OcclusionMap, 4> flow_occ;
  for (int m = 0; m < kMapCount; ++m) {
    const MapId id = static_cast<MapId>(m);
    const FrameId a = map_target(id), b = map_source(id);
    Field map(h, w, 2);
    Field occ(h, w, 1);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const SceneObject& o = owner_at(a, x, y);
        const ViewOffset oa = view_offset(a, o.disparity, o.sprite.vx, o.sprite.vy);
        const ViewOffset ob = view_offset(b, o.disparity, o.sprite.vx, o.sprite.vy);
        const double du = ob.x - oa.x, dv = ob.y - oa.y;
        map(y, x, 0) = du;
        map(y, x, 1) = dv;
        const double bx = x + du, by = y + dv;
        const bool in_frame = bx >= 0.0 && bx <= w - 1.0 && by >= 0.0 && by <= h - 1.0;
        occ(y, x) = (in_frame && &owner_at(b, bx, by) == &o) ? 1.0 : 0.0;
      }
    }
    gt.maps[m] = CorrField(std::move(map));
    if (is_flow_map(id)) {
      flow_occ[flow_index(id)] = OcclusionMap(std::move(occ));
    }
  }
  gt.flow_occlusion = flow_occ;

  Cycle cycle;
  for (int f = 0; f < kFrameCount; ++f) cycle.frames[f] = Image(std::move(rendered[f]));
  cycle.focal_length_times_baseline = spec.fb;
  cycle.ground_truth = std::move(gt);
  cycle.validate();
  return cycle;
}

CorrField perturb(const CorrField& map, double noise_sigma,
                  unsigned long long seed) {
  if (noise_sigma < 0.0) throw ConfigError("perturb: sigma must be nonnegative");
  if (noise_sigma == 0.0) return map;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, noise_sigma);
  Field f = map.field();
  for (std::size_t i = 0; i < f.size(); ++i) f.data()[i] += gauss(rng);
  return CorrField(std::move(f));
}

std::array<CorrField, kMapCount> perturb(
    const std::array<CorrField, kMapCount>& maps, double noise_sigma,
    unsigned long long seed) {
  std::array<CorrField, kMapCount> out;
  for (int m = 0; m < kMapCount; ++m) {
    out[m] = perturb(maps[m], noise_sigma, hash_u64(seed + 7919ULL * m));
  }
  return out;
}

}  // namespace stereoflow
