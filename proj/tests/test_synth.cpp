#include <doctest.h>

#include <cmath>

#include "common/scenes.hpp"
#include "stereoflow/synth.hpp"
#include "stereoflow/warp.hpp"

using namespace stereoflow;

TEST_CASE("empty static scene: stereo maps carry the background disparity") {
  SceneSpec spec;
  spec.width = 32;
  spec.height = 32;
  spec.seed = 3;
  spec.fb = 320.0;
  spec.background_depth = 64.0;  // disparity 5
  const Cycle cycle = render_cycle(spec);
  const auto& gt = *cycle.ground_truth;
  CHECK(gt.maps[static_cast<int>(MapId::DispRtToLt)].u(10, 10) == doctest::Approx(5.0));
  CHECK(gt.maps[static_cast<int>(MapId::DispLtToRt)].u(10, 10) == doctest::Approx(-5.0));
  for (int m = 4; m < kMapCount; ++m) {
    CHECK(gt.maps[m].field().max_value() == 0.0);
    CHECK(gt.maps[m].field().min_value() == 0.0);
  }

  // background at infinity collapses every map to zero
  SceneSpec far = spec;
  far.background_depth = std::numeric_limits<double>::infinity();
  const Cycle cycle_inf = render_cycle(far);
  for (int m = 0; m < kMapCount; ++m) {
    CHECK(cycle_inf.ground_truth->maps[m].field().max_value() == 0.0);
    CHECK(cycle_inf.ground_truth->maps[m].field().min_value() == 0.0);
  }
}

TEST_CASE("sprite disparity is fb over depth") {
  SceneSpec spec = scenes::standard_occlusion();
  const Cycle cycle = render_cycle(spec);
  const auto& gt = *cycle.ground_truth;
  const auto& sp = spec.sprites[0];
  // sample at the sprite center
  const int cx = int(sp.cx), cy = int(sp.cy);
  CHECK(gt.maps[static_cast<int>(MapId::DispRtToLt)].u(cy, int(sp.cx - spec.fb / sp.depth)) ==
        doctest::Approx(spec.fb / sp.depth));
  CHECK(gt.maps[static_cast<int>(MapId::DispLtToRt)].u(cy, cx) ==
        doctest::Approx(-spec.fb / sp.depth));
  CHECK(gt.depth[0](cy, cx) == sp.depth);
}

TEST_CASE("moving sprite leaves an occlusion band of its step width") {
  const SceneSpec spec = scenes::standard_occlusion();  // rect, +4 px
  const Cycle cycle = render_cycle(spec);
  const auto& occ = cycle.ground_truth->flow_occlusion[flow_index(MapId::FlowLtToLt1)];
  const auto& sp = spec.sprites[0];
  const int y = int(sp.cy);
  const int right_edge = int(sp.cx + sp.half_w);
  // the 4 background columns ahead of the sprite get covered at t+1
  for (int x = right_edge + 1; x <= right_edge + 4; ++x) {
    CHECK(occ.at(y, x) == 0.0);
  }
  CHECK(occ.at(y, right_edge + 5) == 1.0);
  // the sprite itself stays visible
  CHECK(occ.at(y, int(sp.cx)) == 1.0);
}

TEST_CASE("rendered cycles satisfy warp consistency on visible pixels") {
  for (const SceneSpec& spec :
       {scenes::rigid(), scenes::standard_occlusion(), scenes::acceptance_suite()[0]}) {
    const Cycle cycle = render_cycle(spec);
    const auto& gt = *cycle.ground_truth;
    for (int m = 0; m < kMapCount; ++m) {
      const MapId id = static_cast<MapId>(m);
      const Field recon = bilinear_warp(
          cycle.frame(map_source(id)).field(), gt.maps[m].field());
      const Field& target = cycle.frame(map_target(id)).field();
      const Field valid = validity_mask(gt.maps[m].field());
      for (int y = 0; y < recon.height(); ++y) {
        for (int x = 0; x < recon.width(); ++x) {
          if (valid(y, x) == 0.0) continue;
          if (is_flow_map(id) &&
              gt.flow_occlusion[flow_index(id)].at(y, x) == 0.0) {
            continue;
          }
          if (!is_flow_map(id)) {
            // stereo visibility is not annotated; skip pixels whose sample
            // lands on a different object
            continue;
          }
          CHECK(std::fabs(recon(y, x) - target(y, x)) < 1e-6);
        }
      }
    }
  }
}

TEST_CASE("stereo warp consistency on the rigid scene") {
  const Cycle cycle = render_cycle(scenes::rigid());
  const auto& gt = *cycle.ground_truth;
  for (MapId id : {MapId::DispLtToRt, MapId::DispRtToLt, MapId::DispLt1ToRt1,
                   MapId::DispRt1ToLt1}) {
    const int m = static_cast<int>(id);
    const Field recon =
        bilinear_warp(cycle.frame(map_source(id)).field(), gt.maps[m].field());
    const Field& target = cycle.frame(map_target(id)).field();
    const Field valid = validity_mask(gt.maps[m].field());
    for (int y = 0; y < recon.height(); ++y) {
      for (int x = 0; x < recon.width(); ++x) {
        if (valid(y, x) == 1.0) {
          CHECK(std::fabs(recon(y, x) - target(y, x)) < 1e-6);
        }
      }
    }
  }
}

TEST_CASE("rendering is deterministic per seed") {
  const SceneSpec spec = scenes::acceptance_suite()[3];
  const Cycle a = render_cycle(spec);
  const Cycle b = render_cycle(spec);
  for (int f = 0; f < kFrameCount; ++f) {
    const Field& fa = a.frames[f].field();
    const Field& fb = b.frames[f].field();
    for (std::size_t i = 0; i < fa.size(); ++i) {
      CHECK(fa.data()[i] == fb.data()[i]);
    }
  }
  SceneSpec other = spec;
  other.seed += 1;
  const Cycle c = render_cycle(other);
  bool any_diff = false;
  for (std::size_t i = 0; i < c.frames[0].field().size(); ++i) {
    any_diff |= c.frames[0].field().data()[i] != a.frames[0].field().data()[i];
  }
  CHECK(any_diff);
}

TEST_CASE("textures keep local contrast") {
  const Cycle cycle = render_cycle(scenes::rigid());
  const Field g = spatial_gradient(cycle.frames[0].field(), Axis::X, 1);
  double energy = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) energy += g.data()[i] * g.data()[i];
  CHECK(energy / double(g.size()) > 1e-5);
}

TEST_CASE("degenerate scenes are rejected") {
  SceneSpec spec = scenes::standard_occlusion();
  spec.sprites[0].cx = -100.0;
  CHECK_THROWS_AS(render_cycle(spec), DegenerateSceneError);

  SceneSpec bad_depth = scenes::standard_occlusion();
  bad_depth.sprites[0].depth = -1.0;
  CHECK_THROWS_AS(render_cycle(bad_depth), DegenerateSceneError);
}

TEST_CASE("perturb is deterministic and sigma zero is the identity") {
  const CorrField base = CorrField::constant(8, 8, 1.0, -2.0);
  const CorrField same = perturb(base, 0.0, 99);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      CHECK(same.u(y, x) == base.u(y, x));
      CHECK(same.v(y, x) == base.v(y, x));
    }
  }
  const CorrField a = perturb(base, 1.0, 42);
  const CorrField b = perturb(base, 1.0, 42);
  const CorrField c = perturb(base, 1.0, 43);
  bool alike = true, differs = false;
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      alike &= a.u(y, x) == b.u(y, x) && a.v(y, x) == b.v(y, x);
      differs |= a.u(y, x) != c.u(y, x);
    }
  }
  CHECK(alike);
  CHECK(differs);
}

TEST_CASE("scene specs round-trip through the key-value format") {
  const std::string text = R"(
# test scene
width = 24
height = 20
channels = 1
seed = 12
fb = 200
background_depth = 50
background_velocity = 1 0
sprite = rect 10 10 4 3 25 2 1
sprite = ellipse 16 12 3 3 20 -2 0
)";
  const SceneSpec spec = SceneSpec::from_config(KeyValueFile::parse(text));
  CHECK(spec.width == 24);
  CHECK(spec.height == 20);
  CHECK(spec.sprites.size() == 2);
  CHECK(spec.sprites[1].kind == SpriteSpec::Kind::Ellipse);
  CHECK(spec.sprites[0].depth == 25.0);
  CHECK(render_cycle(spec).frames[0].width() == 24);
}
