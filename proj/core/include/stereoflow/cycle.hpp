#pragma once

#include <array>
#include <optional>

#include "stereoflow/field.hpp"

namespace stereoflow {

// Two temporally adjacent stereo pairs. Frame indices follow the square
//
//     left,t   ---- stereo ---->  right,t
//       |                            |
//      flow                         flow
//       v                            v
//     left,t+1 ---- stereo ---->  right,t+1
enum class FrameId { LeftT = 0, RightT = 1, LeftT1 = 2, RightT1 = 3 };

// The eight unknown correspondence maps of a cycle. A map "A -> B" is
// indexed by pixels of frame A and stores, per pixel, the displacement to
// the matching location in frame B; warping I^B by it reconstructs I^A.
enum class MapId {
  DispLtToRt = 0,
  DispRtToLt = 1,
  DispLt1ToRt1 = 2,
  DispRt1ToLt1 = 3,
  FlowLtToLt1 = 4,
  FlowLt1ToLt = 5,
  FlowRtToRt1 = 6,
  FlowRt1ToRt = 7,
};

inline constexpr int kFrameCount = 4;
inline constexpr int kMapCount = 8;

FrameId map_target(MapId m);  // frame whose pixels index the map
FrameId map_source(MapId m);  // frame sampled when reconstructing
bool is_flow_map(MapId m);
MapId reverse_map(MapId m);
// 0..3 for the four flow maps, in MapId order.
int flow_index(MapId m);
const char* map_name(MapId m);      // e.g. "F_lt_lt1"
const char* frame_name(FrameId f);  // e.g. "I_lt"

enum class PairMode { Flow, Stereo };

// Exact per-pixel annotations carried by synthetic cycles.
struct CycleGroundTruth {
  std::array<CorrField, kMapCount> maps;
  // Visibility of the four flow directions, in flow_index order.
  std::array<OcclusionMap, 4> flow_occlusion;
  // Scene depth (meters) per frame, indexed by FrameId.
  std::array<Field, kFrameCount> depth;
};

struct Cycle {
  std::array<Image, kFrameCount> frames;
  // focal length (pixels) times baseline (meters); 0 when unknown.
  double focal_length_times_baseline = 0.0;
  std::optional<CycleGroundTruth> ground_truth;

  const Image& frame(FrameId f) const {
    return frames[static_cast<int>(f)];
  }
  int height() const { return frames[0].height(); }
  int width() const { return frames[0].width(); }
  void validate() const;  // frames share extent and channel count
};

}  // namespace stereoflow
