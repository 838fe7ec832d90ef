#pragma once

// A tracked pedestrian: persistent label plus motion and appearance
// state. Owned and mutated by the pipeline.

#include <optional>

#include "occlusia/appearance.hpp"
#include "occlusia/core.hpp"
#include "occlusia/image.hpp"
#include "occlusia/motion.hpp"

namespace occlusia {

struct Agent {
  AgentLabel label;
  MotionState kalman;
  Histogram ref_histogram;                // invalid when tracking without pixels
  std::optional<ImagePatch> ref_patch;    // last detected appearance
  BoundingBox last_box;                   // most recent output box
  int misses = 0;  // consecutive frames without an associated detection
  int age = 0;     // frames since creation
  int hits = 0;    // frames with an associated detection
};

}  // namespace occlusia
