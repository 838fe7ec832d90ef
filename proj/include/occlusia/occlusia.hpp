#pragma once

// Umbrella header for the whole tracking library.

#include "occlusia/agent.hpp"
#include "occlusia/appearance.hpp"
#include "occlusia/association.hpp"
#include "occlusia/config.hpp"
#include "occlusia/core.hpp"
#include "occlusia/image.hpp"
#include "occlusia/io.hpp"
#include "occlusia/metrics.hpp"
#include "occlusia/motion.hpp"
#include "occlusia/occlusion.hpp"
#include "occlusia/pipeline.hpp"
#include "occlusia/rng.hpp"
#include "occlusia/synth.hpp"
