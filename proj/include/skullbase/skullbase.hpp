#ifndef SKULLBASE_SKULLBASE_HPP
#define SKULLBASE_SKULLBASE_HPP

#include "skullbase/types.hpp"
#include "skullbase/core.hpp"
#include "skullbase/heatmap.hpp"
#include "skullbase/measurements.hpp"
#include "skullbase/frames.hpp"
#include "skullbase/hmap.hpp"
#include "skullbase/predictor.hpp"
#include "skullbase/pipeline.hpp"
#include "skullbase/evalkit.hpp"
#include "skullbase/image_io.hpp"
#include "skullbase/annotation_io.hpp"
#include "skullbase/report_io.hpp"
#include "skullbase/overlay.hpp"
#include "skullbase/synth.hpp"

#endif  // SKULLBASE_SKULLBASE_HPP
