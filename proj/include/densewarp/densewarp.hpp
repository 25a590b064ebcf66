#pragma once

#include "densewarp/errors.hpp"
#include "densewarp/io.hpp"
#include "densewarp/iuv_ops.hpp"
#include "densewarp/losses.hpp"
#include "densewarp/mask_ops.hpp"
#include "densewarp/metrics.hpp"
#include "densewarp/parallel.hpp"
#include "densewarp/raster.hpp"
#include "densewarp/sampling.hpp"
#include "densewarp/synthgen.hpp"
#include "densewarp/uv_atlas.hpp"
#include "densewarp/warp_engine.hpp"
