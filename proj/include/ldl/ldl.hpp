#pragma once

#include "ldl/artifact_map.hpp"
#include "ldl/colormap.hpp"
#include "ldl/ema.hpp"
#include "ldl/image.hpp"
#include "ldl/losses.hpp"
#include "ldl/metrics.hpp"
#include "ldl/optim.hpp"
#include "ldl/png_io.hpp"
#include "ldl/resample.hpp"
#include "ldl/synthetic.hpp"
