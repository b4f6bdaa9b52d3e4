#pragma once

#include "holofield/angular_spectrum.hpp"
#include "holofield/bessel.hpp"
#include "holofield/config.hpp"
#include "holofield/dataset.hpp"
#include "holofield/error.hpp"
#include "holofield/focus.hpp"
#include "holofield/grid.hpp"
#include "holofield/hologram.hpp"
#include "holofield/map_codec.hpp"
#include "holofield/metrics.hpp"
#include "holofield/parallel.hpp"
#include "holofield/png_io.hpp"
#include "holofield/random.hpp"
#include "holofield/scene.hpp"
#include "holofield/tiler.hpp"
