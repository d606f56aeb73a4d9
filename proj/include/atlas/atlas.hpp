#pragma once

#include "core.hpp"
#include "family.hpp"
#include "orbit.hpp"
#include "linearizer.hpp"
#include "itinerary.hpp"
#include "model.hpp"
#include "emap.hpp"
#include "solvers.hpp"
#include "trace.hpp"
#include "raster.hpp"
#include "io.hpp"
