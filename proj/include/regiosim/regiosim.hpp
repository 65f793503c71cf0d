#pragma once

// Umbrella header for the regiosim library.

#include "regiosim/csv.hpp"
#include "regiosim/dynamics.hpp"
#include "regiosim/econometrics.hpp"
#include "regiosim/errors.hpp"
#include "regiosim/hash.hpp"
#include "regiosim/manifest.hpp"
#include "regiosim/model.hpp"
#include "regiosim/optimize.hpp"
#include "regiosim/panel.hpp"
#include "regiosim/rng.hpp"
#include "regiosim/runconfig.hpp"
#include "regiosim/spatial.hpp"
#include "regiosim/stats.hpp"
#include "regiosim/svg.hpp"
#include "regiosim/version.hpp"
