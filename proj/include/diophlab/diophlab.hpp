#pragma once

// Umbrella header.

#include "numbers.hpp"
#include "contfrac.hpp"
#include "parallel.hpp"
#include "ostrowski.hpp"
#include "threegap.hpp"
#include "bohr.hpp"
#include "shiftred.hpp"
#include "measure.hpp"
#include "sums.hpp"
#include "json_io.hpp"
