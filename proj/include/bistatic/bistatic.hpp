#pragma once

// Umbrella header for the whole library.

#include "core_geometry.hpp"
#include "parallel.hpp"
#include "pulse_chasing.hpp"
#include "scenario.hpp"
#include "surfaces.hpp"
