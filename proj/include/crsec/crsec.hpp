// Umbrella header.
#pragma once

#include "crsec/capacity.hpp"
#include "crsec/config.hpp"
#include "crsec/fading.hpp"
#include "crsec/parallel.hpp"
#include "crsec/params.hpp"
#include "crsec/power_solver.hpp"
#include "crsec/quadrature.hpp"
#include "crsec/queue_sim.hpp"
#include "crsec/secrecy_rates.hpp"
#include "crsec/selftest.hpp"
#include "crsec/stats.hpp"
