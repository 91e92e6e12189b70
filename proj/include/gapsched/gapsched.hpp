#pragma once

// Umbrella header: spectral-gap-informed schedule learning for QAOA.

#include "gapsched/bezier.hpp"
#include "gapsched/errors.hpp"
#include "gapsched/harness.hpp"
#include "gapsched/io.hpp"
#include "gapsched/lanczos.hpp"
#include "gapsched/optimize.hpp"
#include "gapsched/problems.hpp"
#include "gapsched/rng.hpp"
#include "gapsched/schedule.hpp"
#include "gapsched/simulator.hpp"
#include "gapsched/spectrum.hpp"
#include "gapsched/version.hpp"
