#pragma once

#include "sqzlab/error.hpp"
#include "sqzlab/random.hpp"
#include "sqzlab/timeseries.hpp"
#include "sqzlab/fft.hpp"
#include "sqzlab/filters.hpp"
#include "sqzlab/physics.hpp"
#include "sqzlab/noise.hpp"
#include "sqzlab/detection.hpp"
#include "sqzlab/locking.hpp"
#include "sqzlab/analyzer.hpp"
#include "sqzlab/inference.hpp"
#include "sqzlab/config.hpp"
#include "sqzlab/scenarios.hpp"
#include "sqzlab/io.hpp"
#include "sqzlab/commands.hpp"
#include "sqzlab/acceptance.hpp"
