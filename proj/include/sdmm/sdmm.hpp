#pragma once

#include "sdmm/config.hpp"
#include "sdmm/discrepancy.hpp"
#include "sdmm/errors.hpp"
#include "sdmm/eval.hpp"
#include "sdmm/sim.hpp"
#include "sdmm/similarity.hpp"
#include "sdmm/synopsis.hpp"
#include "sdmm/trace.hpp"
