#pragma once

#include "slf/bench.hpp"
#include "slf/core.hpp"
#include "slf/filter.hpp"
#include "slf/gbt.hpp"
#include "slf/io.hpp"
#include "slf/kalman.hpp"
#include "slf/preprocess.hpp"
#include "slf/simkit.hpp"
#include "slf/svg.hpp"
