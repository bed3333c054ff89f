#pragma once

#include "dmm/bench.hpp"
#include "dmm/cnf.hpp"
#include "dmm/dynamics.hpp"
#include "dmm/errors.hpp"
#include "dmm/fixed_point.hpp"
#include "dmm/generator.hpp"
#include "dmm/hwemu.hpp"
#include "dmm/rng.hpp"
#include "dmm/solver.hpp"
