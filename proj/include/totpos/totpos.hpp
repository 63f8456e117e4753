#pragma once

#include "totpos/bench.hpp"
#include "totpos/grid.hpp"
#include "totpos/grid_io.hpp"
#include "totpos/oracle.hpp"
#include "totpos/projection.hpp"
#include "totpos/solver.hpp"
#include "totpos/synth.hpp"
