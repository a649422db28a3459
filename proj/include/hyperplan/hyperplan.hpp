#pragma once

#include "hyperplan/abstraction.hpp"
#include "hyperplan/bench.hpp"
#include "hyperplan/domain.hpp"
#include "hyperplan/dot.hpp"
#include "hyperplan/errors.hpp"
#include "hyperplan/hypergraph.hpp"
#include "hyperplan/ids.hpp"
#include "hyperplan/library.hpp"
#include "hyperplan/planner.hpp"
#include "hyperplan/reuse.hpp"
#include "hyperplan/scenario.hpp"
#include "hyperplan/solution.hpp"
