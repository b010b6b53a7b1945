#pragma once

// Umbrella header for the derivative-free minimax toolkit.

#include "minimax/cma.hpp"
#include "minimax/coevolution.hpp"
#include "minimax/common.hpp"
#include "minimax/es.hpp"
#include "minimax/harness.hpp"
#include "minimax/mmde.hpp"
#include "minimax/oracle.hpp"
#include "minimax/problems.hpp"
#include "minimax/reckless.hpp"
#include "minimax/stats.hpp"
