#pragma once

#include "fogsfc/net_model.hpp"
#include "fogsfc/paths.hpp"
#include "fogsfc/feasibility.hpp"
#include "fogsfc/solve_common.hpp"
#include "fogsfc/ofes_exact.hpp"
#include "fogsfc/hfes.hpp"
#include "fogsfc/flowgen.hpp"
#include "fogsfc/topology_io.hpp"
#include "fogsfc/scenario.hpp"
