#pragma once

#include "pdcontrol/errors.hpp"
#include "pdcontrol/grid.hpp"
#include "pdcontrol/solution_operator.hpp"
#include "pdcontrol/pde_core.hpp"
#include "pdcontrol/prox.hpp"
#include "pdcontrol/pd_solver.hpp"
#include "pdcontrol/admm.hpp"
#include "pdcontrol/nn/mlp.hpp"
#include "pdcontrol/nn/deeponet.hpp"
#include "pdcontrol/nn/grf.hpp"
#include "pdcontrol/nn/train.hpp"
#include "pdcontrol/nn/surrogate.hpp"
#include "pdcontrol/nn/serialize.hpp"
#include "pdcontrol/bench/examples.hpp"
#include "pdcontrol/bench/surrogates.hpp"
#include "pdcontrol/bench/config.hpp"
#include "pdcontrol/bench/report.hpp"
#include "pdcontrol/bench/suite.hpp"
