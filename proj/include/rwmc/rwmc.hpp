#pragma once

#include "rwmc/attributes.hpp"
#include "rwmc/chain.hpp"
#include "rwmc/error.hpp"
#include "rwmc/estimators.hpp"
#include "rwmc/experiment.hpp"
#include "rwmc/features.hpp"
#include "rwmc/graph.hpp"
#include "rwmc/mcse.hpp"
#include "rwmc/oracle.hpp"
#include "rwmc/quantiles.hpp"
#include "rwmc/rng.hpp"
#include "rwmc/stopping.hpp"
#include "rwmc/walkers.hpp"
