#pragma once

#include "common.hpp"
#include "env.hpp"
#include "mobility.hpp"
#include "esn.hpp"
#include "cgnet.hpp"
#include "urllc.hpp"
#include "lyap.hpp"
#include "matching.hpp"
#include "convex.hpp"
#include "mbbopt.hpp"
#include "scenario.hpp"
#include "sim.hpp"
