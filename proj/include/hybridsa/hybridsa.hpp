#pragma once

#include "hybridsa/analyze.hpp"
#include "hybridsa/hybrid_time.hpp"
#include "hybridsa/linalg.hpp"
#include "hybridsa/presets.hpp"
#include "hybridsa/rng.hpp"
#include "hybridsa/schedule.hpp"
#include "hybridsa/sets.hpp"
#include "hybridsa/simulate.hpp"
#include "hybridsa/stochastic.hpp"
#include "hybridsa/system.hpp"
