#pragma once

#include "dsprover/core.hpp"
#include "dsprover/schedule.hpp"
#include "dsprover/tactic_syntax.hpp"
#include "dsprover/env.hpp"
#include "dsprover/sim_env.hpp"
#include "dsprover/adapter.hpp"
#include "dsprover/generator.hpp"
#include "dsprover/search.hpp"
#include "dsprover/dataio.hpp"
#include "dsprover/augment.hpp"
#include "dsprover/bench.hpp"
