#pragma once

// Umbrella header.

#include "dynmatch/agent.hpp"
#include "dynmatch/analytics/bounds.hpp"
#include "dynmatch/analytics/chain.hpp"
#include "dynmatch/analytics/report.hpp"
#include "dynmatch/compatibility.hpp"
#include "dynmatch/config.hpp"
#include "dynmatch/coupled.hpp"
#include "dynmatch/departure.hpp"
#include "dynmatch/errors.hpp"
#include "dynmatch/event_queue.hpp"
#include "dynmatch/instrument.hpp"
#include "dynmatch/io.hpp"
#include "dynmatch/numeric.hpp"
#include "dynmatch/oracles/dominance.hpp"
#include "dynmatch/oracles/ruin.hpp"
#include "dynmatch/oracles/urn.hpp"
#include "dynmatch/pool.hpp"
#include "dynmatch/random.hpp"
#include "dynmatch/run_stats.hpp"
#include "dynmatch/simulator.hpp"
#include "dynmatch/sweep.hpp"
#include "dynmatch/verify.hpp"
