#pragma once

#include "kadsim/block.hpp"
#include "kadsim/client.hpp"
#include "kadsim/config.hpp"
#include "kadsim/event_queue.hpp"
#include "kadsim/experiments.hpp"
#include "kadsim/metrics.hpp"
#include "kadsim/network.hpp"
#include "kadsim/node_id.hpp"
#include "kadsim/rng.hpp"
#include "kadsim/routing_table.hpp"
#include "kadsim/runner.hpp"
#include "kadsim/sha256.hpp"
