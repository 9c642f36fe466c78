// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sagsin/baselines.hpp"
#include "sagsin/channel.hpp"
#include "sagsin/error.hpp"
#include "sagsin/feasible.hpp"
#include "sagsin/graph.hpp"
#include "sagsin/harness.hpp"
#include "sagsin/json_io.hpp"
#include "sagsin/parallel.hpp"
#include "sagsin/rng.hpp"
#include "sagsin/routing.hpp"
#include "sagsin/rrm.hpp"
#include "sagsin/secrecy.hpp"
#include "sagsin/testbed.hpp"
#include "sagsin/units.hpp"
