#pragma once

#include "tds/core.hpp"
#include "tds/halfspaces.hpp"
#include "tds/harness.hpp"
#include "tds/learners.hpp"
#include "tds/moments.hpp"
#include "tds/oracle.hpp"
#include "tds/regression.hpp"
#include "tds/scenarios.hpp"
#include "tds/serialize.hpp"
