#pragma once

#include "mdcw/agent.hpp"
#include "mdcw/bits.hpp"
#include "mdcw/builtin.hpp"
#include "mdcw/checkpoint.hpp"
#include "mdcw/config_io.hpp"
#include "mdcw/env.hpp"
#include "mdcw/metrics.hpp"
#include "mdcw/nn.hpp"
#include "mdcw/oracle.hpp"
#include "mdcw/scenario.hpp"
#include "mdcw/scenario_io.hpp"
