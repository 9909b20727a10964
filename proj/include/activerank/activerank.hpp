#pragma once

#include "activerank/baselines.hpp"
#include "activerank/core.hpp"
#include "activerank/elimination.hpp"
#include "activerank/engine.hpp"
#include "activerank/harness.hpp"
#include "activerank/pit.hpp"
