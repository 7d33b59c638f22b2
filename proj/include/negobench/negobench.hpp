#pragma once

#include "negobench/agents.hpp"
#include "negobench/analysis.hpp"
#include "negobench/balloon.hpp"
#include "negobench/cleanup.hpp"
#include "negobench/dond.hpp"
#include "negobench/engine.hpp"
#include "negobench/error.hpp"
#include "negobench/optimize.hpp"
#include "negobench/record.hpp"
#include "negobench/remote_agent.hpp"
#include "negobench/report.hpp"
#include "negobench/rng.hpp"
#include "negobench/runner.hpp"
#include "negobench/templates.hpp"
