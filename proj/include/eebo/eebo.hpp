#pragma once

#include "eebo/acquisition.hpp"
#include "eebo/benchmarks.hpp"
#include "eebo/gp.hpp"
#include "eebo/harness.hpp"
#include "eebo/normal.hpp"
#include "eebo/pareto.hpp"
#include "eebo/rng.hpp"
#include "eebo/sampling.hpp"
#include "eebo/stats.hpp"
#include "eebo/strategies.hpp"
