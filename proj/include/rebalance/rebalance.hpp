#pragma once

#include "rebalance/dataset.hpp"
#include "rebalance/error.hpp"
#include "rebalance/metrics.hpp"
#include "rebalance/model.hpp"
#include "rebalance/neighbors.hpp"
#include "rebalance/parallel.hpp"
#include "rebalance/random.hpp"
#include "rebalance/report.hpp"
#include "rebalance/resample.hpp"
#include "rebalance/synthgen.hpp"
