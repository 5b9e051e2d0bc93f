#pragma once

#include "mtdemand/error.hpp"
#include "mtdemand/rng.hpp"
#include "mtdemand/csv.hpp"
#include "mtdemand/demand.hpp"
#include "mtdemand/panel_io.hpp"
#include "mtdemand/info_design.hpp"
#include "mtdemand/estimators.hpp"
#include "mtdemand/mlp.hpp"
#include "mtdemand/meta.hpp"
#include "mtdemand/stats.hpp"
#include "mtdemand/theory.hpp"
#include "mtdemand/retail.hpp"
#include "mtdemand/bench.hpp"
