#pragma once

#include "dsr/adaptivity.hpp"
#include "dsr/config.hpp"
#include "dsr/distributed.hpp"
#include "dsr/estimator.hpp"
#include "dsr/experiments.hpp"
#include "dsr/filters.hpp"
#include "dsr/kernels.hpp"
#include "dsr/metrics.hpp"
#include "dsr/smoothness.hpp"
#include "dsr/target.hpp"
#include "dsr/theory.hpp"
