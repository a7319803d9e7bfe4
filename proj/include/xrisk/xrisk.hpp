#pragma once

#include "xrisk/config.hpp"
#include "xrisk/csv.hpp"
#include "xrisk/dataset.hpp"
#include "xrisk/error.hpp"
#include "xrisk/estimator.hpp"
#include "xrisk/harness.hpp"
#include "xrisk/losses.hpp"
#include "xrisk/matrix.hpp"
#include "xrisk/metrics.hpp"
#include "xrisk/model.hpp"
#include "xrisk/optim.hpp"
#include "xrisk/oracle.hpp"
#include "xrisk/rng.hpp"
#include "xrisk/sampler.hpp"
#include "xrisk/surrogate.hpp"
