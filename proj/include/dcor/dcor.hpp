#pragma once

// Umbrella header for the distance-correlation toolkit.

#include "dcor/centering.hpp"
#include "dcor/combiner.hpp"
#include "dcor/common.hpp"
#include "dcor/distance.hpp"
#include "dcor/estimators.hpp"
#include "dcor/fast.hpp"
#include "dcor/models.hpp"
#include "dcor/rng.hpp"
#include "dcor/sample.hpp"
#include "dcor/simharness.hpp"
