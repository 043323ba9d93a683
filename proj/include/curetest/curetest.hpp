// Umbrella header.
#pragma once

#include "curetest/bandwidth.hpp"
#include "curetest/bootstrap.hpp"
#include "curetest/core.hpp"
#include "curetest/csv.hpp"
#include "curetest/errors.hpp"
#include "curetest/estimators.hpp"
#include "curetest/eta.hpp"
#include "curetest/followup.hpp"
#include "curetest/kernel.hpp"
#include "curetest/parallel.hpp"
#include "curetest/rng.hpp"
#include "curetest/simulation.hpp"
#include "curetest/statistics.hpp"
#include "curetest/step_curve.hpp"
