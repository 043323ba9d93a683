// Error types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace curetest {

// Base class for estimation failures (distinct from programming errors,
// which use std::invalid_argument / std::logic_error).
struct estimation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// No observation carries kernel weight at the requested covariate point.
// Deliberately not a silent fallback: widening the bandwidth behind the
// caller's back would change test statistics invisibly.
struct all_weights_zero : estimation_error {
    all_weights_zero() : estimation_error("all kernel weights are zero at the evaluation point") {}
    explicit all_weights_zero(const std::string& what) : estimation_error(what) {}
};

// A stratified estimator was asked for a level with no observations.
struct empty_stratum : estimation_error {
    explicit empty_stratum(const std::string& level)
        : estimation_error("empty stratum: no observation has level '" + level + "'") {}
};

// Every observation is censored; T^1_max and anything built on it is undefined.
struct no_events : estimation_error {
    no_events() : estimation_error("sample has no uncensored observation") {}
};

// Latency is undefined when the estimated susceptible fraction is zero.
struct cure_rate_one : estimation_error {
    cure_rate_one() : estimation_error("estimated cure rate is 1; latency undefined") {}
};

// The censoring distribution estimate saturates at the cure threshold, making
// the proxy response for this subject inestimable (only raised when capping
// is disabled).
struct g_saturated : estimation_error {
    std::size_t index;
    explicit g_saturated(std::size_t i)
        : estimation_error("censoring estimate saturated at threshold for observation " +
                           std::to_string(i)),
          index(i) {}
};

// Factorial enumeration of nominal level orderings exceeds the cap.
struct too_many_levels : estimation_error {
    std::size_t levels;
    explicit too_many_levels(std::size_t k)
        : estimation_error("nominal covariate has " + std::to_string(k) +
                           " levels; ordering enumeration capped at 7 levels (5040 orderings). "
                           "Consider recoding the covariate into dummy variables."),
          levels(k) {}
};

struct missing_bandwidth : estimation_error {
    missing_bandwidth() : estimation_error("continuous conditioning covariate requires a bandwidth") {}
};

struct unexpected_bandwidth : estimation_error {
    unexpected_bandwidth()
        : estimation_error("bandwidth supplied but the conditioning covariate is not continuous") {}
};

}  // namespace curetest
