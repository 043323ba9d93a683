// Sufficient-follow-up test based on the right-tail plateau of the KM curve.
#pragma once

#include <cmath>
#include <cstddef>

#include "curetest/core.hpp"
#include "curetest/estimators.hpp"

namespace curetest {

struct followup_result {
    double t_max = 0.0;       // largest observed time T_(n)
    double t1_max = 0.0;      // largest uncensored time T^1_max
    std::size_t n_tail = 0;   // uncensored times in (2*T^1_max - T_(n), T^1_max]
    double p_value = 1.0;     // small p supports sufficient follow-up
};

// Counts uncensored events in the tail interval mirrored around T^1_max and
// returns p = (1 - N_n / n)^n. An empty interval (largest observation
// uncensored) gives p = 1: no plateau evidence.
inline followup_result maller_zhou(const sample& s) {
    const std::size_t n = s.size();
    std::vector<double> time = s.times();
    std::vector<int> status = s.statuses();
    double t1 = detail::largest_event_time(time, status);
    double tn = *std::max_element(time.begin(), time.end());

    followup_result out;
    out.t_max = tn;
    out.t1_max = t1;
    double lo = 2.0 * t1 - tn;  // open on the left, closed on the right
    for (std::size_t i = 0; i < n; ++i)
        if (status[i] == 1 && time[i] > lo && time[i] <= t1) ++out.n_tail;
    out.p_value = std::pow(1.0 - static_cast<double>(out.n_tail) / static_cast<double>(n),
                           static_cast<double>(n));
    return out;
}

}  // namespace curetest
