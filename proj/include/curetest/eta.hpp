// Cure threshold and proxy responses.
//
// The proxy eta turns the censored testing problem into an uncensored
// regression-residual problem: eta_i = 0 when the subject is known uncured
// (delta_i = 1) or censored at or before the threshold; otherwise
// eta_i = 1 / (1 - G_hat(tau_hat | W_i)), which has the same conditional
// expectation as the cure indicator.
#pragma once

#include <cstddef>
#include <vector>

#include "curetest/core.hpp"
#include "curetest/errors.hpp"

namespace curetest {

struct eta_options {
    // G_hat can hit 1 at covariate-region edges, which would make the proxy
    // infinite. With the cap enabled, G_hat is truncated at 1 - 1/n before
    // inversion and the event is recorded; with it disabled, saturation
    // (G_hat >= 1 - epsilon) raises g_saturated.
    bool cap_enabled = true;
    double epsilon = 1e-6;
};

struct eta_vector {
    double tau_hat = 0.0;
    std::vector<double> values;    // eta_i, each 0 or >= 1
    std::vector<double> g_at_tau;  // raw G_hat(tau_hat | W_i) per observation
    std::size_t cap_events = 0;    // number of inverted rows where the cap bound
    std::vector<std::size_t> capped_rows;

    double mean() const {
        double s = 0.0;
        for (double v : values) s += v;
        return values.empty() ? 0.0 : s / static_cast<double>(values.size());
    }
};

// tau_hat = largest uncensored observed time.
inline double estimate_tau(const sample& s) {
    return detail::largest_event_time(s.times(), s.statuses());
}

namespace detail {

inline eta_vector compute_eta_impl(const std::vector<double>& time, const std::vector<int>& status,
                                   const std::vector<double>& g_at_tau, double tau_hat,
                                   const eta_options& opts) {
    const std::size_t n = time.size();
    eta_vector out;
    out.tau_hat = tau_hat;
    out.g_at_tau = g_at_tau;
    out.values.resize(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (status[i] == 1 || time[i] <= tau_hat) continue;  // eta_i = 0
        double g = g_at_tau[i];
        if (opts.cap_enabled) {
            double cap = 1.0 - 1.0 / static_cast<double>(n);
            if (g > cap) {
                g = cap;
                ++out.cap_events;
                out.capped_rows.push_back(i);
            }
        } else if (g >= 1.0 - opts.epsilon) {
            throw g_saturated(i);
        }
        out.values[i] = 1.0 / (1.0 - g);
    }
    return out;
}

}  // namespace detail

// Computes the proxy vector from precomputed censoring-distribution values
// G_hat(tau_hat | W_i). Depends on the sample only through
// (delta_i, T_i, tau_hat, g_at_tau), so recomputation with the same inputs
// reproduces values exactly.
inline eta_vector compute_eta(const sample& s, const std::vector<double>& g_at_tau,
                              double tau_hat, const eta_options& opts = {}) {
    if (g_at_tau.size() != s.size())
        throw std::invalid_argument("compute_eta: g_at_tau size mismatch");
    return detail::compute_eta_impl(s.times(), s.statuses(), g_at_tau, tau_hat, opts);
}

}  // namespace curetest
