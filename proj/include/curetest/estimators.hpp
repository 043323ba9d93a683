// Survival-curve estimators: Kaplan-Meier, stratified KM, Beran conditional
// product-limit (univariate and product-kernel multivariate), censoring
// distribution, kernel cure-rate and latency estimators.
//
// Everything is a pure function of an immutable sample and can run
// concurrently without shared state.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "curetest/core.hpp"
#include "curetest/errors.hpp"
#include "curetest/kernel.hpp"
#include "curetest/step_curve.hpp"

namespace curetest {

// Per-column smoothing rule for conditional estimators: continuous columns
// use kernel weights at a bandwidth, discrete/nominal columns use
// exact-match indicator weights.
struct column_smoothing {
    bool exact = false;
    double h = 0.0;

    static column_smoothing kernel(double bandwidth) {
        if (!(bandwidth > 0.0)) throw std::invalid_argument("bandwidth must be positive");
        return {false, bandwidth};
    }
    static column_smoothing exact_match() { return {true, 0.0}; }
};

// Flat numeric representation of a sample (nominal labels as level indices),
// used by all estimator internals and by the bootstrap engine.
struct numeric_view {
    std::vector<double> time;
    std::vector<int> status;
    std::vector<std::vector<double>> cols;

    std::size_t size() const { return time.size(); }
};

inline numeric_view make_numeric_view(const sample& s) {
    numeric_view v;
    v.time = s.times();
    v.status = s.statuses();
    v.cols.resize(s.spec.arity());
    for (std::size_t j = 0; j < s.spec.arity(); ++j) v.cols[j] = s.numeric_column(j);
    return v;
}

namespace detail {

// Sorted layout for one product-limit polarity. For survival curves the jump
// indicator is delta; for censoring curves it is 1-delta, and the tie rule is
// reversed so that the jumps of the flipped problem still come first.
struct pl_view {
    std::vector<double> time;     // ascending
    std::vector<int> jump;        // 1 where this polarity jumps
    std::vector<std::size_t> order;  // original index per sorted position
};

inline pl_view make_pl_view(const std::vector<double>& time, const std::vector<int>& status,
                            bool censoring) {
    pl_view pv;
    const std::size_t n = time.size();
    pv.order.resize(n);
    std::iota(pv.order.begin(), pv.order.end(), std::size_t{0});
    std::stable_sort(pv.order.begin(), pv.order.end(), [&](std::size_t a, std::size_t b) {
        if (time[a] != time[b]) return time[a] < time[b];
        return censoring ? status[a] < status[b] : status[a] > status[b];
    });
    pv.time.resize(n);
    pv.jump.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        pv.time[k] = time[pv.order[k]];
        int d = status[pv.order[k]];
        pv.jump[k] = censoring ? 1 - d : d;
    }
    return pv;
}

struct pl_scratch {
    std::vector<double> w;     // weights by sorted position
    std::vector<double> tail;  // tail sums by sorted position
};

// Gathers weights into sorted positions and fills exact backward tail sums.
inline void gather_tails(const pl_view& pv, const std::vector<double>& w_original,
                         pl_scratch& ws) {
    const std::size_t n = pv.order.size();
    ws.w.resize(n);
    ws.tail.resize(n + 1);
    for (std::size_t k = 0; k < n; ++k) ws.w[k] = w_original[pv.order[k]];
    ws.tail[n] = 0.0;
    for (std::size_t k = n; k-- > 0;) ws.tail[k] = ws.tail[k + 1] + ws.w[k];
}

// Weighted product-limit survival curve:
//   S(t) = prod_{k: T_(k) <= t} (1 - jump_k * w_k / sum_{r >= k} w_r).
inline step_curve weighted_pl_curve(const pl_view& pv, const std::vector<double>& w_original,
                                    pl_scratch& ws) {
    gather_tails(pv, w_original, ws);
    const std::size_t n = pv.order.size();
    std::vector<double> jt, jv;
    double s = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (ws.tail[k] <= 0.0) break;
        if (pv.jump[k] && ws.w[k] > 0.0) {
            double factor = 1.0 - ws.w[k] / ws.tail[k];
            s *= std::max(0.0, factor);
            if (!jt.empty() && jt.back() == pv.time[k]) {
                jv.back() = s;
            } else if (jv.empty() || s < jv.back()) {
                jt.push_back(pv.time[k]);
                jv.push_back(s);
            }
        }
    }
    return step_curve(std::move(jt), std::move(jv));
}

inline step_curve weighted_pl_curve(const pl_view& pv, const std::vector<double>& w_original) {
    pl_scratch ws;
    return weighted_pl_curve(pv, w_original, ws);
}

// Survival value at a single time, without materializing the curve.
inline double weighted_pl_value(const pl_view& pv, const std::vector<double>& w_original,
                                double t, pl_scratch& ws) {
    gather_tails(pv, w_original, ws);
    const std::size_t n = pv.order.size();
    double s = 1.0;
    for (std::size_t k = 0; k < n && pv.time[k] <= t; ++k) {
        if (ws.tail[k] <= 0.0) break;
        if (pv.jump[k] && ws.w[k] > 0.0) s *= std::max(0.0, 1.0 - ws.w[k] / ws.tail[k]);
    }
    return s;
}

// Unnormalized product weights at covariate point w0 over selected columns.
inline void product_weights(const numeric_view& v, const std::vector<std::size_t>& cols,
                            const std::vector<column_smoothing>& smoothing,
                            const std::vector<double>& w0, std::vector<double>& out) {
    const std::size_t n = v.size();
    out.assign(n, 1.0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double w = 1.0;
        for (std::size_t c = 0; c < cols.size() && w > 0.0; ++c) {
            double x = v.cols[cols[c]][i];
            w *= smoothing[c].exact ? (x == w0[c] ? 1.0 : 0.0)
                                    : kernel_weight(w0[c] - x, smoothing[c].h);
        }
        out[i] = w;
        total += w;
    }
    if (!(total > 0.0)) throw all_weights_zero();
}

inline double largest_event_time(const std::vector<double>& time,
                                 const std::vector<int>& status) {
    double t1 = -1.0;
    bool seen = false;
    for (std::size_t i = 0; i < time.size(); ++i) {
        if (status[i] == 1 && (!seen || time[i] > t1)) {
            t1 = time[i];
            seen = true;
        }
    }
    if (!seen) throw no_events();
    return t1;
}

// Largest observed time among positively weighted observations; used as the
// redistribute-to-the-right fallback when a defective censoring estimate is
// sampled beyond its mass.
inline double weighted_support_max(const numeric_view& v, const std::vector<double>& w) {
    double m = 0.0;
    bool seen = false;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (w[i] > 0.0 && (!seen || v.time[i] > m)) {
            m = v.time[i];
            seen = true;
        }
    }
    return seen ? m : 0.0;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Public estimators

inline step_curve km_survival(const sample& s) {
    if (s.size() == 0) throw std::invalid_argument("km_survival: empty sample");
    std::vector<double> time = s.times();
    std::vector<int> status = s.statuses();
    detail::pl_view pv = detail::make_pl_view(time, status, false);
    std::vector<double> w(s.size(), 1.0);
    return detail::weighted_pl_curve(pv, w);
}

// Nadaraya-Watson weights B_h[i](x0) = K_h(x0 - X_i) / sum_j K_h(x0 - X_j).
inline std::vector<double> nw_weights(const sample& s, std::size_t col, double x0,
                                      const kernel_config& cfg) {
    std::vector<double> x = s.numeric_column(col);
    std::vector<double> w(x.size());
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        w[i] = kernel_weight(x0 - x[i], cfg.bandwidth);
        total += w[i];
    }
    if (!(total > 0.0)) throw all_weights_zero();
    for (double& wi : w) wi /= total;
    return w;
}

inline step_curve multivar_conditional_pl(const sample& s, const std::vector<std::size_t>& cols,
                                          const std::vector<column_smoothing>& smoothing,
                                          const std::vector<double>& w0) {
    numeric_view v = make_numeric_view(s);
    std::vector<double> w;
    detail::product_weights(v, cols, smoothing, w0, w);
    detail::pl_view pv = detail::make_pl_view(v.time, v.status, false);
    return detail::weighted_pl_curve(pv, w);
}

inline step_curve beran_survival(const sample& s, std::size_t col, double x0,
                                 const kernel_config& cfg) {
    return multivar_conditional_pl(s, {col}, {column_smoothing::kernel(cfg.bandwidth)}, {x0});
}

inline step_curve stratified_km(const sample& s, std::size_t col, const covariate_value& level) {
    const covariate_entry& e = s.spec.entries.at(col);
    double lv;
    std::string label;
    if (e.kind == covariate_kind::nominal) {
        label = trim(std::get<std::string>(level));
        auto idx = e.label_index(label);
        if (!idx) throw empty_stratum(label);
        lv = static_cast<double>(*idx);
    } else {
        lv = std::get<double>(level);
        label = std::to_string(lv);
    }
    try {
        return multivar_conditional_pl(s, {col}, {column_smoothing::exact_match()}, {lv});
    } catch (const all_weights_zero&) {
        throw empty_stratum(label);
    }
}

// Survival of the censoring variable, 1 - G(t|w0): the same product-limit
// machinery with the event and censoring roles swapped.
inline step_curve censoring_curve(const sample& s, const std::vector<std::size_t>& cols,
                                  const std::vector<column_smoothing>& smoothing,
                                  const std::vector<double>& w0) {
    numeric_view v = make_numeric_view(s);
    std::vector<double> w;
    detail::product_weights(v, cols, smoothing, w0, w);
    detail::pl_view pv = detail::make_pl_view(v.time, v.status, true);
    return detail::weighted_pl_curve(pv, w);
}

// Cure rate 1 - p_hat(w0): the conditional product-limit survival evaluated
// at the largest uncensored time.
inline double cure_rate_at(const sample& s, const std::vector<std::size_t>& cols,
                           const std::vector<column_smoothing>& smoothing,
                           const std::vector<double>& w0) {
    double t1 = detail::largest_event_time(s.times(), s.statuses());
    return multivar_conditional_pl(s, cols, smoothing, w0)(t1);
}

inline double cure_rate_at(const sample& s, std::size_t col, double x0, const kernel_config& cfg) {
    return cure_rate_at(s, {col}, {column_smoothing::kernel(cfg.bandwidth)}, {x0});
}

namespace detail {

// Latency from a conditional survival curve: S0 = (S - (1-p)) / p with
// 1 - p the plateau at the largest uncensored time, clipped into [0,1] and
// monotonized. The result is always a proper distribution (S0 = 0 at the
// plateau), which downstream inverse-transform sampling requires.
inline step_curve latency_from_survival(const step_curve& surv) {
    double plateau = surv.final_value();
    double p_hat = 1.0 - plateau;
    if (!(p_hat > 0.0)) throw cure_rate_one();
    std::vector<double> jt, jv;
    double prev = 1.0;
    const std::vector<double>& t = surv.jump_times();
    const std::vector<double>& v = surv.values();
    for (std::size_t k = 0; k < t.size(); ++k) {
        double s0 = (v[k] - plateau) / p_hat;
        s0 = std::min(prev, std::max(0.0, s0));
        if (s0 < prev) {
            jt.push_back(t[k]);
            jv.push_back(s0);
            prev = s0;
        }
    }
    return step_curve(std::move(jt), std::move(jv));
}

}  // namespace detail

// Latency estimator S0_hat(t|w0); requires a positive susceptible fraction.
inline step_curve latency_curve(const sample& s, const std::vector<std::size_t>& cols,
                                const std::vector<column_smoothing>& smoothing,
                                const std::vector<double>& w0) {
    return detail::latency_from_survival(multivar_conditional_pl(s, cols, smoothing, w0));
}

}  // namespace curetest
