// Bandwidth grids and leave-one-out cross-validation selection for the
// conditional distribution estimators.
#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "curetest/core.hpp"
#include "curetest/errors.hpp"
#include "curetest/estimators.hpp"

namespace curetest {

struct bandwidth_grid {
    std::vector<double> values;  // strictly increasing, positive
    std::string rule;            // provenance descriptor of the construction rule
};

// h_j = D_j * n^(-rate) with D_j equispaced from d_min to d_max inclusive.
inline bandwidth_grid make_grid(double d_min, double d_max, int count, double rate, int n) {
    if (!(d_min > 0.0) || (count > 1 && !(d_max > d_min)) || count < 1 || n < 1)
        throw std::invalid_argument("make_grid: invalid range");
    bandwidth_grid g;
    double scale = std::pow(static_cast<double>(n), -rate);
    for (int j = 0; j < count; ++j) {
        double d = count == 1 ? d_min : d_min + (d_max - d_min) * j / (count - 1);
        g.values.push_back(d * scale);
    }
    g.rule = "D in [" + std::to_string(d_min) + "," + std::to_string(d_max) + "] x " +
             std::to_string(count) + ", n^-" + std::to_string(rate) + ", n=" + std::to_string(n);
    return g;
}

enum class cv_target { survival, censoring };

namespace detail {

// Leave-one-out CV criterion for one bandwidth:
//   CV(h) = sum_i sum_j [ I(T_i <= T_j, d_i = 1) - F_loo(T_j | W_i) ]^2
// restricted to pairs where the indicator is observable, i.e. (T_i <= T_j
// with d_i = 1) or (T_i > T_j). For the censoring target the indicator is
// flipped (d -> 1-d) consistently with censoring_curve.
inline double cv_criterion(const numeric_view& v, const std::vector<std::size_t>& cols,
                           const std::vector<column_smoothing>& smoothing, bool censoring_polarity) {
    const std::size_t n = v.size();
    numeric_view loo;
    loo.cols.resize(cols.size());
    std::vector<std::size_t> loo_cols(cols.size());
    std::iota(loo_cols.begin(), loo_cols.end(), std::size_t{0});
    std::vector<double> w0(cols.size());
    std::vector<double> w;
    pl_scratch ws;

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        loo.time.clear();
        loo.status.clear();
        for (auto& c : loo.cols) c.clear();
        for (std::size_t r = 0; r < n; ++r) {
            if (r == i) continue;
            loo.time.push_back(v.time[r]);
            loo.status.push_back(v.status[r]);
            for (std::size_t c = 0; c < cols.size(); ++c)
                loo.cols[c].push_back(v.cols[cols[c]][r]);
        }
        for (std::size_t c = 0; c < cols.size(); ++c) w0[c] = v.cols[cols[c]][i];

        product_weights(loo, loo_cols, smoothing, w0, w);  // throws all_weights_zero

        pl_view pv = make_pl_view(loo.time, loo.status, censoring_polarity);
        step_curve curve = weighted_pl_curve(pv, w, ws);

        int di = censoring_polarity ? 1 - v.status[i] : v.status[i];
        for (std::size_t j = 0; j < n; ++j) {
            double ind;
            if (di == 1 && v.time[i] <= v.time[j])
                ind = 1.0;
            else if (v.time[i] > v.time[j])
                ind = 0.0;
            else
                continue;  // unobservable pair
            double f = 1.0 - curve(v.time[j]);
            double d = ind - f;
            total += d * d;
        }
    }
    return total;
}

}  // namespace detail

// Selects the grid value minimizing the leave-one-out CV criterion; ties go
// to the smallest bandwidth. Grid values where some evaluation point has no
// kernel neighbors are skipped; if every grid value fails, the failure is
// propagated.
inline double cv_bandwidth(const sample& s, const std::vector<std::size_t>& cols,
                           const bandwidth_grid& grid, cv_target target) {
    if (s.size() < 3) throw std::invalid_argument("cv_bandwidth: need n >= 3");
    if (grid.values.empty()) throw std::invalid_argument("cv_bandwidth: empty grid");
    numeric_view v = make_numeric_view(s);
    bool flip = target == cv_target::censoring;

    double best_h = 0.0;
    double best_score = std::numeric_limits<double>::infinity();
    bool any_ok = false;
    for (double h : grid.values) {
        std::vector<column_smoothing> smoothing;
        for (std::size_t c : cols) {
            smoothing.push_back(s.spec.entries[c].kind == covariate_kind::continuous
                                    ? column_smoothing::kernel(h)
                                    : column_smoothing::exact_match());
        }
        double score;
        try {
            score = detail::cv_criterion(v, cols, smoothing, flip);
        } catch (const all_weights_zero&) {
            continue;
        }
        any_ok = true;
        if (score < best_score) {
            best_score = score;
            best_h = h;
        }
    }
    if (!any_ok) throw all_weights_zero("cv_bandwidth: every grid value left some point without neighbors");
    return best_h;
}

}  // namespace curetest
