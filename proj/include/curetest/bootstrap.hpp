// Null-mimicking bootstrap calibration of the cure-rate covariate tests.
//
// The engine precomputes, from the original sample, the cure probability and
// the conditional latency / censoring curves at every sample covariate point
// (the resampling plan), then draws B resamples under the null, recomputes
// the proxy responses and the statistic on each, and reports critical values
// and p-values. Resample b always uses the rng stream derived from
// (seed, b), so results are bit-identical for any worker count.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "curetest/bandwidth.hpp"
#include "curetest/core.hpp"
#include "curetest/errors.hpp"
#include "curetest/estimators.hpp"
#include "curetest/eta.hpp"
#include "curetest/parallel.hpp"
#include "curetest/rng.hpp"
#include "curetest/statistics.hpp"
#include "curetest/step_curve.hpp"

namespace curetest {

enum class test_case { case1 = 1, case2 = 2, case3 = 3 };

struct bandwidth_record {
    std::optional<double> h_censoring;  // conditional censoring estimator
    std::optional<double> h_survival;   // conditional survival / latency estimator
    std::optional<double> h_cure;       // cure rate on the X block (cases 2, 3)
    std::optional<double> h_test;       // statistic bandwidth (continuous X)
    std::string grid_rule;
};

struct test_diagnostics {
    std::size_t cap_events_observed = 0;   // saturation caps in the original eta
    std::size_t cap_events_bootstrap = 0;  // saturation caps across all resamples
    std::size_t orderings = 1;             // nominal orderings per statistic
    int requested_B = 0;
    int effective_B = 0;
    int failed_resamples = 0;
};

struct test_result {
    double cm_obs = 0.0, k_obs = 0.0;
    double cm_crit = 0.0, k_crit = 0.0;
    double p_cm = 1.0, p_k = 1.0;
    int B = 0;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    bandwidth_record bandwidths;
    test_diagnostics diagnostics;
    // Populated only when engine_config::keep_bootstrap_stats is set.
    std::vector<double> cm_bootstrap, k_bootstrap;

    bool reject_cm() const { return cm_obs > cm_crit; }
    bool reject_k() const { return k_obs > k_crit; }
};

struct engine_config {
    int B = 500;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    int workers = 1;
    std::optional<bandwidth_grid> estimator_grid;  // default: the per-case grid
    std::optional<double> test_bandwidth;          // cases 2/3 with continuous X
    eta_options eta = {};
    // Failed resamples (e.g. a resample with no uncensored observation) are
    // dropped and B effectively reduced; above this fraction the run aborts
    // rather than silently losing power.
    double max_failure_fraction = 0.05;
    bool keep_bootstrap_stats = false;
};

// Per-row ingredients of the null-mimicking resampling scheme.
struct resample_plan {
    std::vector<double> cure_prob;        // P(cured) used for the row's covariate point
    std::vector<step_curve> latency;      // S0 survival; an empty curve means no event mass
    std::vector<step_curve> censor;       // censoring survival 1 - G
    std::vector<double> censor_fallback;  // largest supported time, for defective G draws
};

struct bootstrap_draw {
    numeric_view data;
    std::size_t n_cured = 0;
};

// Smallest jump time t with 1 - curve(t) >= u; nullopt when u exceeds the
// curve's total mass (defective distribution).
inline std::optional<double> draw_from_curve(const step_curve& curve, double u) {
    const std::vector<double>& v = curve.values();
    std::size_t lo = 0, hi = v.size();
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (1.0 - v[mid] >= u)
            hi = mid;
        else
            lo = mid + 1;
    }
    if (lo == v.size()) return std::nullopt;
    return curve.jump_times()[lo];
}

// One bootstrap resample: covariate tuples resampled with replacement, cure
// drawn at the plan's probability, event times from the latency estimate,
// censoring times from the censoring estimate. Cured rows surface as
// (T = C, delta = 0); defective censoring draws fall back to the largest
// supported time.
inline bootstrap_draw draw_resample(const resample_plan& plan, const numeric_view& base, rng& g) {
    const std::size_t n = base.size();
    bootstrap_draw out;
    out.data.time.resize(n);
    out.data.status.resize(n);
    out.data.cols.resize(base.cols.size());
    for (auto& c : out.data.cols) c.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = static_cast<std::size_t>(g.next_below(n));
        for (std::size_t c = 0; c < base.cols.size(); ++c) out.data.cols[c][i] = base.cols[c][j];

        bool cured = g.next_double() < plan.cure_prob[j];
        double y = 0.0;
        if (!cured) {
            std::optional<double> yo = draw_from_curve(plan.latency[j], g.next_double());
            if (yo)
                y = *yo;
            else
                cured = true;  // no susceptible mass at this covariate point
        }
        std::optional<double> co = draw_from_curve(plan.censor[j], g.next_double());
        double c_time = co ? *co : plan.censor_fallback[j];
        if (cured) {
            out.data.time[i] = c_time;
            out.data.status[i] = 0;
            ++out.n_cured;
        } else {
            out.data.time[i] = std::min(y, c_time);
            out.data.status[i] = y <= c_time ? 1 : 0;
        }
    }
    return out;
}

namespace detail {

struct engine {
    const sample* src = nullptr;
    test_case tcase = test_case::case1;
    engine_config cfg;

    numeric_view data;
    std::vector<std::size_t> x_cols, z_cols, w_cols;
    std::vector<column_smoothing> w_smoothing;
    bool x_continuous = false;

    double tau_hat = 0.0;
    bandwidth_record bw;
    eta_vector eta;
    resample_plan plan;

    test_columns make_stat_columns(const numeric_view& v) const {
        test_columns tc;
        auto push = [&](std::vector<test_columns::column>& dst, std::size_t col) {
            const covariate_entry& e = src->spec.entries[col];
            test_columns::column c;
            c.v = v.cols[col];
            c.nominal = e.kind == covariate_kind::nominal;
            c.continuous = e.kind == covariate_kind::continuous;
            c.levels = e.labels.size();
            dst.push_back(std::move(c));
        };
        for (std::size_t col : x_cols) push(tc.x, col);
        for (std::size_t col : z_cols) push(tc.z, col);
        return tc;
    }

    // Statistic bandwidth is meaningful only when the conditioning block is
    // continuous (cases 2 and 3).
    bool needs_test_bandwidth() const {
        return tcase != test_case::case1 && x_continuous;
    }

    stat_pair statistic(const std::vector<double>& eta_values, const numeric_view& v,
                        std::optional<double> h_test, std::size_t* orderings) const {
        test_columns tc = make_stat_columns(v);
        ordering_stat os = max_stat_over_orderings(
            eta_values, tc, static_cast<int>(tcase),
            needs_test_bandwidth() ? h_test : std::nullopt);
        if (orderings) *orderings = os.orderings;
        return os.stats;
    }

    // Proxy vector of a resample: tau* and G* are re-estimated from the
    // resample with the original bandwidths.
    eta_vector resample_eta(const numeric_view& rv) const {
        double tau_star = largest_event_time(rv.time, rv.status);
        pl_view pv = make_pl_view(rv.time, rv.status, true);
        const std::size_t n = rv.size();
        std::vector<double> g_at_tau(n);
        std::vector<double> w;
        std::vector<double> w0(w_cols.size());
        pl_scratch ws;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < w_cols.size(); ++c) w0[c] = rv.cols[w_cols[c]][i];
            product_weights(rv, w_cols, w_smoothing, w0, w);
            g_at_tau[i] = 1.0 - weighted_pl_value(pv, w, tau_star, ws);
        }
        return compute_eta_impl(rv.time, rv.status, g_at_tau, tau_star, cfg.eta);
    }
};

inline engine make_engine(const sample& s, test_case tcase, const engine_config& cfg) {
    validation_report rep = validate(s);
    if (!rep.ok())
        throw std::invalid_argument("run_test: invalid sample: " + rep.issues.front().message);

    engine e;
    e.src = &s;
    e.tcase = tcase;
    e.cfg = cfg;
    e.data = make_numeric_view(s);
    e.x_cols = s.spec.columns(covariate_role::x_block);
    e.z_cols = s.spec.columns(covariate_role::z_block);

    if (e.z_cols.empty()) throw std::invalid_argument("run_test: no tested (Z) covariate declared");
    switch (tcase) {
        case test_case::case1:
            if (!e.x_cols.empty() || e.z_cols.size() != 1)
                throw std::invalid_argument("case 1 requires exactly one Z covariate and no X block");
            break;
        case test_case::case2:
            if (e.x_cols.size() != 1)
                throw std::invalid_argument("case 2 requires exactly one X covariate");
            break;
        case test_case::case3:
            if (e.x_cols.empty())
                throw std::invalid_argument("case 3 requires a nonempty X block");
            for (std::size_t c : e.x_cols)
                if (s.spec.entries[c].kind != covariate_kind::continuous)
                    throw std::invalid_argument("case 3 requires a continuous X block");
            break;
    }

    e.w_cols = e.x_cols;
    e.w_cols.insert(e.w_cols.end(), e.z_cols.begin(), e.z_cols.end());
    e.x_continuous = !e.x_cols.empty();
    for (std::size_t c : e.x_cols)
        if (s.spec.entries[c].kind != covariate_kind::continuous) e.x_continuous = false;

    const std::size_t n = s.size();
    bool any_continuous_w = false;
    for (std::size_t c : e.w_cols)
        if (s.spec.entries[c].kind == covariate_kind::continuous) any_continuous_w = true;

    bandwidth_grid grid =
        cfg.estimator_grid
            ? *cfg.estimator_grid
            : (tcase == test_case::case1
                   ? make_grid(4.0, 60.0, 10, 0.2, static_cast<int>(n))
                   : make_grid(3.5, 30.0, 10, 1.0 / 6.0, static_cast<int>(n)));
    e.bw.grid_rule = grid.rule;

    double h_g = 0.0, h_s = 0.0;
    if (any_continuous_w) {
        h_g = cv_bandwidth(s, e.w_cols, grid, cv_target::censoring);
        h_s = cv_bandwidth(s, e.w_cols, grid, cv_target::survival);
        e.bw.h_censoring = h_g;
        e.bw.h_survival = h_s;
    }
    auto smoothing_for = [&s](const std::vector<std::size_t>& cols, double h) {
        std::vector<column_smoothing> sm;
        for (std::size_t c : cols)
            sm.push_back(s.spec.entries[c].kind == covariate_kind::continuous
                             ? column_smoothing::kernel(h)
                             : column_smoothing::exact_match());
        return sm;
    };
    e.w_smoothing = smoothing_for(e.w_cols, any_continuous_w ? h_g : 1.0);

    e.tau_hat = estimate_tau(s);

    // Conditional censoring curves at every sample point; they provide both
    // the proxy denominators and the step-2.2 draws.
    pl_view pv_cens = make_pl_view(e.data.time, e.data.status, true);
    pl_view pv_surv = make_pl_view(e.data.time, e.data.status, false);
    std::vector<column_smoothing> surv_smoothing = smoothing_for(e.w_cols, any_continuous_w ? h_s : 1.0);

    std::vector<double> g_at_tau(n);
    e.plan.censor.resize(n);
    e.plan.censor_fallback.resize(n);
    e.plan.latency.resize(n);
    {
        std::vector<double> w;
        std::vector<double> w0(e.w_cols.size());
        pl_scratch ws;
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t c = 0; c < e.w_cols.size(); ++c) w0[c] = e.data.cols[e.w_cols[c]][j];
            product_weights(e.data, e.w_cols, e.w_smoothing, w0, w);
            e.plan.censor[j] = weighted_pl_curve(pv_cens, w, ws);
            e.plan.censor_fallback[j] = weighted_support_max(e.data, w);
            g_at_tau[j] = 1.0 - e.plan.censor[j](e.tau_hat);

            product_weights(e.data, e.w_cols, surv_smoothing, w0, w);
            step_curve surv = weighted_pl_curve(pv_surv, w, ws);
            try {
                e.plan.latency[j] = latency_from_survival(surv);
            } catch (const cure_rate_one&) {
                e.plan.latency[j] = step_curve();  // no susceptible mass here
            }
        }
    }

    e.eta = compute_eta_impl(e.data.time, e.data.status, g_at_tau, e.tau_hat, cfg.eta);

    // Null-mimicking cure probability: marginal KM plateau for case 1, the
    // conditional-on-X cure rate for cases 2 and 3.
    e.plan.cure_prob.assign(n, 0.0);
    if (tcase == test_case::case1) {
        std::vector<double> unit(n, 1.0);
        pl_scratch ws;
        double plateau = weighted_pl_value(pv_surv, unit, e.tau_hat, ws);
        e.plan.cure_prob.assign(n, plateau);
    } else if (e.x_continuous) {
        double h_c = cv_bandwidth(s, e.x_cols, grid, cv_target::survival);
        e.bw.h_cure = h_c;
        std::vector<column_smoothing> x_sm = smoothing_for(e.x_cols, h_c);
        std::vector<double> w;
        std::vector<double> x0(e.x_cols.size());
        pl_scratch ws;
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t c = 0; c < e.x_cols.size(); ++c) x0[c] = e.data.cols[e.x_cols[c]][j];
            product_weights(e.data, e.x_cols, x_sm, x0, w);
            e.plan.cure_prob[j] = weighted_pl_value(pv_surv, w, e.tau_hat, ws);
        }
    } else {
        // Discrete or nominal X: the cure rate at a level is the mean of the
        // proxies over the rows at that level.
        for (std::size_t j = 0; j < n; ++j) {
            double cnt = 0.0, sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                bool match = true;
                for (std::size_t c : e.x_cols)
                    if (e.data.cols[c][i] != e.data.cols[c][j]) match = false;
                if (match) {
                    cnt += 1.0;
                    sum += e.eta.values[i];
                }
            }
            e.plan.cure_prob[j] = std::min(1.0, std::max(0.0, sum / cnt));
        }
    }
    return e;
}

}  // namespace detail

// Runs one test per statistic bandwidth, sharing the resamples. For case 1,
// and for a discrete or nominal conditioning block, pass {nullopt}.
inline std::vector<test_result> run_test_multi(const sample& s, test_case tcase,
                                               const engine_config& cfg,
                                               std::vector<std::optional<double>> test_bandwidths) {
    if (cfg.B < 1 || !(cfg.alpha > 0.0 && cfg.alpha < 1.0))
        throw std::invalid_argument("run_test: need B >= 1 and alpha in (0,1)");
    detail::engine e = detail::make_engine(s, tcase, cfg);
    if (test_bandwidths.empty()) test_bandwidths.push_back(std::nullopt);
    if (e.needs_test_bandwidth())
        for (const auto& h : test_bandwidths)
            if (!h) throw missing_bandwidth();

    const std::size_t n_h = test_bandwidths.size();
    std::vector<stat_pair> observed(n_h);
    std::size_t orderings = 1;
    for (std::size_t hi = 0; hi < n_h; ++hi)
        observed[hi] = e.statistic(e.eta.values, e.data, test_bandwidths[hi], &orderings);

    const std::size_t B = static_cast<std::size_t>(cfg.B);
    std::vector<std::vector<stat_pair>> boot(B);
    std::vector<char> failed(B, 0);
    std::vector<std::size_t> caps(B, 0);

    parallel_for(B, cfg.workers, [&](std::size_t b) {
        rng g = make_stream(cfg.seed, {hash_name("bootstrap"), b});
        try {
            bootstrap_draw draw = draw_resample(e.plan, e.data, g);
            eta_vector eta_star = e.resample_eta(draw.data);
            caps[b] = eta_star.cap_events;
            std::vector<stat_pair> row(n_h);
            for (std::size_t hi = 0; hi < n_h; ++hi)
                row[hi] = e.statistic(eta_star.values, draw.data, test_bandwidths[hi], nullptr);
            boot[b] = std::move(row);
        } catch (const estimation_error&) {
            failed[b] = 1;
        }
    });

    int n_failed = 0;
    std::size_t cap_boot = 0;
    for (std::size_t b = 0; b < B; ++b) {
        n_failed += failed[b];
        cap_boot += caps[b];
    }
    if (n_failed > cfg.max_failure_fraction * static_cast<double>(B))
        throw estimation_error("bootstrap aborted: " + std::to_string(n_failed) + " of " +
                               std::to_string(B) + " resamples failed (> " +
                               std::to_string(100.0 * cfg.max_failure_fraction) + "%)");
    const int b_eff = static_cast<int>(B) - n_failed;

    std::vector<test_result> results(n_h);
    for (std::size_t hi = 0; hi < n_h; ++hi) {
        std::vector<double> cm_stats, k_stats;
        cm_stats.reserve(B);
        k_stats.reserve(B);
        for (std::size_t b = 0; b < B; ++b) {
            if (failed[b]) continue;
            cm_stats.push_back(boot[b][hi].cm);
            k_stats.push_back(boot[b][hi].k);
        }
        test_result r;
        r.cm_obs = observed[hi].cm;
        r.k_obs = observed[hi].k;
        r.B = static_cast<int>(B);
        r.alpha = cfg.alpha;
        r.seed = cfg.seed;
        r.bandwidths = e.bw;
        r.bandwidths.h_test = e.needs_test_bandwidth() ? test_bandwidths[hi] : std::nullopt;
        r.diagnostics.cap_events_observed = e.eta.cap_events;
        r.diagnostics.cap_events_bootstrap = cap_boot;
        r.diagnostics.orderings = orderings;
        r.diagnostics.requested_B = static_cast<int>(B);
        r.diagnostics.effective_B = b_eff;
        r.diagnostics.failed_resamples = n_failed;

        // Critical values: the sorted bootstrap statistic in (1-based)
        // position ceil((1-alpha) * B_eff). P-values: the proportion of
        // bootstrap statistics strictly larger than the observed one.
        std::vector<double> cm_sorted = cm_stats, k_sorted = k_stats;
        std::sort(cm_sorted.begin(), cm_sorted.end());
        std::sort(k_sorted.begin(), k_sorted.end());
        std::size_t pos = static_cast<std::size_t>(
            std::ceil((1.0 - cfg.alpha) * static_cast<double>(b_eff)));
        pos = std::min<std::size_t>(std::max<std::size_t>(pos, 1), cm_sorted.size());
        r.cm_crit = cm_sorted[pos - 1];
        r.k_crit = k_sorted[pos - 1];

        std::size_t cm_above = 0, k_above = 0;
        for (double v : cm_stats)
            if (v > r.cm_obs) ++cm_above;
        for (double v : k_stats)
            if (v > r.k_obs) ++k_above;
        r.p_cm = static_cast<double>(cm_above) / static_cast<double>(b_eff);
        r.p_k = static_cast<double>(k_above) / static_cast<double>(b_eff);

        if (cfg.keep_bootstrap_stats) {
            r.cm_bootstrap = std::move(cm_stats);
            r.k_bootstrap = std::move(k_stats);
        }
        results[hi] = std::move(r);
    }
    return results;
}

inline test_result run_test(const sample& s, test_case tcase, const engine_config& cfg) {
    return run_test_multi(s, tcase, cfg, {cfg.test_bandwidth})[0];
}

// ---------------------------------------------------------------------------
// Sample-level resampling operations (single resample, observable data shape)

namespace detail {

inline sample numeric_to_sample(const numeric_view& v, const covariate_spec& spec) {
    sample out;
    out.spec = spec;
    out.observations.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        observation& o = out.observations[i];
        o.time = v.time[i];
        o.status = v.status[i];
        o.covariates.resize(spec.arity());
        for (std::size_t j = 0; j < spec.arity(); ++j) {
            if (spec.entries[j].kind == covariate_kind::nominal)
                o.covariates[j] = spec.entries[j].labels.at(static_cast<std::size_t>(v.cols[j][i]));
            else
                o.covariates[j] = v.cols[j][i];
        }
    }
    return out;
}

inline sample resample_for_case(const sample& s, test_case tcase, std::uint64_t seed,
                                const engine_config& cfg) {
    engine_config c = cfg;
    c.seed = seed;
    detail::engine e = detail::make_engine(s, tcase, c);
    rng g = make_stream(seed, {hash_name("bootstrap"), 0});
    bootstrap_draw draw = draw_resample(e.plan, e.data, g);
    return numeric_to_sample(draw.data, s.spec);
}

}  // namespace detail

// One bootstrap resample under the case-1 plan (marginal KM cure rate).
inline sample resample_case1(const sample& s, std::uint64_t seed, const engine_config& cfg = {}) {
    return detail::resample_for_case(s, test_case::case1, seed, cfg);
}

// One bootstrap resample under the case-2 plan (covariate pairs resampled
// jointly; cure rate conditional on X).
inline sample resample_case2(const sample& s, std::uint64_t seed, const engine_config& cfg = {}) {
    return detail::resample_for_case(s, test_case::case2, seed, cfg);
}

}  // namespace curetest
