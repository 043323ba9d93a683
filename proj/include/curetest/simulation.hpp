// Scenario generators and the Monte Carlo driver for the rejection-rate
// tables.
//
// All scenarios share one mixture recipe: draw the covariates, flip a cure
// coin at the scenario's incidence, draw uncured event times from a
// truncated-exponential latency by its closed-form quantile, draw an
// exponential censoring time, and observe (T, delta) = (min, indicator).
// Cured subjects are always censored at the censoring draw.
#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "curetest/bootstrap.hpp"
#include "curetest/core.hpp"
#include "curetest/parallel.hpp"
#include "curetest/rng.hpp"

namespace curetest {

namespace scenario_constants {
constexpr double tau0 = 4.605;            // latency support bound
constexpr double logit_intercept = 0.476;  // incidence link coefficients
constexpr double logit_slope = 0.358;
constexpr double beta2_h1 = 0.225;        // case-2 interaction under H1
// Per-level exponential censoring rates for the nominal case-1 scenario.
constexpr std::array<double, 3> nominal_censor_rates = {0.6, 0.45, 0.3};
}  // namespace scenario_constants

inline double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }

// Case-1 incidence p(z) under the alternative.
inline double case1_incidence(double z) {
    using namespace scenario_constants;
    return logistic(logit_intercept + logit_slope * z);
}

// Covariate anchor with a target uncure probability, by inverting the
// logistic link. The no-cure target p = 1 uses the upper end of the
// covariate range, where the link saturates.
inline double case1_anchor(double p) {
    using namespace scenario_constants;
    if (p >= 1.0) return 20.0;
    if (p <= 0.0) return -20.0;
    return (std::log(p / (1.0 - p)) - logit_intercept) / logit_slope;
}

// Case-2 incidence p(x, z) = logistic(0.476 + 0.358 x (1 + beta2 z)).
inline double case2_incidence(double x, double z, double beta2) {
    using namespace scenario_constants;
    return logistic(logit_intercept + logit_slope * x * (1.0 + beta2 * z));
}

// Case-2 incidence for the discrete scenario. Under the alternative the
// logistic link is sign-flipped (incidence decreasing in the index); the
// level anchors below are chosen to hit round probabilities under this
// parameterization.
inline double case2_discrete_incidence(bool h1, double x, double z) {
    using namespace scenario_constants;
    return h1 ? 1.0 - case2_incidence(x, z, beta2_h1) : case2_incidence(x, z, 0.0);
}

namespace detail_sim {

inline double case1_censor_rate(double z) { return 0.6 / (2.0 + (z - 20.0) / 40.0); }

inline double case1_latency_rate(double z) { return std::exp((z + 20.0) / 40.0); }

inline double case2_censor_rate(double x, double z) {
    double denom = 2.0 + (0.5 * (x + z) - 20.0) / 40.0;
    if (denom < 0.05) denom = 0.05;  // the covariate tails never reach this in practice
    return 0.6 / denom;
}

inline double case2_latency_rate(bool h1, double x, double z) {
    return std::exp(((h1 ? x + z : z) + 20.0) / 40.0);
}

// Quantile of the truncated-exponential latency: support (0, tau0].
inline double latency_quantile(double rate, double v) {
    using scenario_constants::tau0;
    return -std::log1p(-v * (1.0 - std::exp(-rate * tau0))) / rate;
}

inline std::size_t draw_level(const std::array<double, 3>& mass, double u) {
    if (u < mass[0]) return 0;
    if (u < mass[0] + mass[1]) return 1;
    return 2;
}

}  // namespace detail_sim

struct scenario_stats {
    long long n_total = 0;
    long long n_cured = 0;
    long long n_censored = 0;

    double cure_fraction() const {
        return n_total ? static_cast<double>(n_cured) / static_cast<double>(n_total) : 0.0;
    }
    double censored_fraction() const {
        return n_total ? static_cast<double>(n_censored) / static_cast<double>(n_total) : 0.0;
    }
};

namespace detail_sim {

// Shared mixture draw given the per-subject parameters.
inline void draw_outcome(double p_uncure, double latency_rate, double censor_rate, rng& g,
                         double& t, int& status, scenario_stats* stats) {
    bool cured = g.next_double() < 1.0 - p_uncure;
    double c;
    if (cured) {
        c = g.exponential(censor_rate);
        t = c;
        status = 0;
    } else {
        double y = latency_quantile(latency_rate, g.next_double());
        c = g.exponential(censor_rate);
        t = std::min(y, c);
        status = y <= c ? 1 : 0;
    }
    if (stats) {
        ++stats->n_total;
        if (cured) ++stats->n_cured;
        if (status == 0) ++stats->n_censored;
    }
}

}  // namespace detail_sim

enum class case1_hypothesis { h0, h1, no_cure };

// Case 1, continuous Z ~ U(-20, 20).
inline sample gen_case1_continuous(case1_hypothesis hyp, double p0, int n, rng& g,
                                   scenario_stats* stats = nullptr) {
    sample s;
    s.spec.entries.push_back({"z", covariate_kind::continuous, covariate_role::z_block, {}});
    s.observations.resize(static_cast<std::size_t>(n));
    for (auto& o : s.observations) {
        double z = g.uniform(-20.0, 20.0);
        double p_uncure = hyp == case1_hypothesis::h0
                              ? p0
                              : (hyp == case1_hypothesis::no_cure ? 1.0 : case1_incidence(z));
        o.covariates = {z};
        detail_sim::draw_outcome(p_uncure, detail_sim::case1_latency_rate(z),
                                 detail_sim::case1_censor_rate(z), g, o.time, o.status, stats);
    }
    return s;
}

// Case 1, discrete Z with three ordered values anchored at the target uncure
// probabilities; targets (p, p, p) give the null, (1, 1, 1) the no-cure case.
inline sample gen_case1_discrete(const std::array<double, 3>& p_targets,
                                 const std::array<double, 3>& mass, int n, rng& g,
                                 scenario_stats* stats = nullptr) {
    std::array<double, 3> anchors{};
    for (std::size_t j = 0; j < 3; ++j) anchors[j] = case1_anchor(p_targets[j]);
    sample s;
    s.spec.entries.push_back({"z", covariate_kind::discrete, covariate_role::z_block, {}});
    s.observations.resize(static_cast<std::size_t>(n));
    for (auto& o : s.observations) {
        std::size_t j = detail_sim::draw_level(mass, g.next_double());
        double z = anchors[j];
        o.covariates = {z};
        detail_sim::draw_outcome(p_targets[j], detail_sim::case1_latency_rate(z),
                                 detail_sim::case1_censor_rate(z), g, o.time, o.status, stats);
    }
    return s;
}

// Case 1, nominal Z with labels {b1, b2, b3}. The labels carry no order; the
// latency and incidence use the same numeric anchors as the discrete case,
// and the censoring is exponential with a fixed per-level rate.
inline sample gen_case1_nominal(const std::array<double, 3>& p_targets,
                                const std::array<double, 3>& mass, int n, rng& g,
                                scenario_stats* stats = nullptr) {
    std::array<double, 3> anchors{};
    for (std::size_t j = 0; j < 3; ++j) anchors[j] = case1_anchor(p_targets[j]);
    sample s;
    s.spec.entries.push_back(
        {"z", covariate_kind::nominal, covariate_role::z_block, {"b1", "b2", "b3"}});
    s.observations.resize(static_cast<std::size_t>(n));
    for (auto& o : s.observations) {
        std::size_t j = detail_sim::draw_level(mass, g.next_double());
        o.covariates = {s.spec.entries[0].labels[j]};
        detail_sim::draw_outcome(p_targets[j], detail_sim::case1_latency_rate(anchors[j]),
                                 scenario_constants::nominal_censor_rates[j], g, o.time, o.status,
                                 stats);
    }
    return s;
}

enum class case2_kind { continuous, discrete };

namespace scenario_constants {
constexpr std::array<double, 3> case2_x_levels = {-2.4622, -0.19702, 1.0371};
constexpr std::array<double, 3> case2_z_levels_h0 = {0.6157, 0.6157, 0.6157};
constexpr std::array<double, 3> case2_z_levels_h1 = {-13.123, 0.0, 4.9454};
}  // namespace scenario_constants

// Case 2: bivariate (X, Z), continuous N(0, sd=5) or discrete on the fixed
// level sets.
inline sample gen_case2(bool h1, case2_kind kind, const std::array<double, 3>& mass_x,
                        const std::array<double, 3>& mass_z, int n, rng& g,
                        scenario_stats* stats = nullptr) {
    using namespace scenario_constants;
    sample s;
    covariate_kind ck =
        kind == case2_kind::continuous ? covariate_kind::continuous : covariate_kind::discrete;
    s.spec.entries.push_back({"x", ck, covariate_role::x_block, {}});
    s.spec.entries.push_back({"z", ck, covariate_role::z_block, {}});
    s.observations.resize(static_cast<std::size_t>(n));
    for (auto& o : s.observations) {
        double x, z, p_uncure;
        if (kind == case2_kind::continuous) {
            x = 5.0 * g.normal();
            z = 5.0 * g.normal();
            p_uncure = case2_incidence(x, z, h1 ? beta2_h1 : 0.0);
        } else {
            x = case2_x_levels[detail_sim::draw_level(mass_x, g.next_double())];
            z = (h1 ? case2_z_levels_h1 : case2_z_levels_h0)[detail_sim::draw_level(
                mass_z, g.next_double())];
            p_uncure = case2_discrete_incidence(h1, x, z);
        }
        o.covariates = {x, z};
        detail_sim::draw_outcome(p_uncure, detail_sim::case2_latency_rate(h1, x, z),
                                 detail_sim::case2_censor_rate(x, z), g, o.time, o.status, stats);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Monte Carlo driver

struct scenario {
    std::string name;
    test_case tcase = test_case::case1;
    std::function<sample(int, rng&, scenario_stats*)> generate;
    // Statistic bandwidth grid h = C n^(-1/(3 m)) for a continuous X block;
    // empty when the statistic needs no bandwidth.
    std::vector<double> test_grid_C;
    int z_dim = 1;
};

struct rejection_cell {
    std::string scenario;
    int n = 0;
    double test_C = 0.0;  // 0 when the statistic has no bandwidth
    double cm_rate = 0.0;
    double k_rate = 0.0;
    int kappa_effective = 0;
};

struct rejection_table {
    std::vector<rejection_cell> cells;
    int kappa = 0;
    int B = 0;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    double runtime_seconds = 0.0;
};

using mc_progress = std::function<void(const std::string& scenario, int n, int done, int total)>;

struct mc_config {
    int kappa = 200;
    int B = 500;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    int workers = 1;
    std::optional<bandwidth_grid> estimator_grid;
    mc_progress progress;
};

// Rejection frequencies over kappa independent trials per (scenario, n).
// Trials are keyed by (seed, scenario name, n, trial index), so the table is
// a pure function of the configuration and seed for any worker count.
inline rejection_table run_monte_carlo(const std::vector<scenario>& scenarios,
                                       const std::vector<int>& ns, const mc_config& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    rejection_table table;
    table.kappa = cfg.kappa;
    table.B = cfg.B;
    table.alpha = cfg.alpha;
    table.seed = cfg.seed;

    std::mutex progress_mutex;
    for (const scenario& sc : scenarios) {
        std::uint64_t sid = hash_name(sc.name.c_str());
        for (int n : ns) {
            std::vector<std::optional<double>> h_list;
            if (sc.test_grid_C.empty()) {
                h_list.push_back(std::nullopt);
            } else {
                for (double c : sc.test_grid_C)
                    h_list.push_back(c * std::pow(static_cast<double>(n),
                                                  -1.0 / (3.0 * sc.z_dim)));
            }
            const std::size_t n_h = h_list.size();
            const std::size_t kappa = static_cast<std::size_t>(cfg.kappa);
            std::vector<char> ok(kappa, 0);
            std::vector<std::vector<char>> cm_rej(kappa), k_rej(kappa);
            std::atomic<int> done{0};

            parallel_for(kappa, cfg.workers, [&](std::size_t t) {
                rng g = make_stream(cfg.seed, {sid, static_cast<std::uint64_t>(n), t});
                sample s = sc.generate(n, g, nullptr);
                engine_config ec;
                ec.B = cfg.B;
                ec.alpha = cfg.alpha;
                ec.seed = derive_seed(cfg.seed,
                                      {sid, static_cast<std::uint64_t>(n), t, hash_name("engine")});
                ec.workers = 1;
                ec.estimator_grid = cfg.estimator_grid;
                try {
                    std::vector<test_result> rs = run_test_multi(s, sc.tcase, ec, h_list);
                    cm_rej[t].resize(n_h);
                    k_rej[t].resize(n_h);
                    for (std::size_t hi = 0; hi < n_h; ++hi) {
                        cm_rej[t][hi] = rs[hi].reject_cm() ? 1 : 0;
                        k_rej[t][hi] = rs[hi].reject_k() ? 1 : 0;
                    }
                    ok[t] = 1;
                } catch (const estimation_error&) {
                    ok[t] = 0;  // dropped; the cell reports effective kappa
                }
                if (cfg.progress) {
                    std::lock_guard<std::mutex> lock(progress_mutex);
                    cfg.progress(sc.name, n, ++done, static_cast<int>(kappa));
                }
            });

            for (std::size_t hi = 0; hi < n_h; ++hi) {
                rejection_cell cell;
                cell.scenario = sc.name;
                if (!sc.test_grid_C.empty()) {
                    cell.test_C = sc.test_grid_C[hi];
                    cell.scenario += ":C" + std::to_string(static_cast<int>(sc.test_grid_C[hi]));
                }
                cell.n = n;
                long long cm_total = 0, k_total = 0, eff = 0;
                for (std::size_t t = 0; t < kappa; ++t) {
                    if (!ok[t]) continue;
                    ++eff;
                    cm_total += cm_rej[t][hi];
                    k_total += k_rej[t][hi];
                }
                cell.kappa_effective = static_cast<int>(eff);
                cell.cm_rate = eff ? static_cast<double>(cm_total) / static_cast<double>(eff) : 0.0;
                cell.k_rate = eff ? static_cast<double>(k_total) / static_cast<double>(eff) : 0.0;
                table.cells.push_back(std::move(cell));
            }
        }
    }
    table.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return table;
}

// ---------------------------------------------------------------------------
// Named scenario registry (CLI surface)

namespace detail_sim {

inline scenario make_case1_continuous(const std::string& name, case1_hypothesis hyp, double p0) {
    return {name, test_case::case1,
            [hyp, p0](int n, rng& g, scenario_stats* st) {
                return gen_case1_continuous(hyp, p0, n, g, st);
            },
            {}, 1};
}

inline scenario make_case1_threelevel(const std::string& name, bool nominal,
                                      const std::array<double, 3>& targets,
                                      const std::array<double, 3>& mass) {
    return {name, test_case::case1,
            [nominal, targets, mass](int n, rng& g, scenario_stats* st) {
                return nominal ? gen_case1_nominal(targets, mass, n, g, st)
                               : gen_case1_discrete(targets, mass, n, g, st);
            },
            {}, 1};
}

inline scenario make_case2(const std::string& name, bool h1, case2_kind kind,
                           const std::array<double, 3>& mass) {
    scenario sc{name, test_case::case2,
                [h1, kind, mass](int n, rng& g, scenario_stats* st) {
                    return gen_case2(h1, kind, mass, mass, n, g, st);
                },
                {}, 1};
    if (kind == case2_kind::continuous) sc.test_grid_C = {10, 20, 30, 40, 45, 50, 60};
    return sc;
}

}  // namespace detail_sim

// Expands a scenario (or scenario-group) name. Group names: "table1",
// "table2", "table3", "table5-continuous" (alias "table5c"), and
// "table5-discrete" (aliases "table5d", "table4-discrete").
inline std::vector<scenario> scenarios_by_name(const std::string& name) {
    using detail_sim::make_case1_continuous;
    using detail_sim::make_case1_threelevel;
    using detail_sim::make_case2;
    constexpr std::array<double, 3> equal = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    constexpr std::array<double, 3> skew = {0.2, 0.2, 0.6};

    auto table1 = [&]() -> std::vector<scenario> {
        return {make_case1_continuous("table1-p05", case1_hypothesis::h0, 0.5),
                make_case1_continuous("table1-p06", case1_hypothesis::h0, 0.6),
                make_case1_continuous("table1-p07", case1_hypothesis::h0, 0.7),
                make_case1_continuous("table1-p08", case1_hypothesis::h0, 0.8),
                make_case1_continuous("table1-nocure", case1_hypothesis::no_cure, 1.0),
                make_case1_continuous("table1-h1", case1_hypothesis::h1, 0.0)};
    };
    auto threelevel = [&](const std::string& prefix, bool nominal) -> std::vector<scenario> {
        std::vector<scenario> out;
        for (double p : {0.5, 0.6, 0.7, 0.8})
            out.push_back(make_case1_threelevel(
                prefix + "-p0" + std::to_string(static_cast<int>(p * 10)), nominal, {p, p, p},
                equal));
        out.push_back(make_case1_threelevel(prefix + "-nocure", nominal, {1.0, 1.0, 1.0}, equal));
        out.push_back(
            make_case1_threelevel(prefix + "-h1a-equal", nominal, {0.3, 0.5, 0.7}, equal));
        out.push_back(make_case1_threelevel(prefix + "-h1a-skew", nominal, {0.3, 0.5, 0.7}, skew));
        out.push_back(
            make_case1_threelevel(prefix + "-h1b-equal", nominal, {0.1, 0.5, 0.9}, equal));
        out.push_back(make_case1_threelevel(prefix + "-h1b-skew", nominal, {0.1, 0.5, 0.9}, skew));
        return out;
    };
    auto table5c = [&]() -> std::vector<scenario> {
        return {make_case2("table5c-h0", false, case2_kind::continuous, equal),
                make_case2("table5c-h1", true, case2_kind::continuous, equal)};
    };
    auto table5d = [&]() -> std::vector<scenario> {
        return {make_case2("table5d-h0-equal", false, case2_kind::discrete, equal),
                make_case2("table5d-h0-skew", false, case2_kind::discrete, skew),
                make_case2("table5d-h1-equal", true, case2_kind::discrete, equal),
                make_case2("table5d-h1-skew", true, case2_kind::discrete, skew)};
    };

    if (name == "table1") return table1();
    if (name == "table2") return threelevel("table2", false);
    if (name == "table3") return threelevel("table3", true);
    if (name == "table5-continuous" || name == "table5c") return table5c();
    if (name == "table5-discrete" || name == "table5d" || name == "table4-discrete")
        return table5d();

    // Individual scenario lookup inside every group.
    std::vector<scenario> all;
    for (auto& sc : table1()) all.push_back(std::move(sc));
    for (auto& sc : threelevel("table2", false)) all.push_back(std::move(sc));
    for (auto& sc : threelevel("table3", true)) all.push_back(std::move(sc));
    for (auto& sc : table5c()) all.push_back(std::move(sc));
    for (auto& sc : table5d()) all.push_back(std::move(sc));
    for (auto& sc : all)
        if (sc.name == name) return {std::move(sc)};
    throw std::invalid_argument("unknown scenario name: " + name);
}

}  // namespace curetest
