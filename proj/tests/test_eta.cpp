#include <catch2/catch_amalgamated.hpp>

#include "curetest/bandwidth.hpp"
#include "curetest/eta.hpp"
#include "curetest/rng.hpp"
#include "curetest/simulation.hpp"

using namespace curetest;
using Catch::Approx;

namespace {

sample with_z(std::vector<double> t, std::vector<int> d, std::vector<double> z) {
    sample s;
    s.spec.entries.push_back({"z", covariate_kind::continuous, covariate_role::z_block, {}});
    for (std::size_t i = 0; i < t.size(); ++i) s.observations.push_back({t[i], d[i], {z[i]}});
    return s;
}

}  // namespace

TEST_CASE("estimate_tau returns the largest uncensored time") {
    CHECK(estimate_tau(with_z({1, 5, 9}, {1, 1, 0}, {0, 0, 0})) == 5.0);
    CHECK(estimate_tau(with_z({1, 5, 9}, {1, 1, 1}, {0, 0, 0})) == 9.0);
    CHECK_THROWS_AS(estimate_tau(with_z({1, 5}, {0, 0}, {0, 0})), no_events);
}

TEST_CASE("compute_eta branch structure") {
    // Rows: event; censored before tau; censored at tau; censored after tau.
    sample s = with_z({2, 1, 3, 4}, {1, 0, 0, 0}, {0, 0, 0, 0});
    double tau = 3.0;
    std::vector<double> g_at_tau = {0.1, 0.2, 0.3, 0.5};
    eta_vector eta = compute_eta(s, g_at_tau, tau);
    CHECK(eta.values[0] == 0.0);                       // event
    CHECK(eta.values[1] == 0.0);                       // censored, T <= tau
    CHECK(eta.values[2] == 0.0);                       // censored exactly at tau
    CHECK(eta.values[3] == Approx(2.0).margin(1e-15));  // 1 / (1 - 0.5)
    CHECK(eta.tau_hat == tau);
    CHECK(eta.g_at_tau == g_at_tau);
}

TEST_CASE("compute_eta reproduces exactly from precomputed g values") {
    rng g(9);
    std::vector<double> t, z, gv;
    std::vector<int> d;
    for (int i = 0; i < 40; ++i) {
        t.push_back(g.exponential(0.4));
        d.push_back(g.next_double() < 0.5 ? 1 : 0);
        z.push_back(g.uniform(-1, 1));
        gv.push_back(g.next_double() * 0.9);
    }
    sample s = with_z(t, d, z);
    double tau = estimate_tau(s);
    eta_vector a = compute_eta(s, gv, tau);
    eta_vector b = compute_eta(s, gv, tau);
    CHECK(a.values == b.values);
}

TEST_CASE("nonzero proxies are at least one") {
    rng g(10);
    std::vector<double> t, z, gv;
    std::vector<int> d;
    for (int i = 0; i < 60; ++i) {
        t.push_back(g.exponential(0.4));
        d.push_back(g.next_double() < 0.4 ? 1 : 0);
        z.push_back(g.uniform(-1, 1));
        gv.push_back(g.next_double());
    }
    sample s = with_z(t, d, z);
    eta_vector eta = compute_eta(s, gv, estimate_tau(s));
    for (double v : eta.values) {
        CHECK(v >= 0.0);
        if (v != 0.0) CHECK(v >= 1.0);
    }
}

TEST_CASE("saturation cap bounds the proxy at n and records the event") {
    sample s = with_z({1, 2, 3, 4}, {1, 0, 0, 0}, {0, 0, 0, 0});
    std::vector<double> g_at_tau = {0.0, 0.0, 0.999999999, 1.0};
    eta_vector eta = compute_eta(s, g_at_tau, 1.0);
    CHECK(eta.cap_events == 2);
    CHECK(eta.values[2] == Approx(4.0));  // capped at 1 - 1/n = 3/4
    CHECK(eta.values[3] == Approx(4.0));
    CHECK(eta.capped_rows == std::vector<std::size_t>{2, 3});
}

TEST_CASE("disabled cap raises g_saturated on saturated rows") {
    sample s = with_z({1, 2}, {1, 0}, {0, 0});
    eta_options opts;
    opts.cap_enabled = false;
    CHECK_THROWS_AS(compute_eta(s, {0.0, 1.0}, 1.0, opts), g_saturated);
    // Saturation on a zero branch row is irrelevant: no inversion happens.
    sample s2 = with_z({1, 2}, {1, 1}, {0, 0});
    CHECK_NOTHROW(compute_eta(s2, {1.0, 1.0}, 2.0, opts));
}

TEST_CASE("no-cure samples give all-zero proxies") {
    // tau equals the largest observation, so no row is censored beyond it.
    sample s = with_z({1, 2, 3, 4, 5}, {1, 0, 1, 0, 1}, {0, 0, 0, 0, 0});
    eta_vector eta = compute_eta(s, {0, 0, 0, 0, 0}, estimate_tau(s));
    CHECK(eta.mean() == 0.0);
}

TEST_CASE("mean proxy estimates the marginal cure rate", "[slow]") {
    // H0 scenario with p = 0.5 at n = 500: the median of mean(eta) over
    // replicates sits near the true cure rate 0.5.
    const int reps = 100;
    const int n = 500;
    std::vector<double> means;
    for (int r = 0; r < reps; ++r) {
        rng g = make_stream(424242, {static_cast<std::uint64_t>(r)});
        sample s = gen_case1_continuous(case1_hypothesis::h0, 0.5, n, g);
        bandwidth_grid grid = make_grid(4.0, 60.0, 10, 0.2, n);
        double h = cv_bandwidth(s, {0}, grid, cv_target::censoring);
        double tau = estimate_tau(s);
        numeric_view v = make_numeric_view(s);
        detail::pl_view pv = detail::make_pl_view(v.time, v.status, true);
        detail::pl_scratch ws;
        std::vector<double> w, g_at_tau(s.size());
        std::vector<column_smoothing> sm = {column_smoothing::kernel(h)};
        for (std::size_t i = 0; i < s.size(); ++i) {
            detail::product_weights(v, {0}, sm, {v.cols[0][i]}, w);
            g_at_tau[i] = 1.0 - detail::weighted_pl_value(pv, w, tau, ws);
        }
        means.push_back(compute_eta(s, g_at_tau, tau).mean());
    }
    std::sort(means.begin(), means.end());
    double median = 0.5 * (means[reps / 2 - 1] + means[reps / 2]);
    CHECK(median == Approx(0.5).margin(0.1));
}
