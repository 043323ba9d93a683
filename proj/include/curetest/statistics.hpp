// Marked empirical processes for the cure-rate covariate tests, their
// Cramer-von Mises / Kolmogorov-Smirnov functionals, and the enumeration of
// level orderings for nominal covariates.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <vector>

#include "curetest/errors.hpp"
#include "curetest/kernel.hpp"

namespace curetest {

// U_n evaluated at the n sample covariate tuples.
struct process_values {
    std::size_t n = 0;
    std::size_t dim = 0;
    std::vector<double> eval_points;  // n x dim, row-major
    std::vector<double> u;
};

struct stat_pair {
    double cm = 0.0;  // sum_i U_n(W_i)^2
    double k = 0.0;   // max_i |sqrt(n) U_n(W_i)|
};

inline stat_pair stats_of(const process_values& p) {
    stat_pair out;
    double root_n = std::sqrt(static_cast<double>(p.n));
    for (double ui : p.u) {
        out.cm += ui * ui;
        out.k = std::max(out.k, root_n * std::abs(ui));
    }
    return out;
}

// Case 1: U_n(z0) = (1/n) sum_i (eta_i - eta_bar) I(Z_i <= z0), evaluated at
// each sample Z_i. Depends on Z only through its ordering.
inline process_values u_case1(const std::vector<double>& eta, const std::vector<double>& z) {
    const std::size_t n = eta.size();
    if (z.size() != n) throw std::invalid_argument("u_case1: length mismatch");
    double mean = std::accumulate(eta.begin(), eta.end(), 0.0) / static_cast<double>(n);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return z[a] < z[b]; });

    process_values p;
    p.n = n;
    p.dim = 1;
    p.eval_points = z;
    p.u.resize(n);
    // Prefix sums over the Z-order; ties share the value at the group end.
    double acc = 0.0;
    std::size_t g = 0;
    while (g < n) {
        std::size_t e = g;
        while (e < n && z[order[e]] == z[order[g]]) {
            acc += eta[order[e]] - mean;
            ++e;
        }
        double u = acc / static_cast<double>(n);
        for (std::size_t k = g; k < e; ++k) p.u[order[k]] = u;
        g = e;
    }
    return p;
}

// General case: U_n(w0) = (1/n) sum_i f_X(X_i) (eta_i - m(X_i)) I(W_i <= w0)
// with the density and regression function built from a q-fold product
// kernel at a common bandwidth.
inline process_values u_case3(const std::vector<double>& eta,
                              const std::vector<std::vector<double>>& x_cols,
                              const std::vector<std::vector<double>>& z_cols, double h) {
    const std::size_t n = eta.size();
    const std::size_t q = x_cols.size();
    if (q == 0) throw std::invalid_argument("u_case3: empty conditioning block");
    if (!(h > 0.0)) throw missing_bandwidth();

    // Residual weights r_i = f_hat(X_i) (eta_i - m_hat(X_i)).
    std::vector<double> r(n);
    double fnorm = static_cast<double>(n) * std::pow(h, static_cast<double>(q));
    for (std::size_t i = 0; i < n; ++i) {
        double s0 = 0.0, s1 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double kw = 1.0;
            for (std::size_t c = 0; c < q && kw > 0.0; ++c)
                kw *= epanechnikov((x_cols[c][i] - x_cols[c][j]) / h);
            s0 += kw;
            s1 += kw * eta[j];
        }
        double f = s0 / fnorm;
        double m = s1 / s0;  // s0 >= K(0) > 0 from the self term
        r[i] = f * (eta[i] - m);
    }

    const std::size_t m = z_cols.size();
    process_values p;
    p.n = n;
    p.dim = q + m;
    p.eval_points.resize(n * p.dim);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < q; ++c) p.eval_points[i * p.dim + c] = x_cols[c][i];
        for (std::size_t c = 0; c < m; ++c) p.eval_points[i * p.dim + q + c] = z_cols[c][i];
    }
    p.u.assign(n, 0.0);
    for (std::size_t e = 0; e < n; ++e) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            bool inside = true;
            for (std::size_t c = 0; c < q && inside; ++c) inside = x_cols[c][i] <= x_cols[c][e];
            for (std::size_t c = 0; c < m && inside; ++c) inside = z_cols[c][i] <= z_cols[c][e];
            if (inside) acc += r[i];
        }
        p.u[e] = acc / static_cast<double>(n);
    }
    return p;
}

// Case 2: univariate conditioning covariate X. Continuous X uses the kernel
// density and Nadaraya-Watson regression at one shared bandwidth; discrete or
// nominal X uses relative frequencies and level means, with no smoothing
// parameter.
inline process_values u_case2(const std::vector<double>& eta, const std::vector<double>& x,
                              bool x_continuous, const std::vector<std::vector<double>>& z_cols,
                              std::optional<double> h) {
    const std::size_t n = eta.size();
    if (x_continuous) {
        if (!h) throw missing_bandwidth();
        return u_case3(eta, {x}, z_cols, *h);
    }
    if (h) throw unexpected_bandwidth();

    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
        double cnt = 0.0, sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (x[j] == x[i]) {
                cnt += 1.0;
                sum += eta[j];
            }
        }
        double pi = cnt / static_cast<double>(n);
        double m = sum / cnt;
        r[i] = pi * (eta[i] - m);
    }

    const std::size_t m = z_cols.size();
    process_values p;
    p.n = n;
    p.dim = 1 + m;
    p.eval_points.resize(n * p.dim);
    for (std::size_t i = 0; i < n; ++i) {
        p.eval_points[i * p.dim] = x[i];
        for (std::size_t c = 0; c < m; ++c) p.eval_points[i * p.dim + 1 + c] = z_cols[c][i];
    }
    p.u.assign(n, 0.0);
    for (std::size_t e = 0; e < n; ++e) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            bool inside = x[i] <= x[e];
            for (std::size_t c = 0; c < m && inside; ++c) inside = z_cols[c][i] <= z_cols[c][e];
            if (inside) acc += r[i];
        }
        p.u[e] = acc / static_cast<double>(n);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Nominal covariates: enumeration of level orderings

// Column set for a test statistic. Nominal columns hold level indices
// 0..levels-1 and are enumerated over all orderings of their level set;
// ordered columns are used as-is.
struct test_columns {
    struct column {
        std::vector<double> v;
        bool nominal = false;
        bool continuous = false;
        std::size_t levels = 0;
    };
    std::vector<column> x;
    std::vector<column> z;
};

namespace detail {

constexpr std::size_t ordering_cap = 5040;  // 7!

inline std::vector<std::vector<std::size_t>> level_orderings(std::size_t k) {
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::vector<std::vector<std::size_t>> all;
    do {
        all.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return all;
}

}  // namespace detail

struct ordering_stat {
    stat_pair stats;
    std::size_t orderings = 1;  // total orderings enumerated
};

// Computes the case statistic, replacing every nominal column by the rank
// relabeling 1..k induced by each ordering of its level set, and takes the
// component-wise maxima of (CM, K) over all orderings. The enumeration is the
// identity when no column is nominal.
inline ordering_stat max_stat_over_orderings(const std::vector<double>& eta,
                                             const test_columns& tc, int case_id,
                                             std::optional<double> h) {
    // Gather nominal columns (in X or Z).
    std::vector<const test_columns::column*> nominal;
    for (const auto& c : tc.x)
        if (c.nominal) nominal.push_back(&c);
    for (const auto& c : tc.z)
        if (c.nominal) nominal.push_back(&c);

    std::size_t total = 1;
    std::vector<std::vector<std::vector<std::size_t>>> perms;
    for (const auto* c : nominal) {
        if (c->levels > 7) throw too_many_levels(c->levels);
        perms.push_back(detail::level_orderings(c->levels));
        total *= perms.back().size();
        if (total > detail::ordering_cap) throw too_many_levels(total);
    }

    // Working copies with nominal values rewritten per assignment.
    std::vector<std::vector<double>> x_vals, z_vals;
    for (const auto& c : tc.x) x_vals.push_back(c.v);
    for (const auto& c : tc.z) z_vals.push_back(c.v);

    auto relabel = [](const test_columns::column& col, const std::vector<std::size_t>& perm,
                      std::vector<double>& out) {
        std::vector<double> rank(perm.size());
        for (std::size_t r = 0; r < perm.size(); ++r) rank[perm[r]] = static_cast<double>(r + 1);
        for (std::size_t i = 0; i < col.v.size(); ++i)
            out[i] = rank[static_cast<std::size_t>(col.v[i])];
    };

    auto evaluate = [&]() -> stat_pair {
        process_values p;
        switch (case_id) {
            case 1:
                p = u_case1(eta, z_vals.at(0));
                break;
            case 2:
                p = u_case2(eta, x_vals.at(0), tc.x.at(0).continuous, z_vals, h);
                break;
            case 3:
                p = u_case3(eta, x_vals, z_vals, h.value_or(0.0));
                break;
            default:
                throw std::invalid_argument("unknown test case");
        }
        return stats_of(p);
    };

    ordering_stat out;
    out.orderings = total;
    if (nominal.empty()) {
        out.stats = evaluate();
        return out;
    }

    std::vector<std::size_t> odo(nominal.size(), 0);
    bool first = true;
    while (true) {
        // Apply the current assignment of orderings.
        std::size_t nom_idx = 0;
        for (std::size_t c = 0; c < tc.x.size(); ++c) {
            if (!tc.x[c].nominal) continue;
            relabel(tc.x[c], perms[nom_idx][odo[nom_idx]], x_vals[c]);
            ++nom_idx;
        }
        for (std::size_t c = 0; c < tc.z.size(); ++c) {
            if (!tc.z[c].nominal) continue;
            relabel(tc.z[c], perms[nom_idx][odo[nom_idx]], z_vals[c]);
            ++nom_idx;
        }

        stat_pair sp = evaluate();
        if (first) {
            out.stats = sp;
            first = false;
        } else {
            out.stats.cm = std::max(out.stats.cm, sp.cm);
            out.stats.k = std::max(out.stats.k, sp.k);
        }

        // Advance the odometer.
        std::size_t pos = 0;
        while (pos < odo.size()) {
            if (++odo[pos] < perms[pos].size()) break;
            odo[pos] = 0;
            ++pos;
        }
        if (pos == odo.size()) break;
    }
    return out;
}

// Case-1 statistic for a single nominal covariate with k levels: the maxima
// of CM and K over the k! orderings of the level set.
inline stat_pair nominal_stat(const std::vector<double>& eta, const std::vector<double>& level_ids,
                              std::size_t k) {
    test_columns tc;
    tc.z.push_back({level_ids, true, false, k});
    return max_stat_over_orderings(eta, tc, 1, std::nullopt).stats;
}

}  // namespace curetest
