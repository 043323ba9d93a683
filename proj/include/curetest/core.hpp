// Data model for right-censored samples with mixed-type covariates.
//
// An observation holds the observed time T = min(Y, C), the event indicator
// delta = I(Y <= C) and the covariate tuple. The latent (Y, C, cure status)
// are never stored. All types are immutable in practice: the library treats
// samples as read-only and returns new objects.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "curetest/errors.hpp"

namespace curetest {

enum class covariate_kind { continuous, discrete, nominal };
enum class covariate_role { x_block, z_block };

// Numeric kinds (continuous, discrete-ordered) store a double; nominal kinds
// store a label compared by exact string equality after trimming.
using covariate_value = std::variant<double, std::string>;

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

struct covariate_entry {
    std::string name;
    covariate_kind kind = covariate_kind::continuous;
    covariate_role role = covariate_role::z_block;
    std::vector<std::string> labels;  // nominal only; the declared level set

    std::optional<std::size_t> label_index(const std::string& raw) const {
        std::string v = trim(raw);
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == v) return i;
        return std::nullopt;
    }
};

struct covariate_spec {
    std::vector<covariate_entry> entries;

    std::size_t arity() const { return entries.size(); }

    std::vector<std::size_t> columns(covariate_role role) const {
        std::vector<std::size_t> out;
        for (std::size_t j = 0; j < entries.size(); ++j)
            if (entries[j].role == role) out.push_back(j);
        return out;
    }
};

struct observation {
    double time = 0.0;
    int status = 0;  // 1 = event observed, 0 = censored
    std::vector<covariate_value> covariates;
};

struct sample {
    std::vector<observation> observations;
    covariate_spec spec;

    std::size_t size() const { return observations.size(); }

    std::vector<double> times() const {
        std::vector<double> t(size());
        for (std::size_t i = 0; i < size(); ++i) t[i] = observations[i].time;
        return t;
    }

    std::vector<int> statuses() const {
        std::vector<int> d(size());
        for (std::size_t i = 0; i < size(); ++i) d[i] = observations[i].status;
        return d;
    }

    // Column j as doubles. Nominal labels map to their index in the declared
    // level set, which keeps exact-match comparisons on doubles safe.
    std::vector<double> numeric_column(std::size_t j) const {
        const covariate_entry& e = spec.entries.at(j);
        std::vector<double> col(size());
        for (std::size_t i = 0; i < size(); ++i) {
            const covariate_value& v = observations[i].covariates.at(j);
            if (e.kind == covariate_kind::nominal) {
                auto idx = e.label_index(std::get<std::string>(v));
                if (!idx) throw std::invalid_argument("unknown nominal label in column " + e.name);
                col[i] = static_cast<double>(*idx);
            } else {
                col[i] = std::get<double>(v);
            }
        }
        return col;
    }
};

// ---------------------------------------------------------------------------
// Validation (report-style; callers decide whether to abort)

struct validation_issue {
    std::ptrdiff_t row;  // -1 for sample-level issues
    std::string field;
    std::string message;
};

struct validation_report {
    std::vector<validation_issue> issues;
    bool ok() const { return issues.empty(); }
};

inline validation_report validate(const sample& s) {
    validation_report rep;
    auto add = [&rep](std::ptrdiff_t row, std::string field, std::string msg) {
        rep.issues.push_back({row, std::move(field), std::move(msg)});
    };

    if (s.observations.empty()) add(-1, "observations", "sample is empty");

    // Spec-level checks.
    for (std::size_t j = 0; j < s.spec.entries.size(); ++j) {
        const covariate_entry& e = s.spec.entries[j];
        for (std::size_t k = j + 1; k < s.spec.entries.size(); ++k)
            if (s.spec.entries[k].name == e.name)
                add(-1, e.name, "duplicate covariate name");
        if (e.kind == covariate_kind::nominal && e.labels.empty())
            add(-1, e.name, "nominal covariate has no declared label set");
    }

    for (std::size_t i = 0; i < s.observations.size(); ++i) {
        const observation& o = s.observations[i];
        if (!(o.time >= 0.0) || !std::isfinite(o.time))
            add(static_cast<std::ptrdiff_t>(i), "time", "time must be finite and >= 0");
        if (o.status != 0 && o.status != 1)
            add(static_cast<std::ptrdiff_t>(i), "status", "status must be 0 or 1");
        if (o.covariates.size() != s.spec.arity()) {
            add(static_cast<std::ptrdiff_t>(i), "covariates",
                "expected " + std::to_string(s.spec.arity()) + " covariates, got " +
                    std::to_string(o.covariates.size()));
            continue;
        }
        for (std::size_t j = 0; j < o.covariates.size(); ++j) {
            const covariate_entry& e = s.spec.entries[j];
            const covariate_value& v = o.covariates[j];
            if (e.kind == covariate_kind::nominal) {
                if (!std::holds_alternative<std::string>(v)) {
                    add(static_cast<std::ptrdiff_t>(i), e.name, "expected a nominal label");
                } else if (!e.label_index(std::get<std::string>(v))) {
                    add(static_cast<std::ptrdiff_t>(i), e.name,
                        "label '" + std::get<std::string>(v) + "' not in the declared set");
                }
            } else {
                if (!std::holds_alternative<double>(v)) {
                    add(static_cast<std::ptrdiff_t>(i), e.name, "expected a numeric value");
                } else if (!std::isfinite(std::get<double>(v))) {
                    add(static_cast<std::ptrdiff_t>(i), e.name, "value must be finite");
                }
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Canonical ordering

// Ascending observed time; at ties, uncensored observations first (the
// product-limit convention). Stable, so already-sorted input is unchanged.
inline std::vector<std::size_t> canonical_permutation(const std::vector<double>& time,
                                                      const std::vector<int>& status) {
    std::vector<std::size_t> order(time.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (time[a] != time[b]) return time[a] < time[b];
        return status[a] > status[b];
    });
    return order;
}

inline sample canonical_order(const sample& s) {
    std::vector<std::size_t> order = canonical_permutation(s.times(), s.statuses());
    sample out;
    out.spec = s.spec;
    out.observations.reserve(s.size());
    for (std::size_t i : order) out.observations.push_back(s.observations[i]);
    return out;
}

}  // namespace curetest
