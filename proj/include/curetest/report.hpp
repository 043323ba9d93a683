// Report serialization: stable-schema JSON documents and the CSV table
// format. Field sets are fixed per command; absent values serialize as null.
#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "curetest/bootstrap.hpp"
#include "curetest/followup.hpp"
#include "curetest/simulation.hpp"
#include "curetest/step_curve.hpp"

namespace curetest {

using ordered_json = nlohmann::ordered_json;

inline ordered_json to_json(const bandwidth_record& bw) {
    ordered_json j;
    j["h_censoring"] = bw.h_censoring ? ordered_json(*bw.h_censoring) : ordered_json(nullptr);
    j["h_survival"] = bw.h_survival ? ordered_json(*bw.h_survival) : ordered_json(nullptr);
    j["h_cure"] = bw.h_cure ? ordered_json(*bw.h_cure) : ordered_json(nullptr);
    j["h_test"] = bw.h_test ? ordered_json(*bw.h_test) : ordered_json(nullptr);
    j["grid_rule"] = bw.grid_rule;
    return j;
}

inline ordered_json to_json(const test_result& r) {
    ordered_json j;
    j["cm_obs"] = r.cm_obs;
    j["k_obs"] = r.k_obs;
    j["cm_crit"] = r.cm_crit;
    j["k_crit"] = r.k_crit;
    j["p_cm"] = r.p_cm;
    j["p_k"] = r.p_k;
    j["reject_cm"] = r.reject_cm();
    j["reject_k"] = r.reject_k();
    j["B"] = r.B;
    j["alpha"] = r.alpha;
    j["seed"] = r.seed;
    j["bandwidths"] = to_json(r.bandwidths);
    j["diagnostics"] = ordered_json{{"cap_events_observed", r.diagnostics.cap_events_observed},
                                    {"cap_events_bootstrap", r.diagnostics.cap_events_bootstrap},
                                    {"orderings", r.diagnostics.orderings},
                                    {"requested_B", r.diagnostics.requested_B},
                                    {"effective_B", r.diagnostics.effective_B},
                                    {"failed_resamples", r.diagnostics.failed_resamples}};
    return j;
}

inline ordered_json to_json(const followup_result& r) {
    ordered_json j;
    j["t_max"] = r.t_max;
    j["t1_max"] = r.t1_max;
    j["n_tail"] = r.n_tail;
    j["p_value"] = r.p_value;
    return j;
}

inline ordered_json to_json(const rejection_table& t) {
    ordered_json j;
    j["kappa"] = t.kappa;
    j["B"] = t.B;
    j["alpha"] = t.alpha;
    j["seed"] = t.seed;
    j["runtime_seconds"] = t.runtime_seconds;
    ordered_json cells = ordered_json::array();
    for (const rejection_cell& c : t.cells) {
        ordered_json jc;
        jc["scenario"] = c.scenario;
        jc["n"] = c.n;
        jc["test_C"] = c.test_C;
        jc["cm_rate"] = c.cm_rate;
        jc["k_rate"] = c.k_rate;
        jc["kappa_effective"] = c.kappa_effective;
        cells.push_back(std::move(jc));
    }
    j["cells"] = std::move(cells);
    return j;
}

namespace detail_report {

// Shortest representation that round-trips the exact double.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace detail_report

// CSV layout: one row per (n, scenario, statistic).
inline std::string rejection_table_csv(const rejection_table& t) {
    std::ostringstream os;
    os << "n,scenario,stat,rejection_rate,kappa_effective\n";
    for (const rejection_cell& c : t.cells) {
        os << c.n << "," << c.scenario << ",CM," << detail_report::format_double(c.cm_rate) << ","
           << c.kappa_effective << "\n";
        os << c.n << "," << c.scenario << ",K," << detail_report::format_double(c.k_rate) << ","
           << c.kappa_effective << "\n";
    }
    return os.str();
}

inline std::string curve_csv(const std::string& x_name, const std::string& y_name,
                             const std::vector<double>& x, const std::vector<double>& y) {
    std::ostringstream os;
    os << x_name << "," << y_name << "\n";
    for (std::size_t i = 0; i < x.size(); ++i)
        os << detail_report::format_double(x[i]) << "," << detail_report::format_double(y[i])
           << "\n";
    return os.str();
}

inline std::string step_curve_csv(const step_curve& c) {
    return curve_csv("t", "survival", c.jump_times(), c.values());
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write output file: " + path);
    out << content;
}

}  // namespace curetest
