// CSV ingestion: comma-separated, "." decimal, UTF-8, header row required.
// Status coding: 1 = event observed, 0 = censored.
#pragma once

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "curetest/core.hpp"

namespace curetest {

struct covariate_declaration {
    std::string name;
    covariate_kind kind = covariate_kind::continuous;
    covariate_role role = covariate_role::z_block;
    std::vector<std::string> labels;  // nominal: declared level set; inferred when empty
};

struct csv_load_result {
    sample data;
    std::vector<std::string> warnings;
};

namespace detail_csv {

inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline double parse_double(const std::string& cell, std::size_t row, const std::string& col) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(begin, &end);
    if (cell.empty() || end != begin + cell.size() || errno == ERANGE)
        throw std::runtime_error("row " + std::to_string(row) + ", column '" + col +
                                 "': cannot parse '" + cell + "' as a number");
    return v;
}

}  // namespace detail_csv

// Loads a sample from a CSV file. Columns "time" and "status" are required;
// the declared columns become covariates with the declared kinds and roles;
// any other column is ignored with a warning.
inline csv_load_result load_csv(const std::string& path,
                                const std::vector<covariate_declaration>& decls) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file: " + path);

    std::string line;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        rows.push_back(detail_csv::split_fields(line));
    }
    if (rows.empty()) throw std::runtime_error("empty input file: " + path);

    const std::vector<std::string>& header = rows.front();
    auto column_of = [&header](const std::string& name) -> std::ptrdiff_t {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (header[j] == name) return static_cast<std::ptrdiff_t>(j);
        return -1;
    };

    std::ptrdiff_t time_col = column_of("time");
    std::ptrdiff_t status_col = column_of("status");
    if (time_col < 0) throw std::runtime_error("missing required column 'time'");
    if (status_col < 0) throw std::runtime_error("missing required column 'status'");

    csv_load_result out;
    std::vector<std::ptrdiff_t> decl_cols;
    for (const covariate_declaration& d : decls) {
        std::ptrdiff_t c = column_of(d.name);
        if (c < 0) throw std::runtime_error("missing declared column '" + d.name + "'");
        decl_cols.push_back(c);
        out.data.spec.entries.push_back({d.name, d.kind, d.role, d.labels});
    }
    for (std::size_t j = 0; j < header.size(); ++j) {
        bool used = j == static_cast<std::size_t>(time_col) ||
                    j == static_cast<std::size_t>(status_col);
        for (std::ptrdiff_t c : decl_cols)
            if (static_cast<std::size_t>(c) == j) used = true;
        if (!used) out.warnings.push_back("ignoring undeclared column '" + header[j] + "'");
    }

    // Data rows are 1-based in diagnostics (the header is not counted).
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const std::vector<std::string>& fields = rows[r];
        if (fields.size() != header.size())
            throw std::runtime_error("row " + std::to_string(r) + ": expected " +
                                     std::to_string(header.size()) + " fields, got " +
                                     std::to_string(fields.size()));
        observation o;
        o.time = detail_csv::parse_double(fields[static_cast<std::size_t>(time_col)], r, "time");
        const std::string& st = fields[static_cast<std::size_t>(status_col)];
        if (st == "0")
            o.status = 0;
        else if (st == "1")
            o.status = 1;
        else
            throw std::runtime_error("row " + std::to_string(r) +
                                     ", column 'status': expected 0 or 1, got '" + st + "'");
        for (std::size_t d = 0; d < decls.size(); ++d) {
            const std::string& cell = fields[static_cast<std::size_t>(decl_cols[d])];
            if (decls[d].kind == covariate_kind::nominal)
                o.covariates.emplace_back(cell);
            else
                o.covariates.emplace_back(detail_csv::parse_double(cell, r, decls[d].name));
        }
        out.data.observations.push_back(std::move(o));
    }

    // Infer nominal level sets not declared explicitly (sorted for stability).
    for (std::size_t d = 0; d < decls.size(); ++d) {
        covariate_entry& e = out.data.spec.entries[d];
        if (e.kind != covariate_kind::nominal || !e.labels.empty()) continue;
        std::vector<std::string> seen;
        for (const observation& o : out.data.observations) {
            std::string v = trim(std::get<std::string>(o.covariates[d]));
            bool known = false;
            for (const std::string& s : seen)
                if (s == v) known = true;
            if (!known) seen.push_back(v);
        }
        std::sort(seen.begin(), seen.end());
        e.labels = std::move(seen);
    }

    // Validate nominal labels against declared sets.
    for (std::size_t r = 0; r < out.data.observations.size(); ++r) {
        const observation& o = out.data.observations[r];
        for (std::size_t d = 0; d < decls.size(); ++d) {
            const covariate_entry& e = out.data.spec.entries[d];
            if (e.kind != covariate_kind::nominal) continue;
            if (!e.label_index(std::get<std::string>(o.covariates[d])))
                throw std::runtime_error(
                    "row " + std::to_string(r + 1) + ", column '" + e.name + "': label '" +
                    std::get<std::string>(o.covariates[d]) + "' not in the declared set");
        }
    }
    return out;
}

}  // namespace curetest
