// Command-line surface: data ingestion, covariate tests for the cure rate,
// sufficient-follow-up testing, curve export, and simulation tables.
#include <cstdint>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "curetest/curetest.hpp"
#include "curetest/report.hpp"

namespace {

using namespace curetest;

struct kind_declaration {
    covariate_kind kind = covariate_kind::continuous;
    std::vector<std::string> labels;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(s);
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

// --kinds "age=continuous,stage=discrete,location=nominal:colon|rectum"
std::map<std::string, kind_declaration> parse_kinds(const std::string& arg) {
    std::map<std::string, kind_declaration> out;
    if (arg.empty()) return out;
    for (const std::string& item : split(arg, ',')) {
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("--kinds", "expected name=kind in '" + item + "'");
        std::string name = trim(item.substr(0, eq));
        std::string kind_str = trim(item.substr(eq + 1));
        kind_declaration d;
        auto colon = kind_str.find(':');
        std::string base = colon == std::string::npos ? kind_str : trim(kind_str.substr(0, colon));
        if (base == "continuous")
            d.kind = covariate_kind::continuous;
        else if (base == "discrete")
            d.kind = covariate_kind::discrete;
        else if (base == "nominal")
            d.kind = covariate_kind::nominal;
        else
            throw CLI::ValidationError("--kinds", "unknown kind '" + base + "'");
        if (colon != std::string::npos) {
            if (d.kind != covariate_kind::nominal)
                throw CLI::ValidationError("--kinds", "only nominal kinds take a label set");
            d.labels = split(kind_str.substr(colon + 1), '|');
        }
        out[name] = d;
    }
    return out;
}

std::vector<covariate_declaration> build_declarations(
    const std::vector<std::string>& x_cols, const std::vector<std::string>& z_cols,
    const std::map<std::string, kind_declaration>& kinds) {
    std::vector<covariate_declaration> decls;
    auto add = [&](const std::string& name, covariate_role role) {
        covariate_declaration d;
        d.name = name;
        d.role = role;
        auto it = kinds.find(name);
        if (it != kinds.end()) {
            d.kind = it->second.kind;
            d.labels = it->second.labels;
        }
        decls.push_back(std::move(d));
    };
    for (const std::string& c : x_cols) add(c, covariate_role::x_block);
    for (const std::string& c : z_cols) add(c, covariate_role::z_block);
    return decls;
}

std::uint64_t resolve_seed(std::int64_t seed_arg) {
    if (seed_arg >= 0) return static_cast<std::uint64_t>(seed_arg);
    std::random_device rd;
    std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    std::cout << "seed: " << s << " (generated; pass --seed to reproduce)\n";
    return s;
}

ordered_json covariates_json(const covariate_spec& spec) {
    ordered_json arr = ordered_json::array();
    for (const covariate_entry& e : spec.entries) {
        ordered_json j;
        j["name"] = e.name;
        j["kind"] = e.kind == covariate_kind::continuous
                        ? "continuous"
                        : (e.kind == covariate_kind::discrete ? "discrete" : "nominal");
        j["role"] = e.role == covariate_role::x_block ? "x" : "z";
        j["labels"] = e.labels;
        arr.push_back(std::move(j));
    }
    return arr;
}

int cmd_validate(const std::string& in, const std::vector<covariate_declaration>& decls) {
    csv_load_result loaded = load_csv(in, decls);
    for (const std::string& w : loaded.warnings) std::cerr << "warning: " << w << "\n";
    validation_report rep = validate(loaded.data);
    if (rep.ok()) {
        std::cout << "ok: " << loaded.data.size() << " observations, "
                  << loaded.data.spec.arity() << " covariates\n";
        return 0;
    }
    for (const validation_issue& v : rep.issues)
        std::cout << "row " << v.row << " [" << v.field << "]: " << v.message << "\n";
    return 2;
}

int cmd_test(const std::string& in, const std::vector<covariate_declaration>& decls, int case_id,
             engine_config cfg, const std::string& h_grid_arg, const std::vector<double>& test_h,
             const std::vector<double>& test_C, const std::string& out,
             const std::string& format) {
    csv_load_result loaded = load_csv(in, decls);
    for (const std::string& w : loaded.warnings) std::cerr << "warning: " << w << "\n";
    const sample& s = loaded.data;

    if (!h_grid_arg.empty()) {
        std::vector<std::string> parts = split(h_grid_arg, ',');
        if (parts.size() != 4)
            throw CLI::ValidationError("--h-grid", "expected dmin,dmax,count,rate");
        cfg.estimator_grid = make_grid(std::stod(parts[0]), std::stod(parts[1]),
                                       std::stoi(parts[2]), std::stod(parts[3]),
                                       static_cast<int>(s.size()));
    }

    test_case tcase = static_cast<test_case>(case_id);
    bool continuous_x = case_id != 1;
    for (std::size_t c : s.spec.columns(covariate_role::x_block))
        if (s.spec.entries[c].kind != covariate_kind::continuous) continuous_x = false;
    if (s.spec.columns(covariate_role::x_block).empty()) continuous_x = false;

    std::vector<std::optional<double>> h_list;
    if (!test_h.empty()) {
        for (double h : test_h) h_list.emplace_back(h);
    } else if (continuous_x) {
        // Default statistic-bandwidth grid h = C n^(-1/(3m)).
        std::vector<double> cs = test_C.empty()
                                     ? std::vector<double>{10, 20, 30, 40, 45, 50, 60}
                                     : test_C;
        double m = static_cast<double>(s.spec.columns(covariate_role::z_block).size());
        for (double c : cs)
            h_list.emplace_back(c * std::pow(static_cast<double>(s.size()), -1.0 / (3.0 * m)));
    } else {
        h_list.emplace_back(std::nullopt);
    }

    std::vector<test_result> results = run_test_multi(s, tcase, cfg, h_list);

    ordered_json j;
    j["command"] = "test";
    j["input"] = in;
    j["case"] = case_id;
    j["n"] = s.size();
    j["alpha"] = cfg.alpha;
    j["B"] = cfg.B;
    j["seed"] = cfg.seed;
    j["covariates"] = covariates_json(s.spec);
    j["warnings"] = loaded.warnings;
    ordered_json arr = ordered_json::array();
    ordered_json summary = ordered_json::array();
    for (const test_result& r : results) {
        arr.push_back(to_json(r));
        std::ostringstream cm, k;
        cm << "CM";
        if (r.bandwidths.h_test) cm << " (h=" << *r.bandwidths.h_test << ")";
        cm << ": statistic=" << r.cm_obs << ", critical(" << cfg.alpha << ")=" << r.cm_crit
           << ", p_CM=" << r.p_cm;
        k << "K";
        if (r.bandwidths.h_test) k << " (h=" << *r.bandwidths.h_test << ")";
        k << ": statistic=" << r.k_obs << ", critical(" << cfg.alpha << ")=" << r.k_crit
          << ", p_K=" << r.p_k;
        summary.push_back(cm.str());
        summary.push_back(k.str());
        std::cout << cm.str() << "\n" << k.str() << "\n";
    }
    j["results"] = std::move(arr);
    j["summary"] = std::move(summary);
    (void)format;
    if (!out.empty()) write_file(out, j.dump(2) + "\n");
    return 0;
}

int cmd_followup(const std::string& in, const std::vector<covariate_declaration>& decls,
                 const std::string& out) {
    csv_load_result loaded = load_csv(in, decls);
    followup_result r;
    try {
        r = maller_zhou(loaded.data);
    } catch (const no_events&) {
        std::cerr << "error: no uncensored observation; follow-up test undefined\n";
        return 2;
    }
    ordered_json j;
    j["command"] = "followup";
    j["input"] = in;
    j["n"] = loaded.data.size();
    ordered_json body = to_json(r);
    for (auto& [key, value] : body.items()) j[key] = value;
    std::cout << "t_max=" << r.t_max << " t1_max=" << r.t1_max << " n_tail=" << r.n_tail
              << " p=" << r.p_value << "\n";
    if (!out.empty()) write_file(out, j.dump(2) + "\n");
    return 0;
}

int cmd_curves(const std::string& in, const std::vector<covariate_declaration>& decls,
               const std::string& curve, const std::string& col, int grid_points, double h_arg,
               const std::vector<std::string>& levels, const std::string& out) {
    csv_load_result loaded = load_csv(in, decls);
    const sample& s = loaded.data;
    auto col_index = [&](const std::string& name) -> std::size_t {
        for (std::size_t j = 0; j < s.spec.arity(); ++j)
            if (s.spec.entries[j].name == name) return j;
        throw std::runtime_error("unknown covariate column: " + name);
    };

    if (curve == "km") {
        write_file(out + "_km.csv", step_curve_csv(km_survival(s)));
        std::cout << "wrote " << out << "_km.csv\n";
        return 0;
    }
    if (curve == "cure") {
        std::size_t j = col_index(col);
        if (s.spec.entries[j].kind != covariate_kind::continuous)
            throw std::runtime_error("cure-rate curve needs a continuous covariate");
        std::vector<double> x = s.numeric_column(j);
        double lo = *std::min_element(x.begin(), x.end());
        double hi = *std::max_element(x.begin(), x.end());
        double h = h_arg;
        if (!(h > 0.0)) {
            bandwidth_grid grid = make_grid(4.0, 60.0, 10, 0.2, static_cast<int>(s.size()));
            h = cv_bandwidth(s, {j}, grid, cv_target::survival);
            std::cout << "cv bandwidth: " << h << "\n";
        }
        std::vector<double> zs, cure;
        for (int g = 0; g < grid_points; ++g) {
            double z = lo + (hi - lo) * g / std::max(1, grid_points - 1);
            try {
                cure.push_back(cure_rate_at(s, j, z, kernel_config(h)));
                zs.push_back(z);
            } catch (const all_weights_zero&) {
                std::cerr << "skipping grid point " << z << ": no kernel neighbors\n";
            }
        }
        write_file(out + "_cure.csv", curve_csv(s.spec.entries[j].name, "cure_rate", zs, cure));
        std::cout << "wrote " << out << "_cure.csv\n";
        return 0;
    }
    if (curve == "strata") {
        std::size_t j = col_index(col);
        const covariate_entry& e = s.spec.entries[j];
        std::vector<std::string> requested = levels;
        if (requested.empty()) {
            if (e.kind == covariate_kind::nominal) {
                requested = e.labels;
            } else {
                std::vector<double> vals = s.numeric_column(j);
                std::sort(vals.begin(), vals.end());
                vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
                for (double v : vals) {
                    std::ostringstream os;
                    os << v;
                    requested.push_back(os.str());
                }
            }
        }
        bool wrote_any = false;
        for (const std::string& lev : requested) {
            covariate_value value = e.kind == covariate_kind::nominal
                                        ? covariate_value(lev)
                                        : covariate_value(std::stod(lev));
            try {
                step_curve c = stratified_km(s, j, value);
                write_file(out + "_km_" + lev + ".csv", step_curve_csv(c));
                std::cout << "wrote " << out << "_km_" << lev << ".csv\n";
                wrote_any = true;
            } catch (const empty_stratum& ex) {
                std::cerr << "error: " << ex.what() << "\n";
            }
        }
        return wrote_any ? 0 : 2;
    }
    throw std::runtime_error("unknown curve type: " + curve);
}

int cmd_simulate(const std::string& scenario_name, const std::vector<int>& ns, mc_config cfg,
                 bool full_scale, const std::string& out, const std::vector<std::string>& formats) {
    std::vector<scenario> scenarios = scenarios_by_name(scenario_name);
    if (full_scale) {
        cfg.kappa = 2000;
        // The continuous case-2 scenarios are far heavier; they use B=1000.
        cfg.B = scenario_name.rfind("table5c", 0) == 0 || scenario_name == "table5-continuous"
                    ? 1000
                    : 2000;
    }
    cfg.progress = [](const std::string& name, int n, int done, int total) {
        if (done % 25 == 0 || done == total)
            std::cerr << name << " n=" << n << ": " << done << "/" << total << " trials\r"
                      << (done == total ? "\n" : "");
    };
    rejection_table table = run_monte_carlo(scenarios, ns, cfg);

    for (const rejection_cell& c : table.cells)
        std::cout << c.scenario << " n=" << c.n << ": CM=" << c.cm_rate << " K=" << c.k_rate
                  << " (kappa_eff=" << c.kappa_effective << ")\n";

    for (const std::string& f : formats) {
        if (f == "json")
            write_file(out + ".json", to_json(table).dump(2) + "\n");
        else if (f == "csv")
            write_file(out + ".csv", rejection_table_csv(table));
        else
            throw std::runtime_error("unknown format: " + f);
    }
    std::cout << "runtime: " << table.runtime_seconds << "s\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonparametric covariate tests for the cure rate in mixture cure models"};
    app.require_subcommand(1);

    std::string in, out, kinds_arg, h_grid_arg, format = "json";
    std::vector<std::string> x_cols, z_cols, levels, formats{"json", "csv"};
    int case_id = 1, B = 2000, workers = 1, grid_points = 50, reps = 200;
    double alpha = 0.05, h = 0.0;
    std::int64_t seed = -1;
    std::vector<double> test_h, test_C;
    std::vector<int> ns{100};
    std::string curve = "km", col, scenario_name;
    bool full_scale = false, disable_cap = false;

    CLI::App* t = app.add_subcommand("test", "Run a covariate test for the cure rate");
    t->add_option("--in", in, "input CSV (columns: time, status, covariates)")->required();
    t->add_option("--case", case_id, "test case: 1, 2 or 3")->check(CLI::Range(1, 3));
    t->add_option("--x-cols", x_cols, "conditioning covariates (comma separated)")
        ->delimiter(',');
    t->add_option("--z-cols", z_cols, "tested covariates (comma separated)")->delimiter(',');
    t->add_option("--kinds", kinds_arg, "per-column kinds, e.g. age=continuous,loc=nominal:a|b");
    t->add_option("--B", B, "bootstrap resamples");
    t->add_option("--alpha", alpha, "significance level");
    t->add_option("--seed", seed, "rng seed (generated and printed when omitted)");
    t->add_option("--h-grid", h_grid_arg, "CV grid as dmin,dmax,count,rate");
    t->add_option("--test-h", test_h, "statistic bandwidths (cases 2/3, continuous X)")
        ->delimiter(',');
    t->add_option("--test-C", test_C, "statistic bandwidth constants: h = C n^(-1/(3m))")
        ->delimiter(',');
    t->add_option("--workers", workers, "worker threads");
    t->add_flag("--no-cap", disable_cap, "disable the censoring saturation cap");
    t->add_option("--out", out, "JSON report path");
    t->add_option("--format", format, "report format (json)");

    CLI::App* f = app.add_subcommand("followup", "Sufficient-follow-up test");
    f->add_option("--in", in, "input CSV")->required();
    f->add_option("--out", out, "JSON report path");

    CLI::App* c = app.add_subcommand("curves", "Export estimated curves as CSV");
    c->add_option("--in", in, "input CSV")->required();
    c->add_option("--curve", curve, "km | cure | strata")->required();
    c->add_option("--col", col, "covariate column for cure/strata curves");
    c->add_option("--x-cols", x_cols, "conditioning covariates")->delimiter(',');
    c->add_option("--z-cols", z_cols, "tested covariates")->delimiter(',');
    c->add_option("--kinds", kinds_arg, "per-column kinds");
    c->add_option("--grid-points", grid_points, "evaluation grid size for cure curves");
    c->add_option("--bandwidth", h, "bandwidth (CV-selected when omitted)");
    c->add_option("--levels", levels, "levels to export for strata curves")->delimiter(',');
    c->add_option("--out", out, "output file prefix")->required();

    CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo rejection-rate tables");
    sim->add_option("--scenario", scenario_name, "scenario or group name, e.g. table1")
        ->required();
    sim->add_option("--n", ns, "sample sizes")->delimiter(',');
    sim->add_option("--reps", reps, "Monte Carlo trials per cell");
    sim->add_option("--B", B, "bootstrap resamples per trial")->capture_default_str();
    sim->add_option("--alpha", alpha, "significance level");
    sim->add_option("--seed", seed, "rng seed (generated and printed when omitted)");
    sim->add_option("--workers", workers, "worker threads for trials");
    sim->add_flag("--full-scale", full_scale, "kappa=2000, B=2000 (B=1000 for table5c)");
    sim->add_option("--out", out, "output path prefix")->required();
    sim->add_option("--format", formats, "output formats: json, csv")->delimiter(',');

    CLI::App* v = app.add_subcommand("validate", "Validate an input CSV");
    v->add_option("--in", in, "input CSV")->required();
    v->add_option("--x-cols", x_cols, "conditioning covariates")->delimiter(',');
    v->add_option("--z-cols", z_cols, "tested covariates")->delimiter(',');
    v->add_option("--kinds", kinds_arg, "per-column kinds");

    CLI11_PARSE(app, argc, argv);

    try {
        std::vector<covariate_declaration> decls =
            build_declarations(x_cols, z_cols, parse_kinds(kinds_arg));
        if (t->parsed()) {
            engine_config cfg;
            cfg.B = B;
            cfg.alpha = alpha;
            cfg.seed = resolve_seed(seed);
            cfg.workers = workers;
            cfg.eta.cap_enabled = !disable_cap;
            return cmd_test(in, decls, case_id, cfg, h_grid_arg, test_h, test_C, out, format);
        }
        if (f->parsed()) return cmd_followup(in, decls, out);
        if (c->parsed()) return cmd_curves(in, decls, curve, col, grid_points, h, levels, out);
        if (sim->parsed()) {
            mc_config cfg;
            cfg.kappa = reps;
            cfg.B = sim->count("--B") ? B : 500;
            cfg.alpha = alpha;
            cfg.seed = resolve_seed(seed);
            cfg.workers = workers;
            return cmd_simulate(scenario_name, ns, cfg, full_scale, out, formats);
        }
        if (v->parsed()) return cmd_validate(in, decls);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
