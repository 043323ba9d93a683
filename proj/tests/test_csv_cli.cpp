#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "curetest/csv.hpp"
#include "curetest/report.hpp"

using namespace curetest;

namespace {

namespace fs = std::filesystem;

struct temp_dir {
    fs::path path;
    temp_dir() {
        path = fs::temp_directory_path() / ("curetest_test_" + std::to_string(std::rand()));
        fs::create_directories(path);
    }
    ~temp_dir() { fs::remove_all(path); }
};

void write(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(CURETEST_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("load_csv reads a well-formed file") {
    temp_dir dir;
    write(dir.path / "d.csv", "time,status,age\n1.5,1,62\n2.0,0,71\n3.25,1,55\n");
    csv_load_result r = load_csv((dir.path / "d.csv").string(),
                                 {{"age", covariate_kind::continuous, covariate_role::z_block, {}}});
    REQUIRE(r.data.size() == 3);
    CHECK(r.data.observations[0].time == 1.5);
    CHECK(r.data.observations[1].status == 0);
    CHECK(std::get<double>(r.data.observations[2].covariates[0]) == 55.0);
    CHECK(r.warnings.empty());
    CHECK(validate(r.data).ok());
}

TEST_CASE("load_csv rejects a bad status cell naming the row") {
    temp_dir dir;
    write(dir.path / "d.csv", "time,status\n1.0,1\n2.0,2\n");
    try {
        load_csv((dir.path / "d.csv").string(), {});
        FAIL("expected a parse error");
    } catch (const std::runtime_error& e) {
        std::string msg = e.what();
        CHECK(msg.find("row 2") != std::string::npos);
        CHECK(msg.find("status") != std::string::npos);
    }
}

TEST_CASE("load_csv validates nominal labels against the declared set") {
    temp_dir dir;
    write(dir.path / "d.csv", "time,status,loc\n1,1,colon\n2,0,rectum\n3,1,lung\n");
    CHECK_THROWS_WITH(
        load_csv((dir.path / "d.csv").string(),
                 {{"loc", covariate_kind::nominal, covariate_role::z_block, {"colon", "rectum"}}}),
        Catch::Matchers::ContainsSubstring("lung"));
}

TEST_CASE("load_csv infers nominal level sets when not declared") {
    temp_dir dir;
    write(dir.path / "d.csv", "time,status,loc\n1,1,b\n2,0,a\n3,1,b\n");
    csv_load_result r = load_csv(
        (dir.path / "d.csv").string(),
        {{"loc", covariate_kind::nominal, covariate_role::z_block, {}}});
    CHECK(r.data.spec.entries[0].labels == std::vector<std::string>{"a", "b"});
}

TEST_CASE("load_csv warns about undeclared columns and requires declared ones") {
    temp_dir dir;
    write(dir.path / "d.csv", "time,status,extra\n1,1,9\n");
    csv_load_result r = load_csv((dir.path / "d.csv").string(), {});
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].find("extra") != std::string::npos);
    CHECK_THROWS_WITH(load_csv((dir.path / "d.csv").string(),
                               {{"age", covariate_kind::continuous, covariate_role::z_block, {}}}),
                      Catch::Matchers::ContainsSubstring("age"));
}

TEST_CASE("load_csv requires time and status columns and nonempty input") {
    temp_dir dir;
    write(dir.path / "a.csv", "time,delta\n1,1\n");
    CHECK_THROWS_WITH(load_csv((dir.path / "a.csv").string(), {}),
                      Catch::Matchers::ContainsSubstring("status"));
    write(dir.path / "b.csv", "");
    CHECK_THROWS_WITH(load_csv((dir.path / "b.csv").string(), {}),
                      Catch::Matchers::ContainsSubstring("empty"));
}

TEST_CASE("rejection table CSV uses the documented header") {
    rejection_table t;
    t.cells.push_back({"table1-p08", 100, 0.0, 0.044, 0.045, 200});
    std::string csv = rejection_table_csv(t);
    CHECK(csv.find("n,scenario,stat,rejection_rate,kappa_effective\n") == 0);
    CHECK(csv.find("100,table1-p08,CM,0.044") != std::string::npos);
    CHECK(csv.find("100,table1-p08,K,0.045") != std::string::npos);
}

// ---------------------------------------------------------------------------
// End-to-end CLI checks

namespace {

std::string simulation_csv(const fs::path& dir) {
    // A synthetic dataset with a cure fraction and one covariate.
    rng g(909);
    std::ostringstream os;
    os << "time,status,age,grade\n";
    for (int i = 0; i < 120; ++i) {
        double age = g.uniform(40.0, 90.0);
        bool cured = g.next_double() < 0.35;
        double y = cured ? 1e9 : g.exponential(0.4);
        double c = g.exponential(0.25);
        double t = std::min(y, c);
        int d = y <= c ? 1 : 0;
        os << t << "," << d << "," << age << "," << (i % 3 == 0 ? "low" : "high") << "\n";
    }
    fs::path p = dir / "synthetic.csv";
    write(p, os.str());
    return p.string();
}

}  // namespace

TEST_CASE("cli test command writes a schema-stable deterministic report") {
    temp_dir dir;
    std::string csv = simulation_csv(dir.path);
    std::string report1 = (dir.path / "r1.json").string();
    std::string report2 = (dir.path / "r2.json").string();
    std::string args = "test --in " + csv +
                       " --case 1 --z-cols age --kinds age=continuous"
                       " --B 60 --alpha 0.05 --seed 42 --out ";
    REQUIRE(run_cli(args + report1) == 0);
    REQUIRE(run_cli(args + report2) == 0);
    CHECK(slurp(report1) == slurp(report2));

    nlohmann::json j = nlohmann::json::parse(slurp(report1));
    CHECK(j["command"] == "test");
    CHECK(j["results"].size() == 1);
    const auto& r = j["results"][0];
    for (const char* key : {"cm_obs", "k_obs", "cm_crit", "k_crit", "p_cm", "p_k", "B", "alpha",
                            "seed", "bandwidths", "diagnostics"})
        CHECK(r.contains(key));
    double p_cm = r["p_cm"].get<double>();
    CHECK(p_cm >= 0.0);
    CHECK(p_cm <= 1.0);
}

TEST_CASE("cli test on a nominal covariate reports the ordering count") {
    temp_dir dir;
    std::string csv = simulation_csv(dir.path);
    std::string report = (dir.path / "nom.json").string();
    REQUIRE(run_cli("test --in " + csv +
                    " --case 1 --z-cols grade --kinds grade=nominal"
                    " --B 50 --seed 9 --out " +
                    report) == 0);
    nlohmann::json j = nlohmann::json::parse(slurp(report));
    CHECK(j["results"][0]["diagnostics"]["orderings"] == 2);
}

TEST_CASE("cli case-2 with continuous X runs the default statistic grid") {
    temp_dir dir;
    rng g(911);
    std::ostringstream os;
    os << "time,status,x,z\n";
    for (int i = 0; i < 90; ++i) {
        double x = 5.0 * g.normal(), z = 5.0 * g.normal();
        bool cured = g.next_double() < 0.4;
        double y = cured ? 1e9 : g.exponential(0.5);
        double c = g.exponential(0.3);
        os << std::min(y, c) << "," << (y <= c ? 1 : 0) << "," << x << "," << z << "\n";
    }
    fs::path p = dir.path / "c2.csv";
    write(p, os.str());
    std::string report = (dir.path / "c2.json").string();
    REQUIRE(run_cli("test --in " + p.string() +
                    " --case 2 --x-cols x --z-cols z --kinds x=continuous,z=continuous"
                    " --B 40 --seed 5 --out " +
                    report) == 0);
    nlohmann::json j = nlohmann::json::parse(slurp(report));
    REQUIRE(j["results"].size() == 7);  // C in {10,20,30,40,45,50,60}
    const double expected_c[] = {10, 20, 30, 40, 45, 50, 60};
    for (std::size_t i = 0; i < 7; ++i) {
        double h = j["results"][i]["bandwidths"]["h_test"].get<double>();
        CHECK(h == Catch::Approx(expected_c[i] * std::pow(90.0, -1.0 / 3.0)).epsilon(1e-12));
    }
}

TEST_CASE("cli followup command emits the result fields") {
    temp_dir dir;
    std::string csv = simulation_csv(dir.path);
    std::string report = (dir.path / "f.json").string();
    REQUIRE(run_cli("followup --in " + csv + " --out " + report) == 0);
    nlohmann::json j = nlohmann::json::parse(slurp(report));
    for (const char* key : {"t_max", "t1_max", "n_tail", "p_value"}) CHECK(j.contains(key));
    CHECK(j["t1_max"].get<double>() <= j["t_max"].get<double>());
}

TEST_CASE("cli curves command exports km and stratified curves") {
    temp_dir dir;
    std::string csv = simulation_csv(dir.path);
    std::string prefix = (dir.path / "curve").string();
    REQUIRE(run_cli("curves --in " + csv + " --curve km --out " + prefix) == 0);
    std::string km = slurp(prefix + "_km.csv");
    CHECK(km.find("t,survival\n") == 0);

    // Cure-rate curve values live in [0, 1].
    REQUIRE(run_cli("curves --in " + csv +
                    " --curve cure --col age --z-cols age --kinds age=continuous"
                    " --grid-points 25 --bandwidth 15 --out " +
                    prefix) == 0);
    std::istringstream cure(slurp(prefix + "_cure.csv"));
    std::string line;
    std::getline(cure, line);
    CHECK(line == "age,cure_rate");
    int rows = 0;
    while (std::getline(cure, line)) {
        double v = std::stod(line.substr(line.find(',') + 1));
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        ++rows;
    }
    CHECK(rows == 25);

    REQUIRE(run_cli("curves --in " + csv +
                    " --curve strata --col grade --z-cols grade --kinds grade=nominal --out " +
                    prefix) == 0);
    CHECK(fs::exists(prefix + "_km_low.csv"));
    CHECK(fs::exists(prefix + "_km_high.csv"));
    // A requested absent level fails that stratum but the rest still write.
    REQUIRE(run_cli("curves --in " + csv +
                    " --curve strata --col grade --z-cols grade"
                    " --kinds 'grade=nominal:low|high|absent' --levels low,absent --out " +
                    prefix + "2") == 0);
    CHECK(fs::exists(prefix + "2_km_low.csv"));
    CHECK_FALSE(fs::exists(prefix + "2_km_absent.csv"));
}

TEST_CASE("cli simulate command writes csv and json tables deterministically") {
    temp_dir dir;
    std::string prefix1 = (dir.path / "t1").string();
    std::string prefix2 = (dir.path / "t2").string();
    std::string args =
        "simulate --scenario table1-p08 --n 40 --reps 3 --B 40 --seed 7 --format json,csv --out ";
    REQUIRE(run_cli(args + prefix1) == 0);
    REQUIRE(run_cli(args + prefix2) == 0);
    CHECK(slurp(prefix1 + ".csv") == slurp(prefix2 + ".csv"));
    nlohmann::json j = nlohmann::json::parse(slurp(prefix1 + ".json"));
    CHECK(j["kappa"] == 3);
    CHECK(j["cells"].size() == 1);
    std::string csv = slurp(prefix1 + ".csv");
    CHECK(csv.rfind("n,scenario,stat,rejection_rate,kappa_effective\n", 0) == 0);
}

TEST_CASE("cli rejects unknown scenarios and missing files") {
    CHECK(run_cli("simulate --scenario tableX --out /tmp/x") == 1);
    CHECK(run_cli("test --in /nonexistent.csv --z-cols z --out /tmp/x.json --seed 1") == 1);
}

TEST_CASE("cli validate reports violations with nonzero exit") {
    temp_dir dir;
    write(dir.path / "bad.csv", "time,status\n-1,1\n2,0\n");
    CHECK(run_cli("validate --in " + (dir.path / "bad.csv").string()) == 2);
    write(dir.path / "good.csv", "time,status\n1,1\n2,0\n");
    CHECK(run_cli("validate --in " + (dir.path / "good.csv").string()) == 0);
}
