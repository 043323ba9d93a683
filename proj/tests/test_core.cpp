#include <catch2/catch_amalgamated.hpp>

#include "curetest/core.hpp"
#include "curetest/rng.hpp"

using namespace curetest;

namespace {

sample univariate_sample(std::vector<double> t, std::vector<int> d) {
    sample s;
    s.spec.entries.push_back({"z", covariate_kind::continuous, covariate_role::z_block, {}});
    for (std::size_t i = 0; i < t.size(); ++i)
        s.observations.push_back({t[i], d[i], {static_cast<double>(i)}});
    return s;
}

sample random_sample(rng& g, std::size_t n) {
    sample s;
    s.spec.entries.push_back({"z", covariate_kind::continuous, covariate_role::z_block, {}});
    for (std::size_t i = 0; i < n; ++i)
        s.observations.push_back(
            {g.exponential(0.4), g.next_double() < 0.6 ? 1 : 0, {g.uniform(-3.0, 3.0)}});
    return s;
}

}  // namespace

TEST_CASE("validate accepts well-formed samples") {
    sample s = univariate_sample({1.0, 2.0, 3.0}, {1, 0, 1});
    REQUIRE(validate(s).ok());
}

TEST_CASE("validate reports negative times with row and field") {
    sample s = univariate_sample({1.0, -1.0, 3.0}, {1, 0, 1});
    validation_report rep = validate(s);
    REQUIRE(rep.issues.size() == 1);
    CHECK(rep.issues[0].row == 1);
    CHECK(rep.issues[0].field == "time");
}

TEST_CASE("validate rejects unknown nominal labels") {
    sample s;
    s.spec.entries.push_back(
        {"color", covariate_kind::nominal, covariate_role::z_block, {"b1", "b2", "b3"}});
    s.observations.push_back({1.0, 1, {std::string("b1")}});
    s.observations.push_back({2.0, 0, {std::string("purple")}});
    validation_report rep = validate(s);
    REQUIRE(rep.issues.size() == 1);
    CHECK(rep.issues[0].row == 1);
    CHECK(rep.issues[0].field == "color");
}

TEST_CASE("validate flags bad status and arity mismatch") {
    sample s = univariate_sample({1.0, 2.0}, {1, 2});
    s.observations[0].covariates.push_back(5.0);
    validation_report rep = validate(s);
    REQUIRE(rep.issues.size() == 2);
}

TEST_CASE("canonical_order sorts ascending by time") {
    sample s = univariate_sample({3.0, 1.0, 2.0}, {1, 1, 1});
    sample o = canonical_order(s);
    CHECK(o.observations[0].time == 1.0);
    CHECK(o.observations[1].time == 2.0);
    CHECK(o.observations[2].time == 3.0);
}

TEST_CASE("canonical_order puts uncensored first at ties") {
    sample s = univariate_sample({2.0, 2.0}, {0, 1});
    sample o = canonical_order(s);
    CHECK(o.observations[0].status == 1);
    CHECK(o.observations[1].status == 0);
}

TEST_CASE("canonical_order is stable on sorted input") {
    sample s = univariate_sample({1.0, 2.0, 2.0, 3.0}, {1, 1, 0, 0});
    sample o = canonical_order(s);
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(o.observations[i].time == s.observations[i].time);
        CHECK(std::get<double>(o.observations[i].covariates[0]) ==
              std::get<double>(s.observations[i].covariates[0]));
    }
}

TEST_CASE("canonical_order is an idempotent permutation") {
    rng g(1234);
    for (int rep = 0; rep < 20; ++rep) {
        sample s = random_sample(g, 30);
        sample once = canonical_order(s);
        sample twice = canonical_order(once);
        REQUIRE(once.size() == s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            CHECK(twice.observations[i].time == once.observations[i].time);
            CHECK(twice.observations[i].status == once.observations[i].status);
        }
        // Permutation: sorted multiset of times matches.
        std::vector<double> a = s.times(), b = once.times();
        std::sort(a.begin(), a.end());
        std::vector<double> c = b;
        std::sort(c.begin(), c.end());
        CHECK(a == c);
        // Validation is order-invariant.
        CHECK(validate(once).ok() == validate(s).ok());
    }
}

TEST_CASE("nominal labels trim surrounding whitespace") {
    covariate_entry e{"c", covariate_kind::nominal, covariate_role::z_block, {"b1", "b2"}};
    REQUIRE(e.label_index("  b2 "));
    CHECK(*e.label_index("  b2 ") == 1);
    CHECK_FALSE(e.label_index("b3"));
}

TEST_CASE("zero time is allowed") {
    sample s = univariate_sample({0.0, 1.0}, {1, 1});
    CHECK(validate(s).ok());
}
