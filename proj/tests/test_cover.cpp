#include <doctest.h>

#include <limits>

#include "helpers.hpp"
#include "oracles.hpp"
#include "tep/cover.hpp"
#include "tep/errors.hpp"

using namespace tep;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

QuantRule make_rule(std::vector<RuleItem> items, int consequent, double confidence = 1.0) {
    QuantRule rule;
    rule.antecedent = std::move(items);
    rule.consequent = consequent;
    rule.support = 0.1;
    rule.confidence = confidence;
    normalize_rule(rule);
    return rule;
}

RuleSet make_set(std::vector<QuantRule> rules) {
    RuleSet set;
    set.rules = std::move(rules);
    return set;
}

// Random instance with at most `max_vars` variables, used for the exact
// vs. brute-force comparisons.
struct RandomInstance {
    LabeledFrame frame;
    RuleSet rules;
};

RandomInstance random_instance(SplitRng& rng, std::size_t max_vars) {
    RandomInstance instance;
    const std::size_t vars = static_cast<std::size_t>(rng.next_int(3, max_vars));
    const std::size_t rows = static_cast<std::size_t>(rng.next_int(20, 50));
    instance.frame = testutil::random_frame(rng, rows, vars, 3);

    const int rule_count = static_cast<int>(rng.next_int(4, 14));
    for (int i = 0; i < rule_count; ++i) {
        QuantRule rule;
        const int arity = static_cast<int>(rng.next_int(1, 2));
        std::vector<std::size_t> picked;
        for (int k = 0; k < arity; ++k) {
            const auto f = static_cast<std::size_t>(rng.next_int(0, vars - 1));
            if (std::find(picked.begin(), picked.end(), f) != picked.end()) continue;
            picked.push_back(f);
            const double lo = 10.0 * rng.next_double() - 2.0;
            rule.antecedent.push_back(
                {instance.frame.features[f], {lo, lo + 8.0 * rng.next_double()}});
        }
        rule.consequent = static_cast<int>(rng.next_int(0, 2));
        rule.support = 0.1;
        rule.confidence = 0.9;
        normalize_rule(rule);
        instance.rules.rules.push_back(std::move(rule));
    }
    return instance;
}

}  // namespace

TEST_SUITE_BEGIN("cover");

TEST_CASE("universe respects the coverage definition") {
    const LabeledFrame frame = testutil::make_frame(
        {"x", "y"},
        {{0, 1, 2, 10, 11, 12}, {5, 5, 0, 0, 5, 5}},
        {0, 0, 1, 2, 2, 0});

    SUBCASE("covered means fired and label matched") {
        // Fires on rows 3..5, matches label 2 on rows 3 and 4 only.
        const RuleSet rules = make_set({make_rule({{"x", {9.0, kInf}}}, 2)});
        const CoverageUniverse u = build_universe(rules, frame);
        CHECK(u.universe_size == 2);
        CHECK(u.rule_covered[0].test(3));
        CHECK(u.rule_covered[0].test(4));
        CHECK_FALSE(u.rule_covered[0].test(5));
    }
    SUBCASE("zero-confidence rule covers nothing") {
        const RuleSet rules = make_set({make_rule({{"x", {9.0, kInf}}}, 7)});
        const CoverageUniverse u = build_universe(rules, frame);
        CHECK(u.universe_size == 0);
    }
    SUBCASE("three hand rules match hand enumeration") {
        const RuleSet rules = make_set({
            make_rule({{"x", {9.0, kInf}}}, 2),                      // rows 3,4
            make_rule({{"y", {4.0, 6.0}}}, 0),                       // rows 0,1,5
            make_rule({{"x", {1.5, 2.5}}, {"y", {-1.0, 1.0}}}, 1),   // row 2
        });
        const CoverageUniverse u = build_universe(rules, frame);
        CHECK(u.universe_size == 6);
        CHECK(u.rule_covered[1].count() == 3);
        CHECK(u.rule_covered[2].count() == 1);
        CHECK(u.variables == std::vector<std::string>{"x", "y"});
    }
}

TEST_CASE("variable set coverage") {
    const LabeledFrame frame = testutil::make_frame(
        {"x", "y"}, {{0, 1, 10, 11}, {0, 1, 10, 11}}, {0, 0, 1, 1});
    const RuleSet rules = make_set({
        make_rule({{"x", {9.0, kInf}}}, 1),   // rows 2,3
        make_rule({{"y", {-1.0, 2.0}}}, 0),   // rows 0,1
    });
    const CoverageUniverse u = build_universe(rules, frame);
    REQUIRE(u.universe_size == 4);
    CHECK(variable_set_coverage({"x", "y"}, u) == 1.0);
    CHECK(variable_set_coverage({}, u) == 0.0);
    CHECK(variable_set_coverage({"x"}, u) == 0.5);
    CHECK(variable_set_coverage({"unknown"}, u) == 0.0);

    SUBCASE("monotone under growth") {
        SplitRng rng(808);
        for (int t = 0; t < 30; ++t) {
            const RandomInstance instance = random_instance(rng, 6);
            const CoverageUniverse universe = build_universe(instance.rules, instance.frame);
            std::vector<std::string> subset;
            double last = variable_set_coverage(subset, universe);
            for (const std::string& v : universe.variables) {
                subset.push_back(v);
                const double now = variable_set_coverage(subset, universe);
                CHECK(now >= last);
                last = now;
            }
        }
    }
    SUBCASE("empty universe defines coverage 1") {
        const RuleSet none = make_set({make_rule({{"x", {100.0, 200.0}}}, 1)});
        const CoverageUniverse empty = build_universe(none, frame);
        CHECK(empty.universe_size == 0);
        CHECK(variable_set_coverage({}, empty) == 1.0);
    }
}

TEST_CASE("single-variable rules need exactly that variable") {
    const LabeledFrame frame =
        testutil::make_frame({"x"}, {{0, 1, 10, 11}}, {0, 0, 1, 1});
    const RuleSet rules = make_set({make_rule({{"x", {9.0, kInf}}}, 1)});
    const CoverageUniverse u = build_universe(rules, frame);
    for (double target : {0.1, 0.5, 1.0}) {
        const CoverResult greedy = min_variable_cover(u, target, CoverMode::kGreedy);
        CHECK(greedy.variables == std::vector<std::string>{"x"});
        const CoverResult exact = min_variable_cover(u, target, CoverMode::kExact);
        CHECK(exact.variables == std::vector<std::string>{"x"});
        CHECK(exact.cardinality == 1);
    }
}

TEST_CASE("exact cover matches brute force; greedy never beats it") {
    SplitRng rng(6021);
    for (int trial = 0; trial < 15; ++trial) {
        const RandomInstance instance = random_instance(rng, 8);
        const CoverageUniverse u = build_universe(instance.rules, instance.frame);
        const double target = 0.5 + 0.5 * rng.next_double();

        const CoverResult exact = min_variable_cover(u, target, CoverMode::kExact);
        const CoverResult greedy = min_variable_cover(u, target, CoverMode::kGreedy);

        CHECK(exact.coverage >= target);
        CHECK(greedy.coverage >= target);
        CHECK(greedy.cardinality >= exact.cardinality);
        CHECK(exact.cardinality == oracle::min_cover_cardinality(u, target));

        // Re-running is deterministic.
        const CoverResult again = min_variable_cover(u, target, CoverMode::kExact);
        CHECK(again.variables == exact.variables);
    }
}

TEST_CASE("cover argument validation and serialization") {
    const LabeledFrame frame = testutil::make_frame({"x"}, {{0, 10}}, {0, 1});
    const RuleSet rules = make_set({make_rule({{"x", {9.0, kInf}}}, 1)});
    const CoverageUniverse u = build_universe(rules, frame);
    CHECK_THROWS_AS(min_variable_cover(u, 0.0, CoverMode::kGreedy), InvalidArgumentError);
    CHECK_THROWS_AS(min_variable_cover(u, 1.5, CoverMode::kGreedy), InvalidArgumentError);

    const CoverResult result = min_variable_cover(u, 1.0, CoverMode::kExact);
    const std::string json = cover_to_json(result);
    CHECK(json.find("\"cardinality\": 1") != std::string::npos);
    CHECK(json.find("\"mode\": \"exact\"") != std::string::npos);
    CHECK(cover_to_json(result) == json);
}

TEST_SUITE_END();
