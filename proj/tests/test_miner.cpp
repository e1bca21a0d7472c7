#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "oracles.hpp"
#include "tep/errors.hpp"
#include "tep/miner.hpp"

using namespace tep;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LabeledFrame toy_threshold_frame() {
    // x in 1..10, label 1 iff x >= 6.
    std::vector<double> x(10);
    std::vector<int> labels(10);
    for (std::size_t i = 0; i < 10; ++i) {
        x[i] = static_cast<double>(i + 1);
        labels[i] = x[i] >= 6.0 ? 1 : 0;
    }
    return testutil::make_frame({"x"}, {x}, labels);
}

bool same_rules(const std::vector<QuantRule>& a, const std::vector<QuantRule>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(a[i] == b[i])) return false;
    return true;
}

QuantRule make_rule(std::vector<RuleItem> items, int consequent, double support,
                    double confidence) {
    QuantRule rule;
    rule.antecedent = std::move(items);
    rule.consequent = consequent;
    rule.support = support;
    rule.confidence = confidence;
    normalize_rule(rule);
    return rule;
}

}  // namespace

TEST_SUITE_BEGIN("miner");

TEST_CASE("grid cuts at equally spaced quantiles") {
    std::vector<double> x(8);
    for (std::size_t i = 0; i < 8; ++i) x[i] = static_cast<double>(i + 1);
    const LabeledFrame frame = testutil::make_frame({"x"}, {x}, std::vector<int>(8, 0));
    const QuantGrid grid = build_grid(frame, 4);
    REQUIRE(grid.cuts[0].size() == 5);
    CHECK(grid.cuts[0][0] == 1.0);
    CHECK(grid.cuts[0][1] == doctest::Approx(2.75).epsilon(1e-12));
    CHECK(grid.cuts[0][2] == doctest::Approx(4.5).epsilon(1e-12));
    CHECK(grid.cuts[0][3] == doctest::Approx(6.25).epsilon(1e-12));
    CHECK(grid.cuts[0][4] == 8.0);
}

TEST_CASE("grid collapses duplicates and keeps per-feature lists") {
    const LabeledFrame frame = testutil::make_frame(
        {"const", "x"}, {{5, 5, 5, 5}, {1, 2, 3, 4}}, std::vector<int>(4, 0));
    const QuantGrid grid = build_grid(frame, 4);
    REQUIRE(grid.cuts[0].size() == 1);
    CHECK(grid.cuts[0][0] == 5.0);
    CHECK(grid.cuts[1].size() == 5);

    // Constant feature: the degenerate interval plus unbounded variants.
    const std::vector<Interval> ivs = grid.candidate_intervals(0);
    REQUIRE(ivs.size() == 4);
    CHECK(ivs[0] == Interval{5.0, 5.0});
    CHECK(ivs[3] == Interval{-kInf, kInf});

    // m segments: C(m+1,2) bounded + m lower-unbounded + m upper-unbounded + 1.
    CHECK(grid.candidate_intervals(1).size() == 10 + 4 + 4 + 1);
}

TEST_CASE("grid rejects bad input") {
    const LabeledFrame empty;
    CHECK_THROWS_AS(build_grid(empty, 4), InvalidArgumentError);
    const LabeledFrame frame = testutil::make_frame({"x"}, {{1, 2}}, {0, 0});
    CHECK_THROWS_AS(build_grid(frame, 1), InvalidArgumentError);
}

TEST_CASE("toy mining finds the threshold rule and matches the oracle") {
    const LabeledFrame frame = toy_threshold_frame();
    const QuantGrid grid = build_grid(frame, 4);
    MiningParams params;
    params.cuts_per_feature = 4;
    params.max_antecedents = 1;
    params.min_support = 0.3;
    params.min_confidence = 1.0;
    params.workers = 1;

    const RuleSet mined = mine_rules(frame, grid, params);

    bool found_fault = false, found_normal = false;
    for (const QuantRule& r : mined.rules) {
        const RuleStats stats = check_rule(r, frame);
        CHECK(stats.support == r.support);        // exact recount
        CHECK(stats.confidence == r.confidence);
        if (r.consequent == 1 && r.support == 0.5 && r.confidence == 1.0) {
            found_fault = true;
            CHECK(stats.antecedent_rows == 5);  // exactly the rows with x >= 6
        }
        if (r.consequent == 0 && r.support == 0.5 && r.confidence == 1.0) found_normal = true;
    }
    CHECK(found_fault);
    CHECK(found_normal);

    CHECK(same_rules(mined.rules, oracle::mine(frame, grid, params)));
}

TEST_CASE("full support with two labels leaves nothing") {
    const LabeledFrame frame = toy_threshold_frame();
    const QuantGrid grid = build_grid(frame, 4);
    MiningParams params;
    params.min_support = 1.0;
    params.min_confidence = 0.6;
    const RuleSet mined = mine_rules(frame, grid, params);
    CHECK(mined.rules.empty());
}

TEST_CASE("threshold validation") {
    const LabeledFrame frame = toy_threshold_frame();
    const QuantGrid grid = build_grid(frame, 4);
    MiningParams params;
    params.min_support = 0.0;
    CHECK_THROWS_AS(mine_rules(frame, grid, params), InvalidArgumentError);
    params.min_support = 0.1;
    params.min_confidence = 1.5;
    CHECK_THROWS_AS(mine_rules(frame, grid, params), InvalidArgumentError);
}

TEST_CASE("check_rule counting") {
    const LabeledFrame frame = toy_threshold_frame();
    SUBCASE("full range rule has the majority stats") {
        const QuantRule rule = make_rule({{"x", {-kInf, kInf}}}, 0, 0, 0);
        const RuleStats stats = check_rule(rule, frame);
        CHECK(stats.antecedent_rows == 10);
        CHECK(stats.support == 0.5);
        CHECK(stats.confidence == 0.5);
    }
    SUBCASE("empty match flags zero support, not an error") {
        const QuantRule rule = make_rule({{"x", {100.0, 200.0}}}, 1, 0, 0);
        const RuleStats stats = check_rule(rule, frame);
        CHECK(stats.antecedent_rows == 0);
        CHECK(stats.support == 0.0);
        CHECK(stats.confidence == 0.0);
    }
    SUBCASE("unknown feature") {
        const QuantRule rule = make_rule({{"zz", {0.0, 1.0}}}, 1, 0, 0);
        CHECK_THROWS_AS(check_rule(rule, frame), InvalidArgumentError);
    }
}

TEST_CASE("dominance examples") {
    const QuantRule a = make_rule({{"x", {0.0, 10.0}}}, 1, 0.4, 0.9);
    const QuantRule b = make_rule({{"x", {2.0, 8.0}}}, 1, 0.3, 0.9);
    CHECK(dominates(a, b));
    CHECK_FALSE(dominates(b, a));

    SUBCASE("different consequent never dominates") {
        QuantRule c = b;
        c.consequent = 2;
        CHECK_FALSE(dominates(a, c));
    }
    SUBCASE("feature subset with equal stats dominates") {
        const QuantRule wide = make_rule({{"x", {0.0, 10.0}}}, 1, 0.4, 0.9);
        const QuantRule narrow =
            make_rule({{"x", {0.0, 10.0}}, {"y", {0.0, 1.0}}}, 1, 0.4, 0.9);
        CHECK(dominates(wide, narrow));
        CHECK_FALSE(dominates(narrow, wide));
    }
    SUBCASE("identical rules do not dominate each other") {
        CHECK_FALSE(dominates(a, a));
    }
    SUBCASE("better support but disjoint features does not dominate") {
        const QuantRule other = make_rule({{"y", {0.0, 10.0}}}, 1, 0.9, 0.9);
        CHECK_FALSE(dominates(other, b));
    }
}

TEST_CASE("prune removes duplicates and contained rules") {
    const QuantRule a = make_rule({{"x", {0.0, 10.0}}}, 1, 0.4, 0.9);
    const QuantRule b = make_rule({{"x", {2.0, 8.0}}}, 1, 0.3, 0.9);
    SUBCASE("two identical rules keep one") {
        const RuleSet out = prune_dominated({a, a});
        CHECK(out.rules.size() == 1);
    }
    SUBCASE("contained rule removed") {
        const RuleSet out = prune_dominated({a, b});
        REQUIRE(out.rules.size() == 1);
        CHECK(out.rules[0] == a);
    }
}

TEST_CASE("prune agrees with the quadratic oracle on random rules") {
    SplitRng rng(77);
    const std::vector<std::string> features{"a", "b", "c"};
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<QuantRule> rules;
        for (int i = 0; i < 50; ++i) {
            QuantRule r;
            const int arity = static_cast<int>(rng.next_int(1, 3));
            std::vector<std::string> pool = features;
            for (int k = 0; k < arity; ++k) {
                const auto pick = static_cast<std::size_t>(
                    rng.next_int(0, static_cast<std::int64_t>(pool.size()) - 1));
                double lo = static_cast<double>(rng.next_int(0, 5));
                double hi = lo + static_cast<double>(rng.next_int(0, 5));
                if (rng.next_double() < 0.15) lo = -kInf;
                if (rng.next_double() < 0.15) hi = kInf;
                r.antecedent.push_back({pool[pick], {lo, hi}});
                pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
            }
            r.consequent = static_cast<int>(rng.next_int(0, 2));
            r.support = static_cast<double>(rng.next_int(1, 10)) / 10.0;
            r.confidence = static_cast<double>(rng.next_int(1, 10)) / 10.0;
            normalize_rule(r);
            rules.push_back(std::move(r));
        }
        const RuleSet fast = prune_dominated(rules);
        const std::vector<QuantRule> slow = oracle::prune(rules);
        CHECK(same_rules(fast.rules, slow));
    }
}

TEST_CASE("dominance is a strict partial order on random rules") {
    SplitRng rng(123);
    std::vector<QuantRule> rules;
    for (int i = 0; i < 60; ++i) {
        QuantRule r;
        r.antecedent.push_back(
            {"a", {static_cast<double>(rng.next_int(0, 3)),
                   static_cast<double>(rng.next_int(4, 8))}});
        if (rng.next_double() < 0.5)
            r.antecedent.push_back(
                {"b", {static_cast<double>(rng.next_int(0, 3)),
                       static_cast<double>(rng.next_int(4, 8))}});
        r.consequent = static_cast<int>(rng.next_int(0, 1));
        r.support = static_cast<double>(rng.next_int(0, 20)) / 20.0;
        r.confidence = static_cast<double>(rng.next_int(0, 20)) / 20.0;
        normalize_rule(r);
        rules.push_back(std::move(r));
    }
    for (const QuantRule& a : rules) {
        CHECK_FALSE(dominates(a, a));  // irreflexive
        for (const QuantRule& b : rules) {
            if (dominates(a, b)) CHECK_FALSE(dominates(b, a));  // antisymmetric
            for (const QuantRule& c : rules) {
                if (dominates(a, b) && dominates(b, c)) CHECK(dominates(a, c));  // transitive
            }
        }
    }
}

TEST_CASE("miner equals the exhaustive oracle on random small instances") {
    SplitRng rng(2025);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t rows = static_cast<std::size_t>(rng.next_int(8, 30));
        const std::size_t cols = static_cast<std::size_t>(rng.next_int(1, 4));
        const LabeledFrame frame = testutil::random_frame(rng, rows, cols, 3);
        const int cuts = static_cast<int>(rng.next_int(2, 4));
        const QuantGrid grid = build_grid(frame, cuts);
        MiningParams params;
        params.cuts_per_feature = cuts;
        params.max_antecedents = 2;
        params.min_support = 0.05 + 0.15 * rng.next_double();
        params.min_confidence = 0.5 + 0.4 * rng.next_double();
        params.workers = 2;

        const RuleSet mined = mine_rules(frame, grid, params);
        const std::vector<QuantRule> expected = oracle::mine(frame, grid, params);
        CHECK(same_rules(mined.rules, expected));

        // Soundness: recorded stats reproduce exactly and meet thresholds.
        for (const QuantRule& r : mined.rules) {
            const RuleStats stats = check_rule(r, frame);
            CHECK(stats.support == r.support);
            CHECK(stats.confidence == r.confidence);
            CHECK(r.support >= params.min_support);
            CHECK(r.confidence >= params.min_confidence);
        }
    }
}

TEST_CASE("miner equals the oracle with three antecedents") {
    SplitRng rng(909);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t rows = static_cast<std::size_t>(rng.next_int(15, 30));
        const std::size_t cols = static_cast<std::size_t>(rng.next_int(3, 4));
        const LabeledFrame frame = testutil::random_frame(rng, rows, cols, 3);
        const int cuts = static_cast<int>(rng.next_int(2, 3));
        const QuantGrid grid = build_grid(frame, cuts);
        MiningParams params;
        params.cuts_per_feature = cuts;
        params.max_antecedents = 3;
        params.min_support = 0.1;
        params.min_confidence = 0.6;
        params.workers = 2;

        const RuleSet mined = mine_rules(frame, grid, params);
        CHECK(same_rules(mined.rules, oracle::mine(frame, grid, params)));
    }
}

TEST_CASE("mining is deterministic across workers and row order") {
    SplitRng rng(31337);
    const LabeledFrame frame = testutil::random_frame(rng, 120, 6, 4);
    const QuantGrid grid = build_grid(frame, 5);
    MiningParams params;
    params.cuts_per_feature = 5;
    params.max_antecedents = 2;
    params.min_support = 0.05;
    params.min_confidence = 0.6;

    params.workers = 1;
    const RuleSet one = mine_rules(frame, grid, params);
    params.workers = 2;
    const RuleSet two = mine_rules(frame, grid, params);
    params.workers = 8;
    const RuleSet eight = mine_rules(frame, grid, params);

    CHECK(rules_to_json(one) == rules_to_json(two));
    CHECK(rules_to_json(one) == rules_to_json(eight));

    // Rotating rows preserves the multiset of rows, so the result is identical.
    LabeledFrame rotated;
    rotated.features = frame.features;
    for (std::size_t r = 0; r < frame.rows(); ++r) {
        const std::size_t src = (r + 41) % frame.rows();
        const auto row = frame.row(src);
        rotated.values.insert(rotated.values.end(), row.begin(), row.end());
        rotated.labels.push_back(frame.labels[src]);
    }
    const QuantGrid grid2 = build_grid(rotated, 5);
    const RuleSet shuffled = mine_rules(rotated, grid2, params);
    CHECK(rules_to_json(one) == rules_to_json(shuffled));

    // A mined set round-trips bit-exactly through both serializations.
    const RuleSet from_json = rules_from_json(rules_to_json(one));
    CHECK(rules_to_json(from_json) == rules_to_json(one));
    std::ostringstream text;
    write_rules_text(one, text);
    std::istringstream text_in(text.str());
    const RuleSet from_text = read_rules_text(text_in);
    CHECK(same_rules(from_text.rules, one.rules));
}

TEST_CASE("rare-consequent pruning does not change the result") {
    SplitRng rng(555);
    const LabeledFrame frame = testutil::random_frame(rng, 60, 3, 4);
    const QuantGrid grid = build_grid(frame, 4);
    MiningParams params;
    params.cuts_per_feature = 4;
    params.max_antecedents = 2;
    params.min_support = 0.2;  // high enough to make some priors non-viable
    params.min_confidence = 0.5;

    params.prune_rare_consequents = true;
    const RuleSet with_prune = mine_rules(frame, grid, params);
    params.prune_rare_consequents = false;
    const RuleSet without = mine_rules(frame, grid, params);
    CHECK(same_rules(with_prune.rules, without.rules));
}

TEST_CASE("rule serialization round trips") {
    RuleSet set;
    set.params.cuts_per_feature = 6;
    set.params.max_antecedents = 2;
    set.params.min_support = 0.01;
    set.params.min_confidence = 0.9;
    set.rules.push_back(make_rule({{"v07", {1.5, 3.25}}, {"v23_d1", {-kInf, 0.5}}}, 6,
                                  0.123456789012345, 0.987654321));
    set.rules.push_back(make_rule({{"v01", {2.0, kInf}}}, 3, 1.0 / 3.0, 2.0 / 3.0));

    SUBCASE("text") {
        std::ostringstream out;
        write_rules_text(set, out);
        CHECK(out.str().find("IF v07 in [1.5,3.25] AND v23_d1 in [-inf,0.5] THEN fault=6") !=
              std::string::npos);
        std::istringstream in(out.str());
        const RuleSet back = read_rules_text(in);
        REQUIRE(back.rules.size() == 2);
        CHECK(same_rules(back.rules, set.rules));
        CHECK(back.params.min_confidence == set.params.min_confidence);

        std::ostringstream again;
        write_rules_text(back, again);
        CHECK(again.str() == out.str());
    }
    SUBCASE("json") {
        const std::string text = rules_to_json(set);
        const RuleSet back = rules_from_json(text);
        CHECK(same_rules(back.rules, set.rules));
        CHECK(back.params.min_support == set.params.min_support);
        CHECK(rules_to_json(back) == text);
    }
}

TEST_SUITE_END();
