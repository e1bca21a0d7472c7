#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace tep {

// Closed interval over the extended reals; an infinite endpoint leaves
// that side unconstrained.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double v) const { return v >= lo && v <= hi; }
    bool contains(const Interval& other) const { return lo <= other.lo && hi >= other.hi; }
    bool strictly_contains(const Interval& other) const {
        return contains(other) && (lo < other.lo || hi > other.hi);
    }
    bool operator==(const Interval& other) const = default;
};

struct RuleItem {
    std::string feature;
    Interval interval;

    bool operator==(const RuleItem& other) const = default;
};

// Quantitative rule: antecedent items over distinct features (kept sorted
// by feature name) implying a mode label, with its training support and
// confidence.
struct QuantRule {
    std::vector<RuleItem> antecedent;
    int consequent = 0;
    double support = 0.0;
    double confidence = 0.0;

    bool operator==(const QuantRule& other) const = default;
};

struct MiningParams {
    int cuts_per_feature = 8;
    int max_antecedents = 3;
    double min_support = 0.01;
    double min_confidence = 0.9;
    unsigned workers = 0;  // 0 = hardware concurrency
    // Skipping consequents whose class prior is below min_support is an
    // exact shortcut (no rule for them can reach the support threshold).
    // The toggle exists so tests can confirm the result set is unchanged.
    bool prune_rare_consequents = true;
};

// Canonically ordered rule collection: sorted by consequent, then
// antecedent feature names, then interval bounds; no duplicates; no rule
// dominated by another member.
struct RuleSet {
    std::vector<QuantRule> rules;
    MiningParams params;
};

// Ordering used everywhere a deterministic rule sequence is required.
bool rule_less(const QuantRule& a, const QuantRule& b);

// Sorts antecedent items by feature name (the stored form).
void normalize_rule(QuantRule& rule);

// Text form, one rule per line:
//   IF v07 in [1.5,3.25] AND v23_d1 in [-inf,0.5] THEN fault=6 support=0.25 confidence=0.9
void write_rules_text(const RuleSet& rules, std::ostream& out);
RuleSet read_rules_text(std::istream& in);

// JSON form with the same fields; infinite bounds serialize as null.
std::string rules_to_json(const RuleSet& rules);
RuleSet rules_from_json(const std::string& text);

}  // namespace tep
