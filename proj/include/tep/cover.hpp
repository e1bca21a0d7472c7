#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tep/bitset.hpp"
#include "tep/frame.hpp"
#include "tep/rules.hpp"

namespace tep {

// Per-rule covered-instance sets. A rule covers an instance when its
// antecedent holds AND the instance's label equals the consequent.
struct CoverageUniverse {
    std::vector<std::string> variables;        // name-sorted, rule-referenced only
    std::vector<BitSet> rule_covered;          // per rule
    std::vector<std::vector<std::size_t>> rule_variables;  // indices into `variables`
    BitSet universe;                           // union over all rules
    std::size_t universe_size = 0;
    std::size_t frame_rows = 0;
};

enum class CoverMode { kGreedy, kExact };

struct CoverResult {
    std::vector<std::string> variables;  // name-sorted
    double coverage = 0.0;
    std::size_t cardinality = 0;
    CoverMode mode = CoverMode::kGreedy;
};

CoverageUniverse build_universe(const RuleSet& rules, const LabeledFrame& frame,
                                unsigned workers = 0);

// Fraction of the universe covered by rules whose antecedent variables all
// lie inside `vars`. Defined as 1.0 when the universe is empty.
double variable_set_coverage(const std::vector<std::string>& vars,
                             const CoverageUniverse& universe);

// Smallest variable subset reaching the coverage target. Greedy adds the
// best marginal variable per step (ties by name); exact runs a
// breadth-first search over subsets by increasing cardinality, bounded by
// the greedy solution and pruned with an optimistic reachability bound.
CoverResult min_variable_cover(const CoverageUniverse& universe, double target, CoverMode mode);

std::string cover_to_json(const CoverResult& result);

}  // namespace tep
