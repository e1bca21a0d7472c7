#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tep/frame.hpp"
#include "tep/rules.hpp"

namespace tep {

// Per-feature quantile cut points spanning the training marginal. The
// candidate antecedent intervals for a feature are every [c_i, c_j] with
// i < j plus the variants with one or both ends unbounded.
struct QuantGrid {
    std::vector<std::string> features;
    std::vector<std::vector<double>> cuts;  // strictly increasing, length >= 1

    // Full candidate interval space for one feature (the brute-force
    // search also enumerates exactly this set).
    std::vector<Interval> candidate_intervals(std::size_t feature) const;
};

// Cut points at equally spaced quantiles (k/Q for k = 0..Q); duplicates
// collapsed, so a constant feature keeps a single degenerate cut.
QuantGrid build_grid(const LabeledFrame& train, int cuts_per_feature);

// Level-synchronous breadth-first mining: every antecedent feature set of
// size s is quantified (in parallel) before any set of size s+1, and the
// merged candidates go through one global dominance prune. Returns every
// non-dominated rule meeting both thresholds and no others, in canonical
// order, identically for any worker count.
RuleSet mine_rules(const LabeledFrame& train, const QuantGrid& grid, const MiningParams& params);

struct RuleStats {
    std::size_t antecedent_rows = 0;
    std::size_t joint_rows = 0;
    std::size_t total_rows = 0;
    double support = 0.0;
    double confidence = 0.0;  // reported as 0 when the antecedent never holds
};

// Recounts a rule's support/confidence on a frame; the miner's recorded
// values must reproduce exactly.
RuleStats check_rule(const QuantRule& rule, const LabeledFrame& frame);

// A dominates B: same consequent, features(A) subset of features(B), every
// shared interval in A contains B's, support and confidence at least B's,
// and at least one of those strict.
bool dominates(const QuantRule& a, const QuantRule& b);

// Maximal elements under `dominates`, deduplicated, canonically ordered.
RuleSet prune_dominated(std::vector<QuantRule> rules, MiningParams params = {});

}  // namespace tep
