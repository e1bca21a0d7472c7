#include "tep/cover.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

#include "tep/errors.hpp"
#include "tep/parallel.hpp"

namespace tep {

namespace {

bool reaches_target(std::size_t covered, std::size_t universe, double target) {
    if (universe == 0) return true;
    return static_cast<double>(covered) / static_cast<double>(universe) >= target;
}

// Rules whose antecedent misses at most `budget` of the selected
// variables bound what any `budget`-sized extension could still cover.
std::size_t optimistic_coverage(const CoverageUniverse& u, const std::vector<char>& selected,
                                const BitSet& covered, std::size_t budget) {
    BitSet reachable = covered;
    for (std::size_t r = 0; r < u.rule_covered.size(); ++r) {
        std::size_t missing = 0;
        for (std::size_t v : u.rule_variables[r])
            if (!selected[v] && ++missing > budget) break;
        if (missing <= budget) reachable |= u.rule_covered[r];
    }
    return reachable.count();
}

struct GreedyState {
    std::vector<char> selected;
    std::vector<std::size_t> order;  // selection order
    BitSet covered;
};

// Union of rules fully enabled by `selected`.
BitSet covered_by(const CoverageUniverse& u, const std::vector<char>& selected) {
    BitSet covered(u.frame_rows);
    for (std::size_t r = 0; r < u.rule_covered.size(); ++r) {
        bool enabled = true;
        for (std::size_t v : u.rule_variables[r]) {
            if (!selected[v]) {
                enabled = false;
                break;
            }
        }
        if (enabled) covered |= u.rule_covered[r];
    }
    return covered;
}

GreedyState greedy_cover(const CoverageUniverse& u, double target) {
    GreedyState state;
    state.selected.assign(u.variables.size(), 0);
    state.covered = BitSet(u.frame_rows);

    // missing[r]: selected variables the rule still lacks. A candidate v
    // only changes coverage through rules missing exactly {v}.
    std::vector<std::size_t> missing(u.rule_covered.size());
    for (std::size_t r = 0; r < u.rule_covered.size(); ++r) {
        missing[r] = u.rule_variables[r].size();
        if (missing[r] == 0) state.covered |= u.rule_covered[r];
    }

    std::size_t covered_count = state.covered.count();
    while (!reaches_target(covered_count, u.universe_size, target)) {
        std::vector<std::vector<std::size_t>> unlockable(u.variables.size());
        for (std::size_t r = 0; r < u.rule_covered.size(); ++r) {
            if (missing[r] != 1) continue;
            for (std::size_t v : u.rule_variables[r])
                if (!state.selected[v]) unlockable[v].push_back(r);
        }
        std::size_t best_var = u.variables.size();
        std::size_t best_gain = 0;
        for (std::size_t v = 0; v < u.variables.size(); ++v) {
            if (state.selected[v]) continue;
            std::size_t gain = 0;
            if (!unlockable[v].empty()) {
                BitSet merged = state.covered;
                for (std::size_t r : unlockable[v]) merged |= u.rule_covered[r];
                gain = merged.count() - covered_count;
            }
            // Variables are name-sorted, so first-wins is the name tie-break.
            if (best_var == u.variables.size() || gain > best_gain) {
                best_var = v;
                best_gain = gain;
            }
        }
        if (best_var == u.variables.size()) break;  // nothing left to add
        state.selected[best_var] = 1;
        state.order.push_back(best_var);
        for (std::size_t r = 0; r < u.rule_covered.size(); ++r) {
            if (missing[r] == 0) continue;
            for (std::size_t v : u.rule_variables[r]) {
                if (v == best_var) {
                    if (--missing[r] == 0) state.covered |= u.rule_covered[r];
                    break;
                }
            }
        }
        covered_count = state.covered.count();
    }
    return state;
}

// Depth-first enumeration of exactly-k-sized supersets of `selected` in
// lexicographic variable order; returns true when a subset reaches the
// target, leaving it in `selected`/`chosen`.
bool exact_extend(const CoverageUniverse& u, double target, std::vector<char>& selected,
                  std::vector<std::size_t>& chosen, std::size_t next, std::size_t remaining) {
    if (remaining == 0)
        return reaches_target(covered_by(u, selected).count(), u.universe_size, target);
    if (next >= u.variables.size()) return false;
    const BitSet covered = covered_by(u, selected);
    if (!reaches_target(optimistic_coverage(u, selected, covered, remaining), u.universe_size,
                        target))
        return false;
    for (std::size_t v = next; v + remaining <= u.variables.size(); ++v) {
        selected[v] = 1;
        chosen.push_back(v);
        if (exact_extend(u, target, selected, chosen, v + 1, remaining - 1)) return true;
        chosen.pop_back();
        selected[v] = 0;
    }
    return false;
}

}  // namespace

CoverageUniverse build_universe(const RuleSet& rules, const LabeledFrame& frame,
                                unsigned workers) {
    CoverageUniverse u;
    u.frame_rows = frame.rows();

    std::set<std::string> names;
    for (const QuantRule& r : rules.rules)
        for (const RuleItem& item : r.antecedent) names.insert(item.feature);
    u.variables.assign(names.begin(), names.end());

    std::map<std::string, std::size_t> var_index;
    for (std::size_t i = 0; i < u.variables.size(); ++i) var_index[u.variables[i]] = i;

    const std::size_t count = rules.rules.size();
    u.rule_covered.assign(count, BitSet(frame.rows()));
    u.rule_variables.resize(count);
    std::vector<std::vector<std::size_t>> rule_columns(count);
    for (std::size_t r = 0; r < count; ++r) {
        for (const RuleItem& item : rules.rules[r].antecedent) {
            u.rule_variables[r].push_back(var_index.at(item.feature));
            rule_columns[r].push_back(frame.feature_index(item.feature));
        }
    }

    parallel_for(count, workers, [&](unsigned, std::size_t r) {
        const QuantRule& rule = rules.rules[r];
        BitSet& covered = u.rule_covered[r];
        for (std::size_t row = 0; row < frame.rows(); ++row) {
            if (frame.labels[row] != rule.consequent) continue;
            bool holds = true;
            for (std::size_t i = 0; i < rule_columns[r].size(); ++i) {
                if (!rule.antecedent[i].interval.contains(frame.at(row, rule_columns[r][i]))) {
                    holds = false;
                    break;
                }
            }
            if (holds) covered.set(row);
        }
    });

    u.universe = BitSet(frame.rows());
    for (const BitSet& b : u.rule_covered) u.universe |= b;
    u.universe_size = u.universe.count();
    return u;
}

double variable_set_coverage(const std::vector<std::string>& vars,
                             const CoverageUniverse& universe) {
    if (universe.universe_size == 0) return 1.0;
    std::vector<char> selected(universe.variables.size(), 0);
    for (const std::string& name : vars) {
        const auto it =
            std::lower_bound(universe.variables.begin(), universe.variables.end(), name);
        if (it != universe.variables.end() && *it == name)
            selected[static_cast<std::size_t>(it - universe.variables.begin())] = 1;
    }
    return static_cast<double>(covered_by(universe, selected).count()) /
           static_cast<double>(universe.universe_size);
}

CoverResult min_variable_cover(const CoverageUniverse& universe, double target, CoverMode mode) {
    if (!(target > 0.0) || target > 1.0)
        throw InvalidArgumentError("cover target must be in (0, 1]");

    CoverResult result;
    result.mode = mode;
    if (universe.universe_size == 0) {
        result.coverage = 1.0;
        return result;
    }

    const GreedyState greedy = greedy_cover(universe, target);
    if (!reaches_target(greedy.covered.count(), universe.universe_size, target))
        throw InvalidArgumentError("coverage target unreachable with all variables");

    std::vector<std::size_t> chosen;
    if (mode == CoverMode::kGreedy) {
        chosen = greedy.order;
    } else {
        const std::size_t upper = greedy.order.size();
        std::vector<char> selected(universe.variables.size(), 0);
        bool found = false;
        for (std::size_t k = 0; k <= upper && !found; ++k) {
            chosen.clear();
            found = exact_extend(universe, target, selected, chosen, 0, k);
        }
        // The greedy subset itself guarantees success at k = upper.
    }

    std::vector<char> selected(universe.variables.size(), 0);
    for (std::size_t v : chosen) selected[v] = 1;
    result.coverage = static_cast<double>(covered_by(universe, selected).count()) /
                      static_cast<double>(universe.universe_size);
    result.cardinality = chosen.size();
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t v : chosen) result.variables.push_back(universe.variables[v]);
    return result;
}

std::string cover_to_json(const CoverResult& result) {
    nlohmann::json doc;
    doc["variables"] = result.variables;
    doc["coverage"] = result.coverage;
    doc["cardinality"] = result.cardinality;
    doc["mode"] = result.mode == CoverMode::kExact ? "exact" : "greedy";
    return doc.dump(2) + "\n";
}

}  // namespace tep
