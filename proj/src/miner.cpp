#include "tep/miner.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>

#include "tep/errors.hpp"
#include "tep/parallel.hpp"
#include "tep/stats.hpp"

namespace tep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Largest allowed scratch tensor (cells * channels) per worker.
constexpr std::size_t kMaxScratchEntries = std::size_t{1} << 24;

// Cap on antecedent size; the scratch tensor blows up long before this.
constexpr int kMaxAntecedentCap = 6;

// An interval from the reduced candidate enumeration, tagged with the
// inclusive fine-bin range it selects in the per-feature histogram axis.
struct BinnedInterval {
    Interval interval;
    std::uint32_t lo_bin = 0;
    std::uint32_t hi_bin = 0;
};

// Fine bins alternate point bins (value equals a cut) and open segments
// between cuts: P0, (c0,c1), P1, ... , Pm. Interval membership is then a
// contiguous bin range, so support counts come from prefix sums.
struct FeatureAxis {
    std::uint32_t bin_count = 1;
    std::vector<std::uint16_t> row_bins;
    std::vector<BinnedInterval> intervals;
};

std::uint16_t fine_bin(const std::vector<double>& cuts, double v) {
    // Values outside the cut span can only be selected by unbounded ends,
    // which never use the extreme cuts as bounds, so clamping is exact.
    if (v <= cuts.front()) return 0;
    if (v >= cuts.back()) return static_cast<std::uint16_t>(2 * (cuts.size() - 1));
    const auto it = std::lower_bound(cuts.begin(), cuts.end(), v);
    const std::size_t idx = static_cast<std::size_t>(it - cuts.begin());
    if (it != cuts.end() && *it == v) return static_cast<std::uint16_t>(2 * idx);
    return static_cast<std::uint16_t>(2 * idx - 1);
}

// Reduced interval enumeration: bounds range over interior cuts plus the
// unbounded ends. Intervals bounded by an extreme cut are always dominated
// by their unbounded variant (identical rows matched, strictly wider), so
// they never survive the prune and need not be generated.
std::vector<BinnedInterval> reduced_intervals(const std::vector<double>& cuts) {
    const std::size_t m = cuts.size() - 1;
    std::vector<BinnedInterval> out;
    if (m == 0) {
        out.push_back({Interval{-kInf, kInf}, 0, 0});
        return out;
    }
    struct Bound {
        double value;
        std::uint32_t bin;
    };
    std::vector<Bound> lows{{-kInf, 0}};
    std::vector<Bound> highs;
    for (std::size_t i = 1; i <= m - 1; ++i) {
        lows.push_back({cuts[i], static_cast<std::uint32_t>(2 * i)});
        highs.push_back({cuts[i], static_cast<std::uint32_t>(2 * i)});
    }
    highs.push_back({kInf, static_cast<std::uint32_t>(2 * m)});
    for (const Bound& lo : lows)
        for (const Bound& hi : highs)
            if (lo.value < hi.value)
                out.push_back({Interval{lo.value, hi.value}, lo.bin, hi.bin});
    return out;
}

void validate_params(const MiningParams& params) {
    if (params.max_antecedents < 1)
        throw InvalidArgumentError("max_antecedents must be at least 1");
    if (params.max_antecedents > kMaxAntecedentCap)
        throw InvalidArgumentError("max_antecedents above the supported cap of " +
                                   std::to_string(kMaxAntecedentCap));
    if (!(params.min_support > 0.0) || params.min_support > 1.0)
        throw InvalidArgumentError("min_support must be in (0, 1]");
    if (!(params.min_confidence > 0.0) || params.min_confidence > 1.0)
        throw InvalidArgumentError("min_confidence must be in (0, 1]");
}

// Lexicographic enumeration of size-s index combinations, flattened.
std::vector<std::uint32_t> combinations(std::size_t n, int s) {
    std::vector<std::uint32_t> out;
    std::vector<std::uint32_t> combo(static_cast<std::size_t>(s));
    std::iota(combo.begin(), combo.end(), 0u);
    if (static_cast<std::size_t>(s) > n) return out;
    double estimate = 1.0;
    for (int i = 0; i < s; ++i)
        estimate *= static_cast<double>(n - static_cast<std::size_t>(i)) / (s - i);
    if (estimate > 5e7)
        throw InvalidArgumentError("level " + std::to_string(s) + " over " + std::to_string(n) +
                                   " features needs ~" + std::to_string(estimate) +
                                   " itemsets; lower max_antecedents");
    for (;;) {
        out.insert(out.end(), combo.begin(), combo.end());
        int i = s - 1;
        while (i >= 0 && combo[static_cast<std::size_t>(i)] ==
                             n - static_cast<std::size_t>(s - i)) {
            --i;
        }
        if (i < 0) break;
        ++combo[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < s; ++j)
            combo[static_cast<std::size_t>(j)] = combo[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

struct MiningContext {
    const LabeledFrame* train = nullptr;
    std::vector<FeatureAxis> axes;
    std::vector<int> viable_labels;       // ascending
    std::vector<std::int16_t> label_slot;  // per row; -1 = counts only in total
    std::size_t channels = 0;             // viable labels + 1 (total)
};

// Quantifies one antecedent feature set: joint fine-bin histogram per
// consequent channel, in-place prefix sums along each axis, then one
// inclusion-exclusion box query per interval combination.
class ItemsetQuantifier {
  public:
    explicit ItemsetQuantifier(const MiningContext& ctx, const MiningParams& params)
        : ctx_(ctx), params_(params) {}

    void quantify(std::span<const std::uint32_t> features, std::vector<QuantRule>& out) {
        const std::size_t s = features.size();
        dims_.resize(s);
        strides_.resize(s);
        std::size_t cells = 1;
        for (std::size_t i = 0; i < s; ++i) {
            dims_[i] = ctx_.axes[features[i]].bin_count;
            cells *= dims_[i];
        }
        const std::size_t chans = ctx_.channels;
        if (cells * chans > kMaxScratchEntries)
            throw InvalidArgumentError(
                "quantification tensor too large; lower cuts_per_feature or max_antecedents");
        strides_[s - 1] = 1;
        for (std::size_t i = s - 1; i > 0; --i) strides_[i - 1] = strides_[i] * dims_[i];

        scratch_.assign(cells * chans, 0);
        const std::size_t rows = ctx_.train->rows();
        for (std::size_t r = 0; r < rows; ++r) {
            std::size_t cell = 0;
            for (std::size_t i = 0; i < s; ++i)
                cell += static_cast<std::size_t>(ctx_.axes[features[i]].row_bins[r]) * strides_[i];
            const std::size_t base = cell * chans;
            const std::int16_t slot = ctx_.label_slot[r];
            if (slot >= 0) scratch_[base + static_cast<std::size_t>(slot)]++;
            scratch_[base + chans - 1]++;
        }

        // Inclusive prefix sums along every axis.
        for (std::size_t a = 0; a < s; ++a) {
            const std::size_t stride = strides_[a];
            const std::size_t dim = dims_[a];
            for (std::size_t cell = 0; cell < cells; ++cell) {
                if ((cell / stride) % dim == 0) continue;
                const std::size_t dst = cell * chans;
                const std::size_t src = (cell - stride) * chans;
                for (std::size_t ch = 0; ch < chans; ++ch) scratch_[dst + ch] += scratch_[src + ch];
            }
        }

        choice_.resize(s);
        emit_boxes(features, 0, out);
    }

  private:
    void emit_boxes(std::span<const std::uint32_t> features, std::size_t depth,
                    std::vector<QuantRule>& out) {
        if (depth == features.size()) {
            evaluate_box(features, out);
            return;
        }
        const auto& ivs = ctx_.axes[features[depth]].intervals;
        for (std::size_t i = 0; i < ivs.size(); ++i) {
            choice_[depth] = static_cast<std::uint32_t>(i);
            emit_boxes(features, depth + 1, out);
        }
    }

    void evaluate_box(std::span<const std::uint32_t> features, std::vector<QuantRule>& out) {
        const std::size_t s = features.size();
        const std::size_t chans = ctx_.channels;
        const std::size_t corners = std::size_t{1} << s;

        // Resolve corners first and sum only the antecedent-total channel;
        // joint counts never exceed it, so boxes below the support cutoff
        // need no per-consequent reads.
        std::size_t corner_base[1u << kMaxAntecedentCap];
        int corner_sign[1u << kMaxAntecedentCap];
        std::size_t live = 0;
        std::int64_t antecedent = 0;
        for (std::size_t corner = 0; corner < corners; ++corner) {
            std::size_t cell = 0;
            bool empty = false;
            for (std::size_t i = 0; i < s; ++i) {
                const BinnedInterval& iv = ctx_.axes[features[i]].intervals[choice_[i]];
                if (corner & (std::size_t{1} << i)) {
                    if (iv.lo_bin == 0) {
                        empty = true;
                        break;
                    }
                    cell += (static_cast<std::size_t>(iv.lo_bin) - 1) * strides_[i];
                } else {
                    cell += static_cast<std::size_t>(iv.hi_bin) * strides_[i];
                }
            }
            if (empty) continue;
            const int sign = (std::popcount(corner) & 1) ? -1 : 1;
            corner_base[live] = cell * chans;
            corner_sign[live] = sign;
            ++live;
            antecedent += sign * static_cast<std::int64_t>(scratch_[cell * chans + chans - 1]);
        }
        if (antecedent <= 0) return;
        // Division is monotone, so this rejects exactly the boxes where no
        // joint count could pass the emission check below.
        const double total = static_cast<double>(ctx_.train->rows());
        if (static_cast<double>(antecedent) / total < params_.min_support) return;

        counts_.assign(chans - 1, 0);
        for (std::size_t c = 0; c < live; ++c) {
            const std::size_t base = corner_base[c];
            if (corner_sign[c] > 0) {
                for (std::size_t ch = 0; ch + 1 < chans; ++ch)
                    counts_[ch] += static_cast<std::int64_t>(scratch_[base + ch]);
            } else {
                for (std::size_t ch = 0; ch + 1 < chans; ++ch)
                    counts_[ch] -= static_cast<std::int64_t>(scratch_[base + ch]);
            }
        }

        for (std::size_t v = 0; v + 1 < chans; ++v) {
            const std::int64_t joint = counts_[v];
            if (joint <= 0) continue;
            const double support = static_cast<double>(joint) / total;
            if (support < params_.min_support) continue;
            const double confidence =
                static_cast<double>(joint) / static_cast<double>(antecedent);
            if (confidence < params_.min_confidence) continue;
            QuantRule rule;
            rule.consequent = ctx_.viable_labels[v];
            rule.support = support;
            rule.confidence = confidence;
            rule.antecedent.reserve(s);
            for (std::size_t i = 0; i < s; ++i) {
                const BinnedInterval& iv =
                    ctx_.axes[features[i]].intervals[choice_[i]];
                rule.antecedent.push_back(
                    RuleItem{ctx_.train->features[features[i]], iv.interval});
            }
            normalize_rule(rule);
            out.push_back(std::move(rule));
        }
    }

    const MiningContext& ctx_;
    const MiningParams& params_;
    std::vector<std::size_t> dims_;
    std::vector<std::size_t> strides_;
    std::vector<std::uint32_t> choice_;
    std::vector<std::uint32_t> scratch_;
    std::vector<std::int64_t> counts_;
};

}  // namespace

std::vector<Interval> QuantGrid::candidate_intervals(std::size_t feature) const {
    const std::vector<double>& c = cuts[feature];
    const std::size_t m = c.size() - 1;
    std::vector<Interval> out;
    if (m == 0) {
        out.push_back({c[0], c[0]});
        out.push_back({-kInf, c[0]});
        out.push_back({c[0], kInf});
        out.push_back({-kInf, kInf});
        return out;
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j <= m; ++j) out.push_back({c[i], c[j]});
    for (std::size_t j = 1; j <= m; ++j) out.push_back({-kInf, c[j]});
    for (std::size_t i = 0; i + 1 <= m; ++i) out.push_back({c[i], kInf});
    out.push_back({-kInf, kInf});
    return out;
}

QuantGrid build_grid(const LabeledFrame& train, int cuts_per_feature) {
    if (train.rows() == 0) throw InvalidArgumentError("cannot build a grid on an empty frame");
    if (cuts_per_feature < 2) throw InvalidArgumentError("cuts_per_feature must be at least 2");
    QuantGrid grid;
    grid.features = train.features;
    grid.cuts.resize(train.cols());
    for (std::size_t f = 0; f < train.cols(); ++f) {
        std::vector<double> col = train.column(f);
        std::sort(col.begin(), col.end());
        std::vector<double>& cuts = grid.cuts[f];
        for (int k = 0; k <= cuts_per_feature; ++k) {
            const double q =
                quantile_sorted(col, static_cast<double>(k) / cuts_per_feature);
            if (cuts.empty() || q > cuts.back()) cuts.push_back(q);
        }
    }
    return grid;
}

RuleSet mine_rules(const LabeledFrame& train, const QuantGrid& grid, const MiningParams& params) {
    validate_params(params);
    if (train.rows() == 0) throw InvalidArgumentError("cannot mine an empty frame");
    if (grid.features != train.features)
        throw InvalidArgumentError("grid was built for a different feature list");

    MiningContext ctx;
    ctx.train = &train;

    // Class priors; a consequent whose prior is already below min_support
    // can never reach it (support only shrinks when items constrain rows).
    std::vector<std::size_t> label_counts(kModeCount, 0);
    for (int label : train.labels) label_counts[static_cast<std::size_t>(label)]++;
    std::vector<std::int16_t> slot_of_label(kModeCount, -1);
    for (int label = 0; label < kModeCount; ++label) {
        if (label_counts[static_cast<std::size_t>(label)] == 0) continue;
        const double prior = static_cast<double>(label_counts[static_cast<std::size_t>(label)]) /
                             static_cast<double>(train.rows());
        if (params.prune_rare_consequents && prior < params.min_support) continue;
        slot_of_label[static_cast<std::size_t>(label)] =
            static_cast<std::int16_t>(ctx.viable_labels.size());
        ctx.viable_labels.push_back(label);
    }
    ctx.channels = ctx.viable_labels.size() + 1;
    ctx.label_slot.resize(train.rows());
    for (std::size_t r = 0; r < train.rows(); ++r)
        ctx.label_slot[r] = slot_of_label[static_cast<std::size_t>(train.labels[r])];

    ctx.axes.resize(train.cols());
    for (std::size_t f = 0; f < train.cols(); ++f) {
        FeatureAxis& axis = ctx.axes[f];
        const std::vector<double>& cuts = grid.cuts[f];
        axis.bin_count = static_cast<std::uint32_t>(2 * (cuts.size() - 1) + 1);
        axis.intervals = reduced_intervals(cuts);
        axis.row_bins.resize(train.rows());
        for (std::size_t r = 0; r < train.rows(); ++r)
            axis.row_bins[r] = fine_bin(cuts, train.at(r, f));
    }

    std::vector<QuantRule> pool;
    if (!ctx.viable_labels.empty()) {
        const unsigned workers = resolve_workers(params.workers);
        for (int level = 1; level <= params.max_antecedents; ++level) {
            const std::size_t s = static_cast<std::size_t>(level);
            const std::vector<std::uint32_t> combos = combinations(train.cols(), level);
            const std::size_t combo_count = combos.size() / s;

            std::vector<std::vector<QuantRule>> local(workers);
            std::vector<ItemsetQuantifier> quantifiers(workers,
                                                       ItemsetQuantifier(ctx, params));
            parallel_for(combo_count, workers, [&](unsigned w, std::size_t i) {
                quantifiers[w].quantify({combos.data() + i * s, s}, local[w]);
            });
            // Joining the workers is the level barrier; merge order is
            // irrelevant because the final ordering is canonical.
            for (auto& chunk : local)
                pool.insert(pool.end(), std::make_move_iterator(chunk.begin()),
                            std::make_move_iterator(chunk.end()));
        }
    }
    return prune_dominated(std::move(pool), params);
}

RuleStats check_rule(const QuantRule& rule, const LabeledFrame& frame) {
    std::vector<std::size_t> columns;
    columns.reserve(rule.antecedent.size());
    for (const RuleItem& item : rule.antecedent)
        columns.push_back(frame.feature_index(item.feature));

    RuleStats stats;
    stats.total_rows = frame.rows();
    for (std::size_t r = 0; r < frame.rows(); ++r) {
        bool holds = true;
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (!rule.antecedent[i].interval.contains(frame.at(r, columns[i]))) {
                holds = false;
                break;
            }
        }
        if (!holds) continue;
        stats.antecedent_rows++;
        if (frame.labels[r] == rule.consequent) stats.joint_rows++;
    }
    stats.support = static_cast<double>(stats.joint_rows) / static_cast<double>(stats.total_rows);
    stats.confidence = stats.antecedent_rows == 0
                           ? 0.0
                           : static_cast<double>(stats.joint_rows) /
                                 static_cast<double>(stats.antecedent_rows);
    return stats;
}

bool dominates(const QuantRule& a, const QuantRule& b) {
    if (a.consequent != b.consequent) return false;
    if (a.antecedent.size() > b.antecedent.size()) return false;

    // Both antecedents are sorted by feature name; march through b.
    bool strictly_wider = false;
    std::size_t bi = 0;
    for (const RuleItem& ia : a.antecedent) {
        while (bi < b.antecedent.size() && b.antecedent[bi].feature < ia.feature) ++bi;
        if (bi >= b.antecedent.size() || b.antecedent[bi].feature != ia.feature) return false;
        const Interval& ib = b.antecedent[bi].interval;
        if (!ia.interval.contains(ib)) return false;
        strictly_wider = strictly_wider || ia.interval.strictly_contains(ib);
        ++bi;
    }
    if (a.support < b.support || a.confidence < b.confidence) return false;
    const bool proper_subset = a.antecedent.size() < b.antecedent.size();
    return proper_subset || strictly_wider || a.support > b.support ||
           a.confidence > b.confidence;
}

RuleSet prune_dominated(std::vector<QuantRule> rules, MiningParams params) {
    for (QuantRule& r : rules) normalize_rule(r);
    std::sort(rules.begin(), rules.end(), rule_less);
    rules.erase(std::unique(rules.begin(), rules.end()), rules.end());

    // Bucket rules by (consequent, feature-name set); dominators of a rule
    // can only sit in buckets keyed by subsets of its features.
    using Key = std::pair<int, std::vector<std::string>>;
    std::map<Key, std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i < rules.size(); ++i) {
        Key key{rules[i].consequent, {}};
        for (const RuleItem& item : rules[i].antecedent) key.second.push_back(item.feature);
        buckets[std::move(key)].push_back(i);
    }

    std::vector<char> dominated(rules.size(), 0);
    for (std::size_t i = 0; i < rules.size(); ++i) {
        const QuantRule& b = rules[i];
        const std::size_t k = b.antecedent.size();
        if (k > 20) throw InvalidArgumentError("antecedent too large for dominance pruning");
        const std::size_t masks = std::size_t{1} << k;
        Key key{b.consequent, {}};
        for (std::size_t mask = 1; mask < masks && !dominated[i]; ++mask) {
            key.second.clear();
            for (std::size_t j = 0; j < k; ++j)
                if (mask & (std::size_t{1} << j)) key.second.push_back(b.antecedent[j].feature);
            const auto it = buckets.find(key);
            if (it == buckets.end()) continue;
            for (std::size_t candidate : it->second) {
                if (candidate == i) continue;
                if (dominates(rules[candidate], b)) {
                    dominated[i] = 1;
                    break;
                }
            }
        }
    }

    RuleSet out;
    out.params = params;
    for (std::size_t i = 0; i < rules.size(); ++i)
        if (!dominated[i]) out.rules.push_back(std::move(rules[i]));
    return out;
}

}  // namespace tep
