#include "tep/ensemble.hpp"

#include <algorithm>
#include <ostream>

#include <json.hpp>

#include "tep/errors.hpp"
#include "tep/parallel.hpp"

namespace tep {

namespace {

// Rule with antecedent features resolved to column indices once.
struct BoundRule {
    const QuantRule* rule = nullptr;
    std::vector<std::size_t> columns;
};

std::vector<BoundRule> bind_rules(const RuleSet& rules, const LabeledFrame& frame) {
    std::vector<BoundRule> bound;
    bound.reserve(rules.rules.size());
    for (const QuantRule& r : rules.rules) {
        BoundRule b;
        b.rule = &r;
        b.columns.reserve(r.antecedent.size());
        for (const RuleItem& item : r.antecedent)
            b.columns.push_back(frame.feature_index(item.feature));
        bound.push_back(std::move(b));
    }
    return bound;
}

bool fires(const BoundRule& b, std::span<const double> row) {
    for (std::size_t i = 0; i < b.columns.size(); ++i)
        if (!b.rule->antecedent[i].interval.contains(row[b.columns[i]])) return false;
    return true;
}

struct Vote {
    int label = 0;
    bool decided = false;
};

Vote vote_on_row(std::span<const BoundRule> bound, std::span<const double> row,
                 int fire_threshold, bool weight_by_confidence) {
    double weight[kModeCount] = {};
    double summed_confidence[kModeCount] = {};
    std::size_t fired = 0;
    for (const BoundRule& b : bound) {
        if (!fires(b, row)) continue;
        ++fired;
        const auto c = static_cast<std::size_t>(b.rule->consequent);
        weight[c] += weight_by_confidence ? b.rule->confidence : 1.0;
        summed_confidence[c] += b.rule->confidence;
    }
    if (fired <= static_cast<std::size_t>(std::max(fire_threshold, 0))) return {0, false};
    int best = 0;
    for (int c = 1; c < kModeCount; ++c) {
        const auto cc = static_cast<std::size_t>(c);
        const auto bb = static_cast<std::size_t>(best);
        if (weight[cc] > weight[bb] ||
            (weight[cc] == weight[bb] && summed_confidence[cc] > summed_confidence[bb])) {
            best = c;  // equal weight and confidence keeps the lower class id
        }
    }
    return {best, true};
}

}  // namespace

bool rule_fires(const QuantRule& rule, std::span<const double> instance,
                const std::vector<std::string>& features) {
    for (const RuleItem& item : rule.antecedent) {
        const auto it = std::find(features.begin(), features.end(), item.feature);
        if (it == features.end())
            throw InvalidArgumentError("instance lacks feature '" + item.feature + "'");
        const auto col = static_cast<std::size_t>(it - features.begin());
        if (col >= instance.size())
            throw InvalidArgumentError("instance shorter than its feature list");
        if (!item.interval.contains(instance[col])) return false;
    }
    return true;
}

int classify_instance(const RuleSet& rules, std::span<const double> instance,
                      const std::vector<std::string>& features, int fire_threshold,
                      bool weight_by_confidence) {
    double weight[kModeCount] = {};
    double summed_confidence[kModeCount] = {};
    std::size_t fired = 0;
    for (const QuantRule& r : rules.rules) {
        if (!rule_fires(r, instance, features)) continue;
        ++fired;
        const auto c = static_cast<std::size_t>(r.consequent);
        weight[c] += weight_by_confidence ? r.confidence : 1.0;
        summed_confidence[c] += r.confidence;
    }
    if (fired <= static_cast<std::size_t>(std::max(fire_threshold, 0))) return 0;
    int best = 0;
    for (int c = 1; c < kModeCount; ++c) {
        const auto cc = static_cast<std::size_t>(c);
        const auto bb = static_cast<std::size_t>(best);
        if (weight[cc] > weight[bb] ||
            (weight[cc] == weight[bb] && summed_confidence[cc] > summed_confidence[bb]))
            best = c;
    }
    return best;
}

ClassificationReport evaluate_ruleset(const RuleSet& rules, const LabeledFrame& test,
                                      int fire_threshold, const LabeledFrame* train,
                                      unsigned workers, bool weight_by_confidence) {
    const std::vector<BoundRule> bound = bind_rules(rules, test);

    const std::size_t rows = test.rows();
    const unsigned nworkers = resolve_workers(workers);
    std::vector<std::vector<std::size_t>> local_confusion(
        nworkers, std::vector<std::size_t>(static_cast<std::size_t>(kModeCount) * kModeCount, 0));
    std::vector<std::size_t> local_abstain(nworkers, 0);
    std::vector<std::size_t> local_decided_correct(nworkers, 0);

    parallel_for(rows, nworkers, [&](unsigned w, std::size_t r) {
        const Vote v = vote_on_row(bound, test.row(r), fire_threshold, weight_by_confidence);
        if (!v.decided) local_abstain[w]++;
        else if (v.label == test.labels[r]) local_decided_correct[w]++;
        local_confusion[w][static_cast<std::size_t>(test.labels[r]) * kModeCount +
                           static_cast<std::size_t>(v.label)]++;
    });

    ClassificationReport report;
    report.total_rows = rows;
    report.confusion.assign(static_cast<std::size_t>(kModeCount) * kModeCount, 0);
    std::size_t abstained = 0;
    std::size_t decided_correct = 0;
    for (unsigned w = 0; w < nworkers; ++w) {
        abstained += local_abstain[w];
        decided_correct += local_decided_correct[w];
        for (std::size_t i = 0; i < report.confusion.size(); ++i)
            report.confusion[i] += local_confusion[w][i];
    }

    report.class_counts.assign(kModeCount, 0);
    report.detection_rate.assign(kModeCount, 0.0);
    std::size_t normal_rows = 0;
    std::size_t false_alarms = 0;
    for (int t = 0; t < kModeCount; ++t) {
        std::size_t row_total = 0;
        for (int p = 0; p < kModeCount; ++p) row_total += report.confusion_at(t, p);
        report.class_counts[static_cast<std::size_t>(t)] = row_total;
        const std::size_t diag = report.confusion_at(t, t);
        report.correct += diag;
        if (row_total > 0)
            report.detection_rate[static_cast<std::size_t>(t)] =
                static_cast<double>(diag) / static_cast<double>(row_total);
        if (t == 0) {
            normal_rows = row_total;
            false_alarms = row_total - diag;
        }
    }
    report.accuracy = rows ? static_cast<double>(report.correct) / static_cast<double>(rows) : 0.0;
    report.abstain_rate = rows ? static_cast<double>(abstained) / static_cast<double>(rows) : 0.0;
    report.decided_rows = rows - abstained;
    report.false_alarm_rate =
        normal_rows ? static_cast<double>(false_alarms) / static_cast<double>(normal_rows) : 0.0;

    // Correct decisions among decided rows; abstentions are excluded here
    // (the headline accuracy counts them against whatever they decode to).
    if (report.decided_rows > 0)
        report.accuracy_excluding_abstentions =
            static_cast<double>(decided_correct) / static_cast<double>(report.decided_rows);

    report.rules_per_class.assign(kModeCount, 0);
    for (const QuantRule& r : rules.rules)
        report.rules_per_class[static_cast<std::size_t>(r.consequent)]++;

    if (train != nullptr) {
        const std::vector<BoundRule> train_bound = bind_rules(rules, *train);
        std::vector<std::size_t> covered(nworkers, 0);
        parallel_for(train->rows(), nworkers, [&](unsigned w, std::size_t r) {
            for (const BoundRule& b : train_bound) {
                if (b.rule->consequent == train->labels[r] && fires(b, train->row(r))) {
                    covered[w]++;
                    return;
                }
            }
        });
        std::size_t total_covered = 0;
        for (std::size_t c : covered) total_covered += c;
        report.train_coverage = train->rows() ? static_cast<double>(total_covered) /
                                                    static_cast<double>(train->rows())
                                              : 0.0;
    }
    return report;
}

std::string report_to_json(const ClassificationReport& report) {
    nlohmann::json doc;
    doc["total_rows"] = report.total_rows;
    doc["correct"] = report.correct;
    doc["accuracy"] = report.accuracy;
    doc["accuracy_excluding_abstentions"] = report.accuracy_excluding_abstentions;
    doc["decided_rows"] = report.decided_rows;
    doc["false_alarm_rate"] = report.false_alarm_rate;
    doc["abstain_rate"] = report.abstain_rate;
    doc["detection_rate"] = report.detection_rate;
    doc["class_counts"] = report.class_counts;
    doc["rules_per_class"] = report.rules_per_class;
    nlohmann::json confusion = nlohmann::json::array();
    for (int t = 0; t < kModeCount; ++t) {
        nlohmann::json row = nlohmann::json::array();
        for (int p = 0; p < kModeCount; ++p) row.push_back(report.confusion_at(t, p));
        confusion.push_back(std::move(row));
    }
    doc["confusion"] = std::move(confusion);
    if (report.train_coverage >= 0.0) doc["train_coverage"] = report.train_coverage;
    return doc.dump(2) + "\n";
}

void write_report_text(const ClassificationReport& report, std::ostream& out) {
    out << "rows:            " << report.total_rows << '\n';
    out << "accuracy:        " << format_double(report.accuracy) << '\n';
    out << "decided acc.:    " << format_double(report.accuracy_excluding_abstentions) << '\n';
    out << "false alarms:    " << format_double(report.false_alarm_rate) << '\n';
    out << "abstain rate:    " << format_double(report.abstain_rate) << '\n';
    out << "mode  rows  detection  rules\n";
    for (int c = 0; c < kModeCount; ++c) {
        const auto cc = static_cast<std::size_t>(c);
        out << c << ' ' << report.class_counts[cc] << ' '
            << format_double(report.detection_rate[cc]) << ' ' << report.rules_per_class[cc]
            << '\n';
    }
}

void write_confusion_csv(const ClassificationReport& report, std::ostream& out) {
    out << "true\\pred";
    for (int p = 0; p < kModeCount; ++p) out << ',' << p;
    out << '\n';
    for (int t = 0; t < kModeCount; ++t) {
        out << t;
        for (int p = 0; p < kModeCount; ++p) out << ',' << report.confusion_at(t, p);
        out << '\n';
    }
}

}  // namespace tep
