#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tep/frame.hpp"
#include "tep/rules.hpp"

namespace tep {

struct ClassificationReport {
    std::size_t total_rows = 0;
    std::size_t correct = 0;
    double accuracy = 0.0;
    // Accuracy over the rows where the ensemble actually fired (> threshold).
    double accuracy_excluding_abstentions = 0.0;
    std::size_t decided_rows = 0;
    double false_alarm_rate = 0.0;  // normal rows predicted faulty / normal rows
    double abstain_rate = 0.0;      // rows with fired count <= threshold / rows
    std::vector<double> detection_rate;            // per class, indexed by mode id
    std::vector<std::size_t> class_counts;         // rows per true class
    std::vector<std::size_t> confusion;            // kModeCount x kModeCount, row = true
    std::vector<std::size_t> rules_per_class;      // rule distribution by consequent
    double train_coverage = -1.0;  // fraction of training rows covered; -1 if not computed

    std::size_t confusion_at(int truth, int predicted) const {
        return confusion[static_cast<std::size_t>(truth) * kModeCount +
                         static_cast<std::size_t>(predicted)];
    }
};

// True iff every antecedent interval contains the instance's value
// (closed bounds). The instance must provide all antecedent features.
bool rule_fires(const QuantRule& rule, std::span<const double> instance,
                const std::vector<std::string>& features);

// Majority vote over fired rules. Returns mode 0 (no alarm) unless
// strictly more than fire_threshold rules fire; ties break by higher
// summed confidence, then lower class id. With weight_by_confidence the
// vote weight is the rule's confidence instead of 1.
int classify_instance(const RuleSet& rules, std::span<const double> instance,
                      const std::vector<std::string>& features, int fire_threshold,
                      bool weight_by_confidence = false);

// Classifies every row of `test`. When `train` is given, also reports the
// fraction of training rows covered by at least one rule (fired with
// matching label).
ClassificationReport evaluate_ruleset(const RuleSet& rules, const LabeledFrame& test,
                                      int fire_threshold, const LabeledFrame* train = nullptr,
                                      unsigned workers = 0, bool weight_by_confidence = false);

std::string report_to_json(const ClassificationReport& report);
void write_report_text(const ClassificationReport& report, std::ostream& out);
void write_confusion_csv(const ClassificationReport& report, std::ostream& out);

}  // namespace tep
