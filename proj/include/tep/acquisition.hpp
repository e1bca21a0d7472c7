#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tep/frame.hpp"

namespace tep {

struct VariableBaseline {
    double mean = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

// Per-variable normal-operation statistics used as transmission margins.
struct BaselineModel {
    std::vector<std::string> variables;
    std::vector<VariableBaseline> stats;
    double coverage = 0.0;

    const VariableBaseline& for_variable(std::size_t index) const;
    std::size_t variable_index(const std::string& name) const;
};

struct Event {
    std::size_t index = 0;  // time slot k
    double value = 0.0;
};

// Sparse out-of-margin samples for one variable.
struct EventStream {
    std::string variable;
    std::size_t length = 0;
    std::vector<Event> events;
};

enum class HoldMode {
    kMean,       // silence decodes to the baseline mean
    kLastValue,  // silence repeats the last transmitted sample
};

// Fits mean plus the central `coverage` empirical quantile interval per
// variable (coverage 0.9 -> 5th..95th percentiles). The interval is
// widened to include the mean when the quantiles fall on one side of it;
// otherwise held samples would re-trigger transmission.
BaselineModel fit_baseline(const LabeledFrame& normal, double coverage);

// Optional absolute margin override for one variable.
void set_margin(BaselineModel& model, const std::string& variable, double lower, double upper);

// Transmits exactly the samples lying strictly outside [lower, upper].
EventStream compress_series(std::span<const double> series, const BaselineModel& baseline,
                            std::size_t variable_index);

// Inverse of compress_series at the fusion point: transmitted slots carry
// their values, silent slots the held estimate.
std::vector<double> reconstruct_series(const EventStream& events, const BaselineModel& baseline,
                                       HoldMode hold = HoldMode::kMean);

// Fraction of samples NOT transmitted: 1 - |events| / length.
double compression_rate(const EventStream& events);

// CSV: variable,index,value
void write_events_csv(std::span<const EventStream> streams, std::ostream& out);
// CSV: variable,transmitted,total,rate
void write_compression_csv(std::span<const EventStream> streams, std::ostream& out);

}  // namespace tep
