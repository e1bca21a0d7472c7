#include "tep/acquisition.hpp"

#include <algorithm>
#include <ostream>

#include "tep/errors.hpp"
#include "tep/stats.hpp"

namespace tep {

const VariableBaseline& BaselineModel::for_variable(std::size_t index) const {
    if (index >= stats.size())
        throw InvalidArgumentError("no baseline fitted for variable index " +
                                   std::to_string(index));
    return stats[index];
}

std::size_t BaselineModel::variable_index(const std::string& name) const {
    auto it = std::find(variables.begin(), variables.end(), name);
    if (it == variables.end())
        throw InvalidArgumentError("no baseline fitted for variable '" + name + "'");
    return static_cast<std::size_t>(it - variables.begin());
}

BaselineModel fit_baseline(const LabeledFrame& normal, double coverage) {
    if (normal.rows() == 0) throw InvalidArgumentError("cannot fit baseline on an empty frame");
    if (!(coverage > 0.0) || coverage > 1.0)
        throw InvalidArgumentError("coverage must be in (0, 1]");

    BaselineModel model;
    model.variables = normal.features;
    model.coverage = coverage;
    model.stats.resize(normal.cols());

    const double tail = (1.0 - coverage) / 2.0;
    for (std::size_t c = 0; c < normal.cols(); ++c) {
        std::vector<double> col = normal.column(c);
        VariableBaseline& vb = model.stats[c];
        vb.mean = mean(col);
        std::sort(col.begin(), col.end());
        vb.lower = quantile_sorted(col, tail);
        vb.upper = quantile_sorted(col, 1.0 - tail);
        vb.lower = std::min(vb.lower, vb.mean);
        vb.upper = std::max(vb.upper, vb.mean);
    }
    return model;
}

void set_margin(BaselineModel& model, const std::string& variable, double lower, double upper) {
    VariableBaseline& vb = model.stats[model.variable_index(variable)];
    if (lower > upper) throw InvalidArgumentError("margin lower bound above upper bound");
    vb.lower = std::min(lower, vb.mean);
    vb.upper = std::max(upper, vb.mean);
}

EventStream compress_series(std::span<const double> series, const BaselineModel& baseline,
                            std::size_t variable_index) {
    const VariableBaseline& vb = baseline.for_variable(variable_index);
    EventStream stream;
    stream.variable = baseline.variables[variable_index];
    stream.length = series.size();
    for (std::size_t k = 0; k < series.size(); ++k) {
        const double v = series[k];
        if (v < vb.lower || v > vb.upper) stream.events.push_back(Event{k, v});
    }
    return stream;
}

std::vector<double> reconstruct_series(const EventStream& events, const BaselineModel& baseline,
                                       HoldMode hold) {
    const std::size_t var = baseline.variable_index(events.variable);
    const VariableBaseline& vb = baseline.for_variable(var);
    std::vector<double> out(events.length, vb.mean);
    std::size_t prev = 0;
    double held = vb.mean;
    bool first = true;
    for (const Event& e : events.events) {
        if (e.index >= events.length)
            throw InvalidArgumentError("event index " + std::to_string(e.index) +
                                       " >= stream length " + std::to_string(events.length));
        if (!first && e.index <= prev)
            throw InvalidArgumentError("event indices must be strictly increasing");
        if (hold == HoldMode::kLastValue) {
            for (std::size_t k = first ? 0 : prev + 1; k < e.index; ++k) out[k] = held;
        }
        out[e.index] = e.value;
        held = e.value;
        prev = e.index;
        first = false;
    }
    if (hold == HoldMode::kLastValue && !first) {
        for (std::size_t k = prev + 1; k < events.length; ++k) out[k] = held;
    }
    return out;
}

double compression_rate(const EventStream& events) {
    if (events.length == 0)
        throw InvalidArgumentError("compression rate undefined for zero-length stream");
    return 1.0 - static_cast<double>(events.events.size()) / static_cast<double>(events.length);
}

void write_events_csv(std::span<const EventStream> streams, std::ostream& out) {
    out << "variable,index,value\n";
    for (const EventStream& s : streams)
        for (const Event& e : s.events)
            out << s.variable << ',' << e.index << ',' << format_double(e.value) << '\n';
}

void write_compression_csv(std::span<const EventStream> streams, std::ostream& out) {
    out << "variable,transmitted,total,rate\n";
    for (const EventStream& s : streams) {
        out << s.variable << ',' << s.events.size() << ',' << s.length << ','
            << format_double(compression_rate(s)) << '\n';
    }
}

}  // namespace tep
