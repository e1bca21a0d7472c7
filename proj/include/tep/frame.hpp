#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace tep {

inline constexpr int kVariableCount = 52;   // 11 manipulated + 41 measured
inline constexpr int kModeCount = 22;       // mode 0 (normal) + faults 1..21
inline constexpr double kSamplePeriodMinutes = 3.0;
inline constexpr double kFaultOnsetHours = 8.0;

// Row index at which a fault becomes active in a test recording:
// 8 h * 60 min / 3 min = 160.
inline constexpr std::size_t kInjectionIndex =
    static_cast<std::size_t>(kFaultOnsetHours * 60.0 / kSamplePeriodMinutes);

// Dense numeric table of observations x features with one mode label per
// row. Values are stored row-major.
struct LabeledFrame {
    std::vector<std::string> features;
    std::vector<double> values;  // rows() * cols(), row-major
    std::vector<int> labels;     // each in {0, ..., 21}
    double sample_period_minutes = kSamplePeriodMinutes;

    std::size_t rows() const { return labels.size(); }
    std::size_t cols() const { return features.size(); }

    double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }

    std::span<const double> row(std::size_t r) const {
        return {values.data() + r * cols(), cols()};
    }

    std::vector<double> column(std::size_t c) const;

    // Index of a feature by name; throws InvalidArgumentError if absent.
    std::size_t feature_index(const std::string& name) const;

    // Checks rectangularity, label range and feature-name uniqueness.
    void validate() const;
};

struct Corpus {
    LabeledFrame train;
    LabeledFrame test;
};

// Canonical name of variable i (0-based): "v01" .. "v52".
std::string variable_name(std::size_t index);

// Parses one whitespace-separated TEP data file. The token grid must form
// either an N x 52 table (one observation per line) or its 52 x N
// transpose, which the public distribution uses for d00.dat. All labels
// are set to fault_id; call label_samples afterwards for test recordings.
LabeledFrame load_tep_file(const std::filesystem::path& path, int fault_id);

// Labels the fault-onset split: for a test recording of fault_id >= 1 the
// first kInjectionIndex rows are normal operation, the rest carry the
// fault. Training recordings keep a single label per file.
LabeledFrame label_samples(LabeledFrame frame, int fault_id, bool is_test);

// Appends, per feature and per lag L, a difference column x[t] - x[t-L]
// named like "v07_d1". The first max(lags) rows are dropped so the result
// has no fabricated entries.
LabeledFrame expand_lagged_features(const LabeledFrame& frame, const std::vector<int>& lags);

// Loads dXX.dat / dXX_te.dat for every requested mode from data_dir and
// concatenates them into train/test frames (lag-expanded per file when
// requested, so differences never cross file boundaries).
Corpus assemble_corpus(const std::filesystem::path& data_dir, const std::vector<int>& faults,
                       bool lag_expand, const std::vector<int>& lags = {1, 2});

// CSV with a feature-name header plus trailing "label" column. Values are
// written with shortest round-trip formatting, so load-then-save is
// bit-identical.
void write_frame_csv(const LabeledFrame& frame, std::ostream& out);
void write_frame_csv(const LabeledFrame& frame, const std::filesystem::path& path);
LabeledFrame read_frame_csv(std::istream& in);
LabeledFrame read_frame_csv(const std::filesystem::path& path);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

}  // namespace tep
