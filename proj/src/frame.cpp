#include "tep/frame.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "tep/errors.hpp"

namespace tep {

namespace {

struct Token {
    std::string_view text;
    std::size_t line;    // 1-based
    std::size_t column;  // 1-based
};

double parse_double_token(const Token& tok) {
    std::string_view s = tok.text;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec == std::errc{} && ptr == s.data() + s.size()) return value;
    // Fortran-style exponents ("1.5D+02") show up in some exports.
    std::string fixed(s);
    for (char& c : fixed) {
        if (c == 'D' || c == 'd') c = 'e';
    }
    auto [ptr2, ec2] = std::from_chars(fixed.data(), fixed.data() + fixed.size(), value);
    if (ec2 == std::errc{} && ptr2 == fixed.data() + fixed.size()) return value;
    throw ParseError("cannot parse numeric token '" + std::string(tok.text) + "'", tok.line,
                     tok.column);
}

}  // namespace

std::vector<double> LabeledFrame::column(std::size_t c) const {
    std::vector<double> out(rows());
    for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, c);
    return out;
}

std::size_t LabeledFrame::feature_index(const std::string& name) const {
    auto it = std::find(features.begin(), features.end(), name);
    if (it == features.end())
        throw InvalidArgumentError("unknown feature '" + name + "'");
    return static_cast<std::size_t>(it - features.begin());
}

void LabeledFrame::validate() const {
    if (values.size() != rows() * cols())
        throw InvalidArgumentError("frame value table is not rectangular");
    for (int label : labels) {
        if (label < 0 || label >= kModeCount)
            throw InvalidArgumentError("label " + std::to_string(label) + " outside 0..21");
    }
    std::unordered_set<std::string_view> seen;
    for (const auto& f : features) {
        if (!seen.insert(f).second)
            throw InvalidArgumentError("duplicate feature name '" + f + "'");
    }
}

std::string variable_name(std::size_t index) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "v%02zu", index + 1);
    return buf;
}

LabeledFrame load_tep_file(const std::filesystem::path& path, int fault_id) {
    if (fault_id < 0 || fault_id >= kModeCount)
        throw InvalidArgumentError("fault id " + std::to_string(fault_id) + " outside 0..21");
    std::ifstream in(path);
    if (!in) throw MissingDataError("cannot open data file " + path.string());
    std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    // Tokenize line by line so the grid orientation is visible.
    std::vector<Token> tokens;
    std::vector<std::size_t> line_token_counts;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= contents.size()) {
        const std::size_t eol = contents.find('\n', pos);
        const std::size_t end = (eol == std::string::npos) ? contents.size() : eol;
        ++line_no;
        std::size_t count = 0;
        std::size_t i = pos;
        while (i < end) {
            while (i < end && std::isspace(static_cast<unsigned char>(contents[i]))) ++i;
            if (i >= end) break;
            const std::size_t start = i;
            while (i < end && !std::isspace(static_cast<unsigned char>(contents[i]))) ++i;
            tokens.push_back(Token{std::string_view(contents).substr(start, i - start), line_no,
                                   start - pos + 1});
            ++count;
        }
        if (count > 0) line_token_counts.push_back(count);
        if (eol == std::string::npos) break;
        pos = eol + 1;
    }

    if (tokens.empty()) throw MalformedFileError("empty data file " + path.string());

    const std::size_t grid_rows = line_token_counts.size();
    const bool rectangular =
        std::all_of(line_token_counts.begin(), line_token_counts.end(),
                    [&](std::size_t c) { return c == line_token_counts.front(); });
    if (!rectangular)
        throw MalformedFileError("ragged token grid in " + path.string());
    const std::size_t grid_cols = line_token_counts.front();

    const std::size_t n = kVariableCount;
    bool transpose = false;
    if (grid_cols == n) {
        transpose = false;  // one observation per line
    } else if (grid_rows == n) {
        transpose = true;  // one variable per line (d00.dat layout)
    } else {
        throw MalformedFileError("token grid " + std::to_string(grid_rows) + "x" +
                                 std::to_string(grid_cols) + " in " + path.string() +
                                 " does not fit 52 variables");
    }

    const std::size_t obs = transpose ? grid_cols : grid_rows;
    LabeledFrame frame;
    frame.features.reserve(n);
    for (std::size_t c = 0; c < n; ++c) frame.features.push_back(variable_name(c));
    frame.values.resize(obs * n);
    frame.labels.assign(obs, fault_id);

    for (std::size_t t = 0; t < tokens.size(); ++t) {
        const double v = parse_double_token(tokens[t]);
        const std::size_t gr = t / grid_cols;
        const std::size_t gc = t % grid_cols;
        if (transpose)
            frame.at(gc, gr) = v;
        else
            frame.at(gr, gc) = v;
    }
    return frame;
}

LabeledFrame label_samples(LabeledFrame frame, int fault_id, bool is_test) {
    if (fault_id < 0 || fault_id >= kModeCount)
        throw InvalidArgumentError("fault id " + std::to_string(fault_id) + " outside 0..21");
    if (fault_id == 0) {
        std::fill(frame.labels.begin(), frame.labels.end(), 0);
        return frame;
    }
    if (!is_test) {
        std::fill(frame.labels.begin(), frame.labels.end(), fault_id);
        return frame;
    }
    if (kInjectionIndex >= frame.rows())
        throw InvalidLabelingError("injection index " + std::to_string(kInjectionIndex) +
                                   " >= row count " + std::to_string(frame.rows()));
    for (std::size_t r = 0; r < frame.rows(); ++r)
        frame.labels[r] = r < kInjectionIndex ? 0 : fault_id;
    return frame;
}

LabeledFrame expand_lagged_features(const LabeledFrame& frame, const std::vector<int>& lags) {
    if (lags.empty()) return frame;
    int max_lag = 0;
    for (int lag : lags) {
        if (lag <= 0) throw InvalidArgumentError("lag offsets must be positive");
        max_lag = std::max(max_lag, lag);
    }
    if (frame.rows() <= static_cast<std::size_t>(max_lag))
        throw InvalidArgumentError("frame with " + std::to_string(frame.rows()) +
                                   " rows cannot support lag " + std::to_string(max_lag));

    const std::size_t skip = static_cast<std::size_t>(max_lag);
    const std::size_t out_rows = frame.rows() - skip;
    const std::size_t base = frame.cols();

    LabeledFrame out;
    out.sample_period_minutes = frame.sample_period_minutes;
    out.features = frame.features;
    for (std::size_t c = 0; c < base; ++c)
        for (int lag : lags)
            out.features.push_back(frame.features[c] + "_d" + std::to_string(lag));

    out.values.resize(out_rows * out.features.size());
    out.labels.resize(out_rows);
    for (std::size_t r = 0; r < out_rows; ++r) {
        const std::size_t src = r + skip;
        out.labels[r] = frame.labels[src];
        for (std::size_t c = 0; c < base; ++c) out.at(r, c) = frame.at(src, c);
        std::size_t dst = base;
        for (std::size_t c = 0; c < base; ++c) {
            for (int lag : lags) {
                out.at(r, dst++) =
                    frame.at(src, c) - frame.at(src - static_cast<std::size_t>(lag), c);
            }
        }
    }
    return out;
}

namespace {

void append_rows(LabeledFrame& dst, const LabeledFrame& src) {
    if (dst.features.empty()) {
        dst = src;
        return;
    }
    if (dst.features != src.features)
        throw InvalidArgumentError("cannot concatenate frames with different feature lists");
    dst.values.insert(dst.values.end(), src.values.begin(), src.values.end());
    dst.labels.insert(dst.labels.end(), src.labels.begin(), src.labels.end());
}

std::string mode_file_name(int fault_id, bool test) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "d%02d%s.dat", fault_id, test ? "_te" : "");
    return buf;
}

}  // namespace

Corpus assemble_corpus(const std::filesystem::path& data_dir, const std::vector<int>& faults,
                       bool lag_expand, const std::vector<int>& lags) {
    if (faults.empty()) throw InvalidArgumentError("empty fault selection yields an empty corpus");
    std::vector<int> ordered = faults;
    std::sort(ordered.begin(), ordered.end());
    ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());

    Corpus corpus;
    for (int fault : ordered) {
        for (bool test : {false, true}) {
            const auto path = data_dir / mode_file_name(fault, test);
            if (!std::filesystem::exists(path))
                throw MissingDataError("missing data file " + path.string());
            LabeledFrame frame = label_samples(load_tep_file(path, fault), fault, test);
            if (lag_expand) frame = expand_lagged_features(frame, lags);
            append_rows(test ? corpus.test : corpus.train, frame);
        }
    }
    corpus.train.validate();
    corpus.test.validate();
    return corpus;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void write_frame_csv(const LabeledFrame& frame, std::ostream& out) {
    for (std::size_t c = 0; c < frame.cols(); ++c) {
        if (c) out << ',';
        out << frame.features[c];
    }
    out << ",label\n";
    for (std::size_t r = 0; r < frame.rows(); ++r) {
        for (std::size_t c = 0; c < frame.cols(); ++c) {
            if (c) out << ',';
            out << format_double(frame.at(r, c));
        }
        out << ',' << frame.labels[r] << '\n';
    }
}

void write_frame_csv(const LabeledFrame& frame, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw MissingDataError("cannot open " + path.string() + " for writing");
    write_frame_csv(frame, out);
}

LabeledFrame read_frame_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw MalformedFileError("empty CSV frame");
    LabeledFrame frame;
    {
        std::stringstream header(line);
        std::string field;
        while (std::getline(header, field, ',')) frame.features.push_back(field);
        if (frame.features.empty() || frame.features.back() != "label")
            throw MalformedFileError("CSV frame header must end with 'label'");
        frame.features.pop_back();
    }
    const std::size_t cols = frame.features.size();
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::size_t start = 0;
        std::size_t field_index = 0;
        while (start <= line.size()) {
            std::size_t comma = line.find(',', start);
            const std::size_t end = (comma == std::string::npos) ? line.size() : comma;
            const Token tok{std::string_view(line).substr(start, end - start), line_no, start + 1};
            if (field_index < cols) {
                frame.values.push_back(parse_double_token(tok));
            } else if (field_index == cols) {
                frame.labels.push_back(static_cast<int>(parse_double_token(tok)));
            } else {
                throw MalformedFileError("too many fields on CSV line " + std::to_string(line_no));
            }
            ++field_index;
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (field_index != cols + 1)
            throw MalformedFileError("wrong field count on CSV line " + std::to_string(line_no));
    }
    frame.validate();
    return frame;
}

LabeledFrame read_frame_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingDataError("cannot open frame CSV " + path.string());
    return read_frame_csv(in);
}

}  // namespace tep
