#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tep/frame.hpp"
#include "tep/stats.hpp"

namespace testutil {

// Scoped unique temp directory.
class TempDir {
  public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("tepminer_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Column-oriented frame builder for small hand-made cases.
inline tep::LabeledFrame make_frame(const std::vector<std::string>& features,
                                    const std::vector<std::vector<double>>& columns,
                                    const std::vector<int>& labels) {
    tep::LabeledFrame frame;
    frame.features = features;
    frame.labels = labels;
    frame.values.resize(labels.size() * features.size());
    for (std::size_t c = 0; c < columns.size(); ++c)
        for (std::size_t r = 0; r < labels.size(); ++r) frame.at(r, c) = columns[c][r];
    return frame;
}

// Random dense frame with a few distinct labels; values intentionally mix
// repeated and continuous levels so grids get duplicate-cut cases.
inline tep::LabeledFrame random_frame(tep::SplitRng& rng, std::size_t rows, std::size_t cols,
                                      int label_count) {
    tep::LabeledFrame frame;
    for (std::size_t c = 0; c < cols; ++c) frame.features.push_back("f" + std::to_string(c));
    frame.values.resize(rows * cols);
    frame.labels.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        frame.labels[r] = static_cast<int>(rng.next_int(0, label_count - 1));
        for (std::size_t c = 0; c < cols; ++c) {
            if (rng.next_double() < 0.3)
                frame.at(r, c) = static_cast<double>(rng.next_int(0, 4));  // tied levels
            else
                frame.at(r, c) = 10.0 * rng.next_double();
        }
    }
    return frame;
}

}  // namespace testutil
