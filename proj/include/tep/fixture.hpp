#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace tep {

// Parameters for the synthetic smoke-test corpus. The files mimic the
// benchmark layout: dXX.dat / dXX_te.dat, 52 whitespace-separated columns,
// d00.dat stored transposed (one variable per line), fault effects
// starting at the injection row in test recordings.
struct FixtureSpec {
    std::vector<int> modes = {0, 1, 2};
    std::size_t train_rows = 120;
    std::size_t test_rows = 220;
    std::uint64_t seed = 0x7e9a11ce;
};

// Writes the corpus into `dir` (created if needed). Output bytes are a
// pure function of the parameters.
void write_fixture_corpus(const std::filesystem::path& dir, const FixtureSpec& spec = {});

}  // namespace tep
