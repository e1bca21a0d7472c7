#include "tep/fixture.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "tep/errors.hpp"
#include "tep/frame.hpp"
#include "tep/stats.hpp"

namespace tep {

namespace {

// Each fault shifts a six-variable group; neighbouring faults overlap on
// purpose so single-variable rules cannot separate everything.
bool fault_affects(int fault, std::size_t variable) {
    if (fault == 0) return false;
    const std::size_t start = (static_cast<std::size_t>(fault) * 3) % kVariableCount;
    for (std::size_t k = 0; k < 6; ++k)
        if ((start + k) % kVariableCount == variable) return true;
    return false;
}

double sample_value(std::size_t variable, std::size_t row, int active_fault, SplitRng& rng) {
    const double base = 10.0 + 0.5 * static_cast<double>(variable);
    const double t = static_cast<double>(row);
    // Shared slow dynamics: variables in the same block load on the same
    // latent drivers, giving the cross-correlation structure a real plant
    // shows. Block 52/4 leaves four strongly coupled groups.
    const double latent_a = std::sin(0.021 * t) + 0.6 * std::sin(0.093 * t);
    const double latent_b = std::cos(0.034 * t) - 0.5 * std::sin(0.067 * t);
    const std::size_t block = variable / 13;
    const double coupling = (block % 2 == 0 ? 2.2 : -1.8) * latent_a +
                            (block < 2 ? 1.6 : -2.0) * latent_b;
    const double drift =
        1.5 * std::sin(0.05 * t + 0.3 * static_cast<double>(variable));
    const double noise = 2.0 * rng.next_double() - 1.0;
    double value = base + coupling + drift + noise;
    if (active_fault != 0 && fault_affects(active_fault, variable))
        value += 6.0 + 0.05 * static_cast<double>(variable);
    return value;
}

void write_rows(std::ofstream& out, int mode, std::size_t rows, std::size_t fault_from,
                SplitRng& rng) {
    for (std::size_t r = 0; r < rows; ++r) {
        const int active = r >= fault_from ? mode : 0;
        for (std::size_t v = 0; v < static_cast<std::size_t>(kVariableCount); ++v) {
            if (v) out << ' ';
            out << format_double(sample_value(v, r, active, rng));
        }
        out << '\n';
    }
}

void write_transposed(std::ofstream& out, int mode, std::size_t rows, std::size_t fault_from,
                      SplitRng& rng) {
    // One variable per line, matching the training-normal file layout.
    std::vector<std::vector<double>> table(kVariableCount, std::vector<double>(rows));
    for (std::size_t r = 0; r < rows; ++r) {
        const int active = r >= fault_from ? mode : 0;
        for (std::size_t v = 0; v < static_cast<std::size_t>(kVariableCount); ++v)
            table[v][r] = sample_value(v, r, active, rng);
    }
    for (const auto& row : table) {
        for (std::size_t r = 0; r < rows; ++r) {
            if (r) out << ' ';
            out << format_double(row[r]);
        }
        out << '\n';
    }
}

}  // namespace

void write_fixture_corpus(const std::filesystem::path& dir, const FixtureSpec& spec) {
    if (spec.test_rows <= kInjectionIndex)
        throw InvalidArgumentError("fixture test files need more than " +
                                   std::to_string(kInjectionIndex) + " rows");
    std::filesystem::create_directories(dir);
    for (int mode : spec.modes) {
        char name[16];
        for (bool test : {false, true}) {
            std::snprintf(name, sizeof(name), "d%02d%s.dat", mode, test ? "_te" : "");
            std::ofstream out(dir / name);
            if (!out) throw MissingDataError("cannot write fixture file " + (dir / name).string());
            // Distinct deterministic stream per file.
            SplitRng rng(spec.seed ^ (static_cast<std::uint64_t>(mode) * 0x9e3779b9u + (test ? 1 : 0)));
            const std::size_t rows = test ? spec.test_rows : spec.train_rows;
            const std::size_t fault_from = test ? kInjectionIndex : 0;
            if (mode == 0 && !test)
                write_transposed(out, mode, rows, fault_from, rng);
            else
                write_rows(out, mode, rows, fault_from, rng);
        }
    }
}

}  // namespace tep
