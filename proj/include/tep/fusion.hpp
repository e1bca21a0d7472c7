#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tep/frame.hpp"

namespace tep {

// Symmetric matrix of normalized dependency scores in [0, 1].
struct DependencyMatrix {
    std::vector<std::string> features;
    std::vector<double> scores;  // n x n, row-major
    int bins = 0;
    std::size_t samples = 0;

    std::size_t size() const { return features.size(); }
    double at(std::size_t i, std::size_t j) const { return scores[i * size() + j]; }
    double& at(std::size_t i, std::size_t j) { return scores[i * size() + j]; }
};

struct ThresholdStat {
    double threshold = 0.0;
    std::size_t count = 0;     // variables with some off-diagonal score > threshold
    double fraction = 0.0;
};

// Equal-frequency bin assignment (rank-determined, values tied at an edge
// fall into the lower bin). Exposed for the estimator tests.
std::vector<int> equal_frequency_bins(std::span<const double> values, int bins);

// Plug-in histogram estimate of I(X;Y) over equal-frequency bins, natural
// log. Term summation happens in sorted order so the result is exactly
// symmetric in its arguments.
double mutual_information(std::span<const double> x, std::span<const double> y, int bins);

// Binned marginal entropy H(X) under the same estimator.
double binned_entropy(std::span<const double> x, int bins);

// Pairwise normalized dependency NMI(X,Y) = I / sqrt(Hx * Hy), clamped to
// [0, 1]. Constant (zero entropy) variables score 0 against everything;
// the diagonal is 1 by convention.
DependencyMatrix dependency_matrix(const LabeledFrame& frame, int bins, unsigned workers = 0);

// For each threshold t: how many variables have at least one partner with
// score > t.
std::vector<ThresholdStat> dependency_stats(const DependencyMatrix& matrix,
                                            std::span<const double> thresholds);

// Greedy redundancy pruning: visit variables by descending total
// dependency and drop any whose score with an already kept variable
// exceeds the threshold.
std::vector<std::string> select_representatives(const DependencyMatrix& matrix,
                                                double redundancy_threshold);

// CSV with feature names as header row and first column.
void write_matrix_csv(const DependencyMatrix& matrix, std::ostream& out);
// CSV: threshold,count,fraction
void write_stats_csv(std::span<const ThresholdStat> stats, std::ostream& out);

}  // namespace tep
