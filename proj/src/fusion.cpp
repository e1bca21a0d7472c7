#include "tep/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "tep/errors.hpp"
#include "tep/parallel.hpp"
#include "tep/stats.hpp"

namespace tep {

namespace {

// Internal bin edges at quantiles 1/bins .. (bins-1)/bins.
std::vector<double> bin_edges(std::span<const double> values, int bins) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> edges;
    edges.reserve(static_cast<std::size_t>(bins) - 1);
    for (int j = 1; j < bins; ++j)
        edges.push_back(quantile_sorted(sorted, static_cast<double>(j) / bins));
    return edges;
}

// Sums the multiset of contribution terms in sorted order, making the
// result independent of histogram iteration order.
double stable_sum(std::vector<double> terms) {
    std::sort(terms.begin(), terms.end());
    double sum = 0.0;
    for (double t : terms) sum += t;
    return sum;
}

double entropy_from_counts(std::span<const std::size_t> counts, std::size_t total) {
    std::vector<double> terms;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        terms.push_back(-p * std::log(p));
    }
    return stable_sum(std::move(terms));
}

struct BinnedVariable {
    std::vector<int> bins;
    std::vector<std::size_t> counts;
    double entropy = 0.0;
};

BinnedVariable bin_variable(std::span<const double> values, int bins) {
    BinnedVariable out;
    out.bins = equal_frequency_bins(values, bins);
    out.counts.assign(static_cast<std::size_t>(bins), 0);
    for (int b : out.bins) out.counts[static_cast<std::size_t>(b)]++;
    out.entropy = entropy_from_counts(out.counts, values.size());
    return out;
}

double mutual_information_binned(const BinnedVariable& x, const BinnedVariable& y, int bins) {
    const std::size_t n = x.bins.size();
    std::vector<std::size_t> joint(static_cast<std::size_t>(bins) * bins, 0);
    for (std::size_t i = 0; i < n; ++i)
        joint[static_cast<std::size_t>(x.bins[i]) * bins + static_cast<std::size_t>(y.bins[i])]++;

    std::vector<double> terms;
    const double total = static_cast<double>(n);
    for (int a = 0; a < bins; ++a) {
        for (int b = 0; b < bins; ++b) {
            const std::size_t nab = joint[static_cast<std::size_t>(a) * bins + b];
            if (nab == 0) continue;
            const double pab = static_cast<double>(nab) / total;
            const double pa = static_cast<double>(x.counts[static_cast<std::size_t>(a)]) / total;
            const double pb = static_cast<double>(y.counts[static_cast<std::size_t>(b)]) / total;
            terms.push_back(pab * std::log(pab / (pa * pb)));
        }
    }
    return stable_sum(std::move(terms));
}

}  // namespace

std::vector<int> equal_frequency_bins(std::span<const double> values, int bins) {
    if (values.empty()) throw InvalidArgumentError("cannot bin an empty sample");
    if (bins < 2) throw InvalidArgumentError("bin count must be at least 2");
    const std::vector<double> edges = bin_edges(values, bins);
    std::vector<int> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        // Number of edges strictly below the value; ties sink to the lower bin.
        const auto it = std::lower_bound(edges.begin(), edges.end(), values[i]);
        out[i] = static_cast<int>(it - edges.begin());
    }
    return out;
}

double binned_entropy(std::span<const double> x, int bins) {
    return bin_variable(x, bins).entropy;
}

double mutual_information(std::span<const double> x, std::span<const double> y, int bins) {
    if (x.size() != y.size())
        throw InvalidArgumentError("mutual information requires equal-length series");
    const BinnedVariable bx = bin_variable(x, bins);
    const BinnedVariable by = bin_variable(y, bins);
    return mutual_information_binned(bx, by, bins);
}

DependencyMatrix dependency_matrix(const LabeledFrame& frame, int bins, unsigned workers) {
    if (frame.rows() == 0) throw InvalidArgumentError("cannot analyze an empty frame");
    const std::size_t n = frame.cols();

    DependencyMatrix matrix;
    matrix.features = frame.features;
    matrix.bins = bins;
    matrix.samples = frame.rows();
    matrix.scores.assign(n * n, 0.0);

    std::vector<BinnedVariable> binned(n);
    parallel_for(n, workers, [&](unsigned, std::size_t c) {
        binned[c] = bin_variable(frame.column(c), bins);
    });

    // Upper triangle only; each cell is independent so the fill order
    // cannot affect the result.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

    parallel_for(pairs.size(), workers, [&](unsigned, std::size_t p) {
        const auto [i, j] = pairs[p];
        double score = 0.0;
        if (binned[i].entropy > 0.0 && binned[j].entropy > 0.0) {
            const double mi = mutual_information_binned(binned[i], binned[j], bins);
            score = mi / std::sqrt(binned[i].entropy * binned[j].entropy);
            score = std::clamp(score, 0.0, 1.0);
        }
        matrix.at(i, j) = score;
        matrix.at(j, i) = score;
    });

    for (std::size_t i = 0; i < n; ++i) matrix.at(i, i) = 1.0;
    return matrix;
}

std::vector<ThresholdStat> dependency_stats(const DependencyMatrix& matrix,
                                            std::span<const double> thresholds) {
    const std::size_t n = matrix.size();
    std::vector<double> max_offdiag(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) max_offdiag[i] = std::max(max_offdiag[i], matrix.at(i, j));

    std::vector<ThresholdStat> stats;
    stats.reserve(thresholds.size());
    for (double t : thresholds) {
        if (!(t > 0.0) || !(t < 1.0))
            throw InvalidArgumentError("dependency threshold must be in (0, 1)");
        ThresholdStat s;
        s.threshold = t;
        s.count = static_cast<std::size_t>(
            std::count_if(max_offdiag.begin(), max_offdiag.end(), [&](double m) { return m > t; }));
        s.fraction = n ? static_cast<double>(s.count) / static_cast<double>(n) : 0.0;
        stats.push_back(s);
    }
    return stats;
}

std::vector<std::string> select_representatives(const DependencyMatrix& matrix,
                                                double redundancy_threshold) {
    if (!(redundancy_threshold > 0.0) || !(redundancy_threshold < 1.0))
        throw InvalidArgumentError("redundancy threshold must be in (0, 1)");
    const std::size_t n = matrix.size();
    std::vector<double> total(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) total[i] += matrix.at(i, j);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return total[a] > total[b];  // ties keep original feature order
    });

    std::vector<std::size_t> kept;
    for (std::size_t i : order) {
        bool redundant = false;
        for (std::size_t k : kept) {
            if (matrix.at(i, k) > redundancy_threshold) {
                redundant = true;
                break;
            }
        }
        if (!redundant) kept.push_back(i);
    }

    std::vector<std::string> names;
    names.reserve(kept.size());
    for (std::size_t i : kept) names.push_back(matrix.features[i]);
    return names;
}

void write_matrix_csv(const DependencyMatrix& matrix, std::ostream& out) {
    out << "feature";
    for (const auto& f : matrix.features) out << ',' << f;
    out << '\n';
    for (std::size_t i = 0; i < matrix.size(); ++i) {
        out << matrix.features[i];
        for (std::size_t j = 0; j < matrix.size(); ++j) out << ',' << format_double(matrix.at(i, j));
        out << '\n';
    }
}

void write_stats_csv(std::span<const ThresholdStat> stats, std::ostream& out) {
    out << "threshold,count,fraction\n";
    for (const ThresholdStat& s : stats)
        out << format_double(s.threshold) << ',' << s.count << ',' << format_double(s.fraction)
            << '\n';
}

}  // namespace tep
