#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace prpo {

struct HistogramBin {
    double center = 0.0;
    double proportion = 0.0;

    bool operator==(const HistogramBin&) const = default;
};

struct MetricReport {
    double srcc = 0.0;
    double plcc = 0.0;
    std::size_t n = 0;
    std::vector<HistogramBin> error_histogram;

    bool operator==(const MetricReport&) const = default;
};

/// Spearman rank correlation with average ranks for ties. Throws BadArgument
/// for n < 2 or mismatched lengths and DegenerateInput for a constant vector.
double srcc(std::span<const double> pred, std::span<const double> truth);

/// Pearson linear correlation; same error contract as `srcc`.
double plcc(std::span<const double> pred, std::span<const double> truth);

/// 1-based fractional ranks; tied values share the mean of their positions.
std::vector<double> fractional_ranks(std::span<const double> values);

/// Relative frequency of pred - truth in bins of `bin_width` centered on
/// integer multiples of the width. Bins are returned in ascending order.
std::vector<HistogramBin> error_distribution(std::span<const double> pred, std::span<const double> truth,
                                             double bin_width);

MetricReport evaluate(std::span<const double> pred, std::span<const double> truth, double bin_width = 0.25);

}  // namespace prpo
