#include "prpo/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "prpo/error.hpp"

namespace prpo {

namespace {

void check_pair(std::span<const double> pred, std::span<const double> truth)
{
    if (pred.size() != truth.size())
        throw Error(ErrorCode::BadArgument, "prediction and truth lengths differ (" + std::to_string(pred.size()) +
                                                " vs " + std::to_string(truth.size()) + ")");
    if (pred.size() < 2)
        throw Error(ErrorCode::BadArgument, "correlation needs n >= 2");
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (!std::isfinite(pred[i]) || !std::isfinite(truth[i]))
            throw Error(ErrorCode::InvalidValue, "non-finite value at index " + std::to_string(i));
}

void check_not_constant(std::span<const double> v, const char* which)
{
    if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; }))
        throw Error(ErrorCode::DegenerateInput, std::string(which) + " vector is constant");
}

double pearson(std::span<const double> x, std::span<const double> y)
{
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

std::vector<double> fractional_ranks(std::span<const double> values)
{
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(values.size());
    std::size_t start = 0;
    while (start < idx.size()) {
        std::size_t end = start + 1;
        while (end < idx.size() && values[idx[end]] == values[idx[start]])
            ++end;
        // positions start+1 .. end (1-based) share their mean
        const double shared = 0.5 * static_cast<double>(start + 1 + end);
        for (std::size_t p = start; p < end; ++p)
            ranks[idx[p]] = shared;
        start = end;
    }
    return ranks;
}

double srcc(std::span<const double> pred, std::span<const double> truth)
{
    check_pair(pred, truth);
    check_not_constant(pred, "prediction");
    check_not_constant(truth, "truth");
    const auto rp = fractional_ranks(pred);
    const auto rt = fractional_ranks(truth);
    return pearson(rp, rt);
}

double plcc(std::span<const double> pred, std::span<const double> truth)
{
    check_pair(pred, truth);
    check_not_constant(pred, "prediction");
    check_not_constant(truth, "truth");
    return pearson(pred, truth);
}

std::vector<HistogramBin> error_distribution(std::span<const double> pred, std::span<const double> truth,
                                             double bin_width)
{
    if (!(bin_width > 0.0))
        throw Error(ErrorCode::BadArgument, "bin_width must be positive");
    if (pred.size() != truth.size())
        throw Error(ErrorCode::BadArgument, "prediction and truth lengths differ");
    if (pred.empty())
        return {};

    std::map<long long, std::size_t> counts;
    for (std::size_t i = 0; i < pred.size(); ++i)
        ++counts[std::llround((pred[i] - truth[i]) / bin_width)];

    std::vector<HistogramBin> out;
    out.reserve(counts.size());
    const double n = static_cast<double>(pred.size());
    for (const auto& [bin, count] : counts)
        out.push_back({static_cast<double>(bin) * bin_width, static_cast<double>(count) / n});
    return out;
}

MetricReport evaluate(std::span<const double> pred, std::span<const double> truth, double bin_width)
{
    MetricReport r;
    r.srcc = srcc(pred, truth);
    r.plcc = plcc(pred, truth);
    r.n = pred.size();
    r.error_histogram = error_distribution(pred, truth, bin_width);
    return r;
}

}  // namespace prpo
