#include "parxad/boxplot.hpp"

#include "parxad/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace parxad {

namespace {

double quantile_type7(const std::vector<double>& sorted, double q) {
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - std::floor(h);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

} // namespace

Quartiles quartiles(std::span<const double> samples) {
    if (samples.size() < 4)
        throw InsufficientDataError("quartiles need at least 4 samples",
                                    static_cast<long long>(samples.size()));
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    Quartiles q;
    q.q1 = quantile_type7(sorted, 0.25);
    q.median = quantile_type7(sorted, 0.50);
    q.q3 = quantile_type7(sorted, 0.75);
    return q;
}

std::vector<BoxplotOutlier> detect_boxplot(const ConsumptionSeries& series) {
    std::array<std::vector<double>, kSeasonsPerDay> by_season;
    for (const auto& [stamp, kwh] : series.readings())
        by_season[static_cast<std::size_t>(stamp.season())].push_back(kwh);

    std::array<Quartiles, kSeasonsPerDay> q;
    for (int s = 0; s < kSeasonsPerDay; ++s) {
        if (by_season[static_cast<std::size_t>(s)].size() < 4)
            throw InsufficientDataError(
                "season " + std::to_string(s) + " of meter " + series.meter_id() +
                    " has fewer than 4 readings",
                static_cast<long long>(by_season[static_cast<std::size_t>(s)].size()));
        q[static_cast<std::size_t>(s)] = quartiles(by_season[static_cast<std::size_t>(s)]);
    }

    std::vector<BoxplotOutlier> out;
    for (const auto& [stamp, kwh] : series.readings()) {
        const auto& f = q[static_cast<std::size_t>(stamp.season())];
        if (kwh > f.upper_fence())
            out.push_back({stamp, stamp.season(), kwh, true});
        else if (kwh < f.lower_fence())
            out.push_back({stamp, stamp.season(), kwh, false});
    }
    return out;
}

} // namespace parxad
