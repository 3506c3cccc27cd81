#pragma once

#include "parxad/series.hpp"

#include <span>
#include <vector>

namespace parxad {

struct Quartiles {
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;

    double iqr() const { return q3 - q1; }
    double lower_fence() const { return q1 - 1.5 * iqr(); }
    double upper_fence() const { return q3 + 1.5 * iqr(); }
};

/// Linear-interpolation quantiles between closest ranks (the usual "type 7"
/// convention). Throws InsufficientDataError below 4 samples.
Quartiles quartiles(std::span<const double> samples);

struct BoxplotOutlier {
    HourStamp stamp;
    Season season = 0;
    double kwh = 0.0;
    bool above_upper = false; // else below the lower fence
};

/// The comparison baseline: per-season boxplot with 1.5*IQR fences, union over
/// the 24 seasons, in stamp order. Every season must have at least 4 readings.
std::vector<BoxplotOutlier> detect_boxplot(const ConsumptionSeries& series);

} // namespace parxad
