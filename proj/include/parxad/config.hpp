#pragma once

#include "parxad/errors.hpp"
#include "parxad/time.hpp"

namespace parxad {

/// Knobs shared by the trainer and the detector. Echoed into every snapshot.
struct DetectorConfig {
    /// Density threshold: a reading is an anomaly when the Gaussian density of
    /// its ln-L1 residual falls below epsilon. This is a density value, NOT a
    /// tail probability — epsilon 0.05 is not a 5% significance level.
    double epsilon = 0.05;

    /// Autoregression order p: number of lag days per season.
    int order_p = 3;

    DayTypePolicy day_type_policy = DayTypePolicy::Unified;

    /// Floor on |actual - predicted| before taking the log, so perfect
    /// predictions stay finite.
    double residual_floor = 1e-6;

    /// Floor on the fitted sigma of ln-residuals, so constant-residual cells
    /// keep a finite peak density.
    double sigma_floor = 1e-3;

    /// Adds a constant column to the regression. Off by default: the PARX
    /// equation has no intercept.
    bool fit_intercept = false;

    /// Cells fitted on fewer rows than this carry a low-sample warning.
    int min_rows_warn = 30;

    /// Gaussian residual fit on held-out residuals instead of in-sample ones
    /// (last quarter of rows held out). Default off: in-sample matches the
    /// training algorithm as published.
    bool holdout_residuals = false;

    HolidayCalendar holidays;

    /// Minimum usable regression rows: one per column.
    int min_rows() const { return order_p + 3 + (fit_intercept ? 1 : 0); }

    void validate() const {
        if (!(epsilon > 0.0)) throw InvalidInputError("epsilon must be > 0");
        if (order_p < 1) throw InvalidInputError("order p must be >= 1");
        if (!(residual_floor > 0.0)) throw InvalidInputError("residual_floor must be > 0");
        if (!(sigma_floor > 0.0)) throw InvalidInputError("sigma_floor must be > 0");
    }
};

} // namespace parxad
