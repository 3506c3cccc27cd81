#pragma once

#include "parxad/config.hpp"
#include "parxad/series.hpp"
#include "parxad/time.hpp"

#include <Eigen/Dense>

#include <array>
#include <span>
#include <string>
#include <vector>

namespace parxad {

/// Piecewise-linear temperature transforms: cooling load above 20 C, heating
/// load below 16 C, overheating load below 5 C. All strict inequalities, so
/// each breakpoint itself maps to zero.
struct ExogenousFeatures {
    double xt1 = 0.0; // cooling:     T - 20 if T > 20
    double xt2 = 0.0; // heating:     16 - T if T < 16
    double xt3 = 0.0; // overheating:  5 - T if T < 5
};

ExogenousFeatures exogenous_features(double celsius);

/// Fitted PARX coefficients for one (meter, season, day-type) cell:
/// prediction = sum_i alphas[i] * lag_i + beta . (xt1, xt2, xt3) [+ intercept].
struct ParxModel {
    std::string meter_id;
    Season season = 0;
    DayType day_type = DayType::AllDays;
    int order_p = 0;
    std::vector<double> alphas; // per lag day, most recent first
    std::array<double, 3> betas{0.0, 0.0, 0.0};
    double intercept = 0.0; // stays 0 unless fit_intercept was on
    bool has_intercept = false;
    HourStamp trained_through{};
    long long n_samples = 0;
};

/// Predicted kWh from the p most recent same-season readings (most recent
/// first) and the hour's temperature.
double predict(const ParxModel& model, std::span<const double> lags, double celsius);

/// One regression row per usable day: [lag_1 .. lag_p, xt1, xt2, xt3 (, 1)],
/// target = that day's reading at the season. Days with any missing lag or
/// missing temperature are excluded, not imputed.
struct RegressionProblem {
    Eigen::MatrixXd design;        // n x (p + 3 [+ 1])
    Eigen::VectorXd target;        // n
    std::vector<HourStamp> stamps; // per row, the target hour
    int order_p = 0;
    bool has_intercept = false;

    long long n_rows() const { return design.rows(); }
};

struct ProblemOptions {
    DayTypePolicy policy = DayTypePolicy::Unified;
    const HolidayCalendar* holidays = nullptr;
    bool fit_intercept = false;
};

/// Builds the cell's regression problem. Throws InsufficientDataError (with
/// the surviving row count) when fewer rows remain than columns.
RegressionProblem build_problem(const ConsumptionSeries& series, const TemperatureSeries& temps,
                                Season season, DayType day_type, int order_p,
                                const ProblemOptions& opts = {});

/// Ordinary least squares: minimizes ||X w - y||_2. Solves the normal
/// equations by LDLT; falls back to a rank-revealing complete orthogonal
/// decomposition (minimum-norm solution) when the Gram matrix is
/// near-singular.
Eigen::VectorXd fit_ols(const RegressionProblem& problem);

/// Bundles a fitted problem into a ParxModel.
ParxModel make_model(std::string meter_id, Season season, DayType day_type,
                     const RegressionProblem& problem, const Eigen::VectorXd& coeffs);

} // namespace parxad
