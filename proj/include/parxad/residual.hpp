#pragma once

#include "parxad/config.hpp"
#include "parxad/parx.hpp"

#include <span>

namespace parxad {

/// Gaussian over ln-L1 residuals; equivalently, log-normal over the residuals
/// themselves. sigma uses the population (1/n) variance.
struct GaussianParams {
    double mu = 0.0;
    double sigma = 1.0;
    long long n_samples = 0;
};

/// ln(max(|actual - predicted|, floor)).
double log_l1_residual(double actual, double predicted, double floor);

/// Mean and population standard deviation of the samples; sigma clamped below
/// by sigma_floor. Throws InsufficientDataError for fewer than two samples.
GaussianParams fit_gaussian(std::span<const double> samples, double sigma_floor);

/// Normal probability density at x.
double density(double x, const GaussianParams& params);

struct ClassifyResult {
    bool anomaly = false;
    double score = 0.0;       // the density value
    double log_residual = 0.0;
};

/// Anomaly iff density(ln-L1 residual) < config.epsilon. Both tails flag:
/// residuals far above AND far below the typical magnitude score low.
ClassifyResult classify(double actual, double predicted, const GaussianParams& params,
                        const DetectorConfig& config);

/// PARX model plus its residual Gaussian: everything needed to score one
/// (meter, season, day-type) cell.
struct SeasonDetectionModel {
    ParxModel parx;
    GaussianParams gaussian;
};

} // namespace parxad
