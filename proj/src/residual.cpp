#include "parxad/residual.hpp"

#include <cmath>
#include <numbers>

namespace parxad {

double log_l1_residual(double actual, double predicted, double floor) {
    if (!std::isfinite(actual) || !std::isfinite(predicted))
        throw InvalidInputError("log_l1_residual: non-finite input");
    return std::log(std::max(std::abs(actual - predicted), floor));
}

GaussianParams fit_gaussian(std::span<const double> samples, double sigma_floor) {
    const long long n = static_cast<long long>(samples.size());
    if (n < 2)
        throw InsufficientDataError("gaussian fit needs at least 2 samples", n);
    double sum = 0.0;
    for (double x : samples) sum += x;
    const double mu = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double x : samples) ss += (x - mu) * (x - mu);
    const double sigma = std::sqrt(ss / static_cast<double>(n)); // population variance
    GaussianParams p;
    p.mu = mu;
    p.sigma = std::max(sigma, sigma_floor);
    p.n_samples = n;
    return p;
}

double density(double x, const GaussianParams& params) {
    const double z = (x - params.mu) / params.sigma;
    return std::exp(-0.5 * z * z) / (params.sigma * std::sqrt(2.0 * std::numbers::pi));
}

ClassifyResult classify(double actual, double predicted, const GaussianParams& params,
                        const DetectorConfig& config) {
    ClassifyResult r;
    r.log_residual = log_l1_residual(actual, predicted, config.residual_floor);
    r.score = density(r.log_residual, params);
    r.anomaly = r.score < config.epsilon;
    return r;
}

} // namespace parxad
