#pragma once

#include "parxad/datagen.hpp"
#include "parxad/detector.hpp"
#include "parxad/trainer.hpp"

#include <span>
#include <vector>

namespace parxad {

struct ConfusionCounts {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;
    long long tn = 0;

    double precision() const { return tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp); }
    double recall() const { return tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn); }
    double f1() const {
        const double p = precision(), r = recall();
        return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    }
};

/// Hour-granularity confusion matrix: a record matches a label when (meter,
/// stamp) agree. Labels and records before `after` are ignored; tn is derived
/// from scored_hours when the caller knows it (0 otherwise).
ConfusionCounts evaluate(const std::vector<InjectedAnomaly>& labels,
                         const std::vector<AnomalyRecord>& records, HourStamp after,
                         long long scored_hours = 0);

struct SweepPoint {
    double epsilon;
    long long anomalies;
    ConfusionCounts counts; // filled when labels were provided
};

/// Replays the same stream at several thresholds over one fixed snapshot.
std::vector<SweepPoint> sweep_epsilon(const ModelSnapshot& snapshot, const Fleet& stream,
                                      const TemperatureSeries& temps, const DetectorConfig& base,
                                      std::span<const double> epsilons,
                                      const std::vector<InjectedAnomaly>* labels = nullptr,
                                      HourStamp after = HourStamp{0}, int threads = 1);

enum class RefreshScenario { Daily, EveryTenDays, Never };
const char* to_string(RefreshScenario s);

struct RefreshPoint {
    RefreshScenario scenario;
    long long anomalies = 0;
    int retrains = 0;
};

struct RefreshStudyOptions {
    DetectorConfig config;
    DayIndex detect_start_day = 0; // train on data before this day, detect after
    int threads = 1;
};

/// Fig. 8-style study: initial models from the history before
/// detect_start_day, then hour-by-hour detection over the rest while
/// refreshing models per scenario (daily / every 10 days / never).
std::vector<RefreshPoint> refresh_study(const Fleet& readings, const TemperatureSeries& temps,
                                        const RefreshStudyOptions& opts);

struct ResidualHistogram {
    std::vector<double> edges;      // size bins + 1
    std::vector<long long> counts;  // size bins
    long long n = 0;
    double mu = 0.0;
    double sigma = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

/// ln-L1 residual distribution of one trained cell (Fig. 4-style data).
ResidualHistogram residual_histogram(const ConsumptionSeries& series,
                                     const TemperatureSeries& temps, const DetectorConfig& config,
                                     Season season, DayType day_type = DayType::AllDays,
                                     int bins = 30);

/// Sample skewness (m3 / m2^1.5) used by the histogram; exposed for tests.
double skewness(std::span<const double> samples);

struct BenchPoint {
    int meters = 0;
    double generate_seconds = 0.0;
    double train_serial_seconds = 0.0;
    double train_parallel_seconds = 0.0;
    double detect_seconds = 0.0; // full replay over the horizon
    long long detect_hours = 0;
};

/// Desk-scale scaling curves: generates fleets of the given sizes, then times
/// serial vs parallel training and a detection replay.
std::vector<BenchPoint> scaling_run(std::span<const int> meter_counts, int days,
                                    std::uint64_t seed, const DetectorConfig& config, int threads);

} // namespace parxad
