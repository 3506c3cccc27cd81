#pragma once

#include "parxad/config.hpp"
#include "parxad/series.hpp"
#include "parxad/snapshot.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace parxad {

class ServingStore;

/// A cell (meter, season, day-type) that could not be trained, and why.
struct SkippedCell {
    std::string meter_id;
    Season season = 0;
    DayType day_type = DayType::AllDays;
    long long rows = 0;
    std::string reason;
};

struct MeterTrainResult {
    std::vector<SeasonDetectionModel> models; // season-major, then day type
    std::vector<SkippedCell> skipped;
    int low_sample_cells = 0; // fitted on fewer than config.min_rows_warn rows
};

/// Fits every (season, day-type) cell of one meter: regression problem, PARX
/// coefficients, in-sample ln-L1 residuals, Gaussian. Cells without enough
/// data are skipped and reported. Throws InsufficientDataError only when
/// every cell is untrainable.
MeterTrainResult train_meter(const ConsumptionSeries& series, const TemperatureSeries& temps,
                             const DetectorConfig& config);

struct FleetTrainResult {
    ModelSnapshot snapshot;
    std::vector<SkippedCell> skipped;
    std::vector<std::string> untrainable_meters;
    std::size_t low_sample_cells = 0;
};

/// Trains the whole fleet (meters in parallel) into one snapshot. Results are
/// bit-identical for any thread count.
FleetTrainResult train_fleet(const Fleet& fleet, const TemperatureSeries& temps,
                             const DetectorConfig& config, int threads, std::int64_t version,
                             HourStamp created_at);

struct BatchCycleOptions {
    DetectorConfig config;
    int threads = 0;
    double interval_hours = 24.0;
    int max_cycles = 0; // 0 = run until stop
    std::ostream* log = nullptr;
    const std::atomic<bool>* stop = nullptr;
};

struct BatchCycleStats {
    int cycles = 0;
    int failures = 0;
    std::int64_t last_version = 0;
};

/// The batch layer loop: each cycle re-reads ALL readings (no incremental
/// state), trains a full snapshot and publishes it atomically. A failing
/// cycle leaves the previous snapshot live and the loop keeps going.
BatchCycleStats run_batch_cycle(ServingStore& store, const std::filesystem::path& readings_file,
                                const std::filesystem::path& temps_file,
                                const BatchCycleOptions& opts);

} // namespace parxad
