#pragma once

#include "parxad/config.hpp"
#include "parxad/series.hpp"
#include "parxad/snapshot.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace parxad {

class ServingStore;

/// One flagged reading. score is the Gaussian density of the ln-L1 residual
/// and is always < epsilon_used.
struct AnomalyRecord {
    std::string meter_id;
    HourStamp stamp;
    Season season = 0;
    double actual = 0.0;
    double predicted = 0.0;
    double score = 0.0;
    double epsilon_used = 0.0;
    std::int64_t model_version = 0;
};

/// Wire line: meter_id,stamp,season,actual,predicted,score,model_version.
std::string record_to_csv(const AnomalyRecord& record);
/// Accepts the 7-field wire line or the store's 8-field line (with
/// epsilon_used before model_version).
std::optional<AnomalyRecord> record_from_csv(const std::string& line);

void write_records_csv(const std::filesystem::path& file,
                       const std::vector<AnomalyRecord>& records);
std::vector<AnomalyRecord> read_records_csv(const std::filesystem::path& file);

/// Sliding window of one meter's last p days per season. Each season is
/// anchored at its own newest day: entries older than (newest - p) are
/// evicted, so a season never holds more than p readings.
class MeterWindow {
public:
    explicit MeterWindow(int order_p) : order_p_(order_p) {}

    enum class Ingest { Inserted, Replaced, DroppedOld };

    Ingest ingest(HourStamp stamp, double kwh);

    /// Lag vector for a prediction at (day, season): readings at day-1 ..
    /// day-order_p, most recent first. nullopt unless all are present.
    std::optional<std::vector<double>> lags(DayIndex day, Season season, int order_p) const;

    std::optional<double> at(DayIndex day, Season season) const;
    HourStamp last_updated() const { return last_updated_; }

private:
    struct Slot {
        DayIndex day;
        double kwh;
    };
    int order_p_;
    HourStamp last_updated_{std::numeric_limits<std::int64_t>::min()};
    std::array<std::vector<Slot>, kSeasonsPerDay> seasons_; // sorted by day descending
};

/// Per-meter windows plus ingestion counters for the whole stream.
class WindowSet {
public:
    explicit WindowSet(int order_p) : order_p_(order_p) {}

    int order_p() const { return order_p_; }

    struct Counters {
        std::size_t inserted = 0;
        std::size_t duplicates = 0;  // last write wins
        std::size_t dropped_old = 0; // older than the window
    };

    void ingest(const MeterReading& reading);
    const MeterWindow* find(const std::string& meter_id) const;
    const Counters& counters() const { return counters_; }

private:
    int order_p_;
    std::unordered_map<std::string, MeterWindow> windows_;
    Counters counters_;
};

/// All readings that share one stamp — the hourly micro-batch.
struct HourBatch {
    HourStamp stamp;
    std::vector<MeterReading> readings;
};

struct DetectStats {
    std::size_t scored = 0;
    std::size_t anomalies = 0;
    std::size_t skipped_no_model = 0;
    std::size_t skipped_incomplete_lags = 0;
    std::size_t deferred_hours = 0;
};

/// Scores one hourly batch against a snapshot. Day-type lookup uses the
/// snapshot's policy; epsilon and residual floor come from `config` so the
/// detector can sweep thresholds over a fixed snapshot. Windows are read-only
/// here: ingest the batch afterwards.
std::vector<AnomalyRecord> detect_hour(const HourBatch& batch, double celsius,
                                       const ModelSnapshot& snapshot, const WindowSet& windows,
                                       const DetectorConfig& config, int threads = 1,
                                       DetectStats* stats = nullptr);

/// Hourly micro-batch source. next() returns batches in stamp order and
/// nullopt at end of stream.
class ReadingSource {
public:
    virtual ~ReadingSource() = default;
    virtual std::optional<HourBatch> next() = 0;
};

/// Replays a fleet already in memory hour by hour.
class FleetReplaySource : public ReadingSource {
public:
    explicit FleetReplaySource(const Fleet& fleet);
    std::optional<HourBatch> next() override;

private:
    std::vector<HourBatch> batches_;
    std::size_t at_ = 0;
};

/// Reads the readings-CSV wire format from a stream, grouping consecutive
/// lines by stamp. Lines must arrive hour-ordered.
class CsvStreamSource : public ReadingSource {
public:
    explicit CsvStreamSource(std::istream& in, std::string origin);
    std::optional<HourBatch> next() override;

private:
    std::istream& in_;
    std::string origin_;
    std::optional<MeterReading> pending_;
    std::size_t lineno_ = 0;
    bool header_done_ = false;
};

struct StreamOptions {
    DetectorConfig config;
    int threads = 1;
    bool append_to_store = true;   // write anomalies back to the store
    std::ostream* record_sink = nullptr; // wire-format lines, one per record
    std::ostream* log = nullptr;
};

struct StreamStats {
    std::size_t hours = 0;
    std::size_t records = 0;
    std::size_t snapshot_reloads = 0;
    std::size_t deferred_pending = 0; // hours still waiting for temperature
    DetectStats detect;
    WindowSet::Counters window;
};

/// The speed layer: per hourly batch, refresh the snapshot from the store,
/// score the batch (deferring hours with no temperature until one appears),
/// then ingest it into the windows. Runs until the source ends.
StreamStats run_stream(ReadingSource& source, ServingStore& store,
                       const TemperatureSeries& temps, const StreamOptions& opts);

/// Detection over an in-memory stream against a fixed snapshot (no store, no
/// version refresh): the batch-evaluation workhorse.
std::vector<AnomalyRecord> replay_detect(const ModelSnapshot& snapshot, const Fleet& stream,
                                         const TemperatureSeries& temps,
                                         const DetectorConfig& config, int threads = 1,
                                         DetectStats* stats = nullptr);

} // namespace parxad
