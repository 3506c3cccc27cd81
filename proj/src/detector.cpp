#include "parxad/detector.hpp"

#include "parxad/csv.hpp"
#include "parxad/num.hpp"
#include "parxad/parallel.hpp"
#include "parxad/store.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

namespace parxad {

std::string record_to_csv(const AnomalyRecord& r) {
    std::string line = r.meter_id;
    line += ',';
    line += r.stamp.to_string();
    line += ',';
    line += std::to_string(r.season);
    line += ',';
    line += fmt_g17(r.actual);
    line += ',';
    line += fmt_g17(r.predicted);
    line += ',';
    line += fmt_g17(r.score);
    line += ',';
    line += std::to_string(r.model_version);
    return line;
}

std::optional<AnomalyRecord> record_from_csv(const std::string& line) {
    auto f = split_csv_line(line);
    if (f.size() != 7 && f.size() != 8) return std::nullopt;
    AnomalyRecord r;
    r.meter_id = f[0];
    auto stamp = HourStamp::parse(f[1]);
    auto season = parse_i64(f[2]);
    auto actual = parse_f64(f[3]);
    auto predicted = parse_f64(f[4]);
    auto score = parse_f64(f[5]);
    if (!stamp || !season || *season < 0 || *season > 23 || !actual || !predicted || !score)
        return std::nullopt;
    std::optional<long long> version;
    if (f.size() == 8) {
        auto eps = parse_f64(f[6]);
        if (!eps) return std::nullopt;
        r.epsilon_used = *eps;
        version = parse_i64(f[7]);
    } else {
        version = parse_i64(f[6]);
    }
    if (!version) return std::nullopt;
    r.stamp = *stamp;
    r.season = static_cast<Season>(*season);
    r.actual = *actual;
    r.predicted = *predicted;
    r.score = *score;
    r.model_version = *version;
    return r;
}

void write_records_csv(const std::filesystem::path& file,
                       const std::vector<AnomalyRecord>& records) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot open " + file.string() + " for writing");
    out << "meter_id,stamp,season,actual,predicted,score,model_version\n";
    for (const auto& r : records) out << record_to_csv(r) << '\n';
    if (!out) throw IoError("write failed: " + file.string());
}

std::vector<AnomalyRecord> read_records_csv(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open " + file.string());
    std::vector<AnomalyRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#' || line.rfind("meter_id", 0) == 0) continue;
        auto r = record_from_csv(line);
        if (!r)
            throw InvalidInputError(file.string() + ":" + std::to_string(lineno) +
                                    ": bad anomaly record");
        out.push_back(std::move(*r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// MeterWindow

MeterWindow::Ingest MeterWindow::ingest(HourStamp stamp, double kwh) {
    auto& slots = seasons_[static_cast<std::size_t>(stamp.season())];
    const DayIndex day = stamp.day();
    if (stamp > last_updated_) last_updated_ = stamp;

    if (!slots.empty() && day <= slots.front().day - order_p_) return Ingest::DroppedOld;

    auto it = std::find_if(slots.begin(), slots.end(),
                           [day](const Slot& s) { return s.day == day; });
    if (it != slots.end()) {
        it->kwh = kwh; // duplicate stamp: last write wins
        return Ingest::Replaced;
    }
    // Insert keeping descending day order, then drop entries that fell out of
    // the p-day window behind the newest.
    auto pos = std::find_if(slots.begin(), slots.end(),
                            [day](const Slot& s) { return s.day < day; });
    slots.insert(pos, Slot{day, kwh});
    const DayIndex newest = slots.front().day;
    while (!slots.empty() && slots.back().day <= newest - order_p_) slots.pop_back();
    return Ingest::Inserted;
}

std::optional<double> MeterWindow::at(DayIndex day, Season season) const {
    const auto& slots = seasons_[static_cast<std::size_t>(season)];
    for (const auto& s : slots)
        if (s.day == day) return s.kwh;
    return std::nullopt;
}

std::optional<std::vector<double>> MeterWindow::lags(DayIndex day, Season season,
                                                     int order_p) const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(order_p));
    for (int i = 1; i <= order_p; ++i) {
        auto v = at(day - i, season);
        if (!v) return std::nullopt;
        out.push_back(*v);
    }
    return out;
}

void WindowSet::ingest(const MeterReading& reading) {
    auto [it, fresh] = windows_.try_emplace(reading.meter_id, order_p_);
    (void)fresh;
    switch (it->second.ingest(reading.stamp, reading.kwh)) {
    case MeterWindow::Ingest::Inserted: ++counters_.inserted; break;
    case MeterWindow::Ingest::Replaced: ++counters_.duplicates; break;
    case MeterWindow::Ingest::DroppedOld: ++counters_.dropped_old; break;
    }
}

const MeterWindow* WindowSet::find(const std::string& meter_id) const {
    auto it = windows_.find(meter_id);
    return it == windows_.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// detect_hour

std::vector<AnomalyRecord> detect_hour(const HourBatch& batch, double celsius,
                                       const ModelSnapshot& snapshot, const WindowSet& windows,
                                       const DetectorConfig& config, int threads,
                                       DetectStats* stats) {
    const Season season = batch.stamp.season();
    const DayIndex day = batch.stamp.day();
    const DayType day_type =
        classify_day(batch.stamp, snapshot.config.day_type_policy, snapshot.config.holidays);

    enum class Outcome : unsigned char { Normal, Anomaly, NoModel, NoLags };
    const auto n = static_cast<std::int64_t>(batch.readings.size());
    std::vector<Outcome> outcomes(static_cast<std::size_t>(n), Outcome::Normal);
    std::vector<AnomalyRecord> slots(static_cast<std::size_t>(n));

    parallel_for(n, threads, [&](std::int64_t i) {
        const auto& reading = batch.readings[static_cast<std::size_t>(i)];
        const SeasonDetectionModel* model = snapshot.find(reading.meter_id, season, day_type);
        if (!model) {
            outcomes[static_cast<std::size_t>(i)] = Outcome::NoModel;
            return;
        }
        const MeterWindow* window = windows.find(reading.meter_id);
        auto lag_values =
            window ? window->lags(day, season, model->parx.order_p) : std::nullopt;
        if (!lag_values) {
            outcomes[static_cast<std::size_t>(i)] = Outcome::NoLags;
            return;
        }
        const double predicted = predict(model->parx, *lag_values, celsius);
        const auto result = classify(reading.kwh, predicted, model->gaussian, config);
        if (result.anomaly) {
            outcomes[static_cast<std::size_t>(i)] = Outcome::Anomaly;
            slots[static_cast<std::size_t>(i)] =
                AnomalyRecord{reading.meter_id, reading.stamp, season,         reading.kwh,
                              predicted,        result.score,  config.epsilon, snapshot.version};
        }
    });

    std::vector<AnomalyRecord> records;
    for (std::int64_t i = 0; i < n; ++i) {
        switch (outcomes[static_cast<std::size_t>(i)]) {
        case Outcome::Anomaly: records.push_back(std::move(slots[static_cast<std::size_t>(i)])); break;
        case Outcome::NoModel:
            if (stats) ++stats->skipped_no_model;
            break;
        case Outcome::NoLags:
            if (stats) ++stats->skipped_incomplete_lags;
            break;
        case Outcome::Normal: break;
        }
    }
    if (stats) {
        stats->scored += static_cast<std::size_t>(n);
        stats->anomalies += records.size();
    }
    return records;
}

// ---------------------------------------------------------------------------
// Sources

FleetReplaySource::FleetReplaySource(const Fleet& fleet) {
    std::map<HourStamp, std::vector<MeterReading>> by_hour;
    for (const auto& series : fleet)
        for (const auto& [stamp, kwh] : series.readings())
            by_hour[stamp].push_back(MeterReading{series.meter_id(), stamp, kwh});
    batches_.reserve(by_hour.size());
    for (auto& [stamp, readings] : by_hour) batches_.push_back({stamp, std::move(readings)});
}

std::optional<HourBatch> FleetReplaySource::next() {
    if (at_ >= batches_.size()) return std::nullopt;
    return std::move(batches_[at_++]);
}

CsvStreamSource::CsvStreamSource(std::istream& in, std::string origin)
    : in_(in), origin_(std::move(origin)) {}

std::optional<HourBatch> CsvStreamSource::next() {
    std::string line;
    HourBatch batch;
    bool have_stamp = false;
    if (pending_) {
        batch.stamp = pending_->stamp;
        batch.readings.push_back(std::move(*pending_));
        pending_.reset();
        have_stamp = true;
    }
    while (std::getline(in_, line)) {
        ++lineno_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header_done_ && line.rfind("meter_id", 0) == 0) {
            header_done_ = true;
            continue;
        }
        header_done_ = true;
        auto f = split_csv_line(line);
        const auto ctx = origin_ + ":" + std::to_string(lineno_);
        if (f.size() != 3) throw InvalidInputError(ctx + ": expected meter_id,stamp,kwh");
        auto stamp = HourStamp::parse(f[1]);
        auto kwh = parse_f64(f[2]);
        if (!stamp || !kwh) throw InvalidInputError(ctx + ": bad reading line");
        MeterReading reading{f[0], *stamp, *kwh};
        if (!have_stamp) {
            batch.stamp = *stamp;
            have_stamp = true;
        } else if (*stamp != batch.stamp) {
            pending_ = std::move(reading);
            return batch;
        }
        batch.readings.push_back(std::move(reading));
    }
    if (!have_stamp) return std::nullopt;
    return batch;
}

// ---------------------------------------------------------------------------
// run_stream

namespace {

struct PendingHour {
    HourBatch batch;
};

} // namespace

StreamStats run_stream(ReadingSource& source, ServingStore& store,
                       const TemperatureSeries& temps, const StreamOptions& opts) {
    StreamStats stats;
    opts.config.validate();
    ModelSnapshot snapshot = store.latest_snapshot(); // empty store throws here
    WindowSet windows(snapshot.config.order_p);
    std::deque<HourBatch> deferred;

    auto process = [&](const HourBatch& batch, double celsius) {
        auto records =
            detect_hour(batch, celsius, snapshot, windows, opts.config, opts.threads, &stats.detect);
        for (const auto& reading : batch.readings) windows.ingest(reading);
        if (!records.empty()) {
            if (opts.append_to_store) store.append_anomalies(records);
            if (opts.record_sink)
                for (const auto& r : records) *opts.record_sink << record_to_csv(r) << '\n';
        }
        stats.records += records.size();
        ++stats.hours;
    };

    auto refresh_snapshot = [&] {
        try {
            const auto latest = store.latest_version();
            if (latest != snapshot.version) {
                snapshot = store.snapshot(latest);
                ++stats.snapshot_reloads;
            }
        } catch (const std::exception& e) {
            // Store unreachable: keep detecting with the stale snapshot.
            if (opts.log) *opts.log << "snapshot refresh failed, using v" << snapshot.version
                                    << ": " << e.what() << '\n';
        }
    };

    while (auto batch = source.next()) {
        refresh_snapshot();
        // Deferred hours run as soon as their temperature shows up, oldest
        // first, before the live batch.
        for (auto it = deferred.begin(); it != deferred.end();) {
            if (auto celsius = temps.at(it->stamp)) {
                process(*it, *celsius);
                it = deferred.erase(it);
            } else {
                ++it;
            }
        }
        const auto celsius = temps.at(batch->stamp);
        if (!celsius) {
            ++stats.detect.deferred_hours;
            deferred.push_back(std::move(*batch));
            if (opts.log)
                *opts.log << "no temperature for " << deferred.back().stamp.to_string()
                          << ", hour deferred\n";
            continue;
        }
        process(*batch, *celsius);
    }
    // Source ended: one last chance for deferred hours, then flush.
    for (auto it = deferred.begin(); it != deferred.end();) {
        if (auto celsius = temps.at(it->stamp)) {
            process(*it, *celsius);
            it = deferred.erase(it);
        } else {
            ++it;
        }
    }
    stats.deferred_pending = deferred.size();
    stats.window = windows.counters();
    if (opts.record_sink) opts.record_sink->flush();
    return stats;
}

std::vector<AnomalyRecord> replay_detect(const ModelSnapshot& snapshot, const Fleet& stream,
                                         const TemperatureSeries& temps,
                                         const DetectorConfig& config, int threads,
                                         DetectStats* stats) {
    config.validate();
    FleetReplaySource source(stream);
    WindowSet windows(snapshot.config.order_p);
    std::vector<AnomalyRecord> records;
    while (auto batch = source.next()) {
        const auto celsius = temps.at(batch->stamp);
        if (!celsius) {
            if (stats) ++stats->deferred_hours;
            // A fixed replay has no later temperature arrivals: skip the hour
            // but still ingest it so later lags stay correct.
            for (const auto& reading : batch->readings) windows.ingest(reading);
            continue;
        }
        auto hour_records =
            detect_hour(*batch, *celsius, snapshot, windows, config, threads, stats);
        for (const auto& reading : batch->readings) windows.ingest(reading);
        records.insert(records.end(), hour_records.begin(), hour_records.end());
    }
    return records;
}

} // namespace parxad
