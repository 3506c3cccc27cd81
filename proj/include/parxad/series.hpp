#pragma once

#include "parxad/errors.hpp"
#include "parxad/time.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace parxad {

/// One hourly consumption observation.
struct MeterReading {
    std::string meter_id;
    HourStamp stamp;
    double kwh = 0.0;
};

/// Hourly readings of one meter, strictly increasing by stamp, at most one
/// per hour. Immutable once built except for ordered appends.
class ConsumptionSeries {
public:
    using Entry = std::pair<HourStamp, double>;

    ConsumptionSeries() = default;
    explicit ConsumptionSeries(std::string meter_id) : meter_id_(std::move(meter_id)) {}

    const std::string& meter_id() const { return meter_id_; }
    const std::vector<Entry>& readings() const { return readings_; }
    std::size_t size() const { return readings_.size(); }
    bool empty() const { return readings_.empty(); }

    HourStamp first_stamp() const { return readings_.front().first; }
    HourStamp last_stamp() const { return readings_.back().first; }

    /// Rejects non-increasing stamps and non-finite or negative kwh.
    void append(HourStamp stamp, double kwh);

    /// Reading at an exact hour, if present.
    std::optional<double> at(HourStamp stamp) const;
    std::optional<double> at(DayIndex day, Season season) const {
        return at(HourStamp::from_day_season(day, season));
    }

    struct LoadStats {
        std::size_t duplicates = 0; // same (meter, stamp) seen more than once
    };

    /// Builds from rows in any order; duplicate stamps resolve last-write-wins
    /// in input order.
    static ConsumptionSeries from_unsorted(std::string meter_id, std::vector<Entry> rows,
                                           LoadStats* stats = nullptr);

private:
    std::string meter_id_;
    std::vector<Entry> readings_;
};

/// Hourly temperature observations, strictly increasing by stamp.
class TemperatureSeries {
public:
    using Entry = std::pair<HourStamp, double>;

    const std::vector<Entry>& observations() const { return obs_; }
    std::size_t size() const { return obs_.size(); }
    bool empty() const { return obs_.empty(); }

    void append(HourStamp stamp, double celsius);
    std::optional<double> at(HourStamp stamp) const;
    std::optional<double> at(DayIndex day, Season season) const {
        return at(HourStamp::from_day_season(day, season));
    }

    static TemperatureSeries from_unsorted(std::vector<Entry> rows);

private:
    std::vector<Entry> obs_;
};

/// A set of meters, ordered by meter_id so every traversal is deterministic.
using Fleet = std::vector<ConsumptionSeries>;

} // namespace parxad
