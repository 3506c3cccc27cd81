#pragma once

#include "parxad/series.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace parxad {

/// Readings file: header "meter_id,stamp,kwh", then one
/// "id,YYYY-MM-DDTHH,kwh" line per reading, any order. Temperature file:
/// header "stamp,celsius". Stamps are local-naive hours.

struct ReadingsStats {
    std::size_t rows = 0;
    std::size_t duplicates = 0;
};

/// Loads and groups by meter; result sorted by meter_id, each series sorted
/// by stamp with last-write-wins duplicates.
Fleet read_readings_csv(const std::filesystem::path& file, ReadingsStats* stats = nullptr);
Fleet read_readings_stream(std::istream& in, const std::string& origin,
                           ReadingsStats* stats = nullptr);

void write_readings_csv(const std::filesystem::path& file, const Fleet& fleet);

/// Same format sorted by (stamp, meter_id): the hourly order a stream source
/// replays.
void write_readings_csv_by_hour(const std::filesystem::path& file, const Fleet& fleet);

TemperatureSeries read_temperatures_csv(const std::filesystem::path& file);
void write_temperatures_csv(const std::filesystem::path& file, const TemperatureSeries& temps);

/// Splits one CSV line on commas (no quoting; meter ids must not contain
/// commas).
std::vector<std::string> split_csv_line(const std::string& line);

} // namespace parxad
