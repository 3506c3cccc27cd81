#pragma once

#include "parxad/config.hpp"
#include "parxad/residual.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace parxad {

struct ModelKey {
    std::string meter_id;
    Season season = 0;
    DayType day_type = DayType::AllDays;

    auto operator<=>(const ModelKey&) const = default;
};

/// Immutable, versioned set of detection models for the whole fleet — the
/// unit the batch layer publishes and the speed layer consumes.
struct ModelSnapshot {
    std::int64_t version = 0;
    HourStamp created_at{};
    DetectorConfig config;
    std::map<ModelKey, SeasonDetectionModel> models;

    const SeasonDetectionModel* find(const std::string& meter_id, Season season,
                                     DayType day_type) const {
        auto it = models.find(ModelKey{meter_id, season, day_type});
        return it == models.end() ? nullptr : &it->second;
    }
};

/// Snapshot file: a "parxad-snapshot 1" header with the config echo, model
/// count and an FNV-1a checksum of the record block, then one CSV record per
/// model. Numbers are %.17g so a load/store round-trip is bit-exact. The
/// exact field order is documented in the README.
std::string serialize_snapshot(const ModelSnapshot& snapshot);

/// Parses and validates (field counts, checksum). Throws StoreError on any
/// corruption, so a torn file can never be served.
ModelSnapshot parse_snapshot(std::string_view text, const std::string& origin);

void save_snapshot_file(const std::filesystem::path& file, const ModelSnapshot& snapshot);
ModelSnapshot load_snapshot_file(const std::filesystem::path& file);

} // namespace parxad
