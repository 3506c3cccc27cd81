#pragma once

#include "parxad/detector.hpp"
#include "parxad/snapshot.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace parxad {

/// Test hook: aborts publish_snapshot between the durable snapshot write and
/// the pointer flip, simulating a crash at the worst moment.
enum class CrashPoint { None, AfterSnapshotWrite };

class CrashInjected : public StoreError {
public:
    CrashInjected() : StoreError("crash injected after snapshot write") {}
};

/// The serving layer: a directory holding versioned snapshot files, one
/// atomically-swapped LATEST pointer, and per-day append-only anomaly logs.
///
///   <dir>/snapshots/v<version>.snap
///   <dir>/LATEST                      (pointer file, written via rename)
///   <dir>/anomalies/<YYYY-MM-DD>.csv
///
/// Readers either see the previous version or the new one, never a mix; a
/// snapshot file that fails validation is never served.
class ServingStore {
public:
    explicit ServingStore(std::filesystem::path dir);

    const std::filesystem::path& dir() const { return dir_; }

    /// 0 when nothing has been published yet.
    std::int64_t latest_version() const;

    ModelSnapshot latest_snapshot() const; // EmptyStoreError when none
    ModelSnapshot snapshot(std::int64_t version) const;

    /// Durably writes the snapshot file, then flips the pointer. Rejects
    /// versions <= the current one.
    std::int64_t publish_snapshot(const ModelSnapshot& snapshot,
                                  CrashPoint crash = CrashPoint::None);

    std::size_t append_anomalies(std::span<const AnomalyRecord> records);

    /// Records for a meter (empty id = all meters) with from <= stamp <= to.
    std::vector<AnomalyRecord> query_anomalies(const std::string& meter_id, HourStamp from,
                                               HourStamp to) const;

private:
    std::filesystem::path snapshot_path(std::int64_t version) const;
    std::filesystem::path dir_;
};

} // namespace parxad
