#include "parxad/store.hpp"

#include "parxad/num.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include <fcntl.h>
#include <unistd.h>

namespace parxad {

namespace fs = std::filesystem;

namespace {

/// write + fsync + rename: either the old content or the new is visible.
void atomic_write(const fs::path& target, const std::string& content) {
    const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    const int fd = ::open(tmp.c_str(), O_RDONLY);
    if (fd >= 0) {
        ::fsync(fd);
        ::close(fd);
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw IoError("rename " + tmp.string() + " -> " + target.string() + ": " + ec.message());
}

std::string read_file(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ')) s.pop_back();
    return s;
}

} // namespace

ServingStore::ServingStore(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_ / "snapshots", ec);
    if (ec) throw IoError("cannot create " + (dir_ / "snapshots").string() + ": " + ec.message());
    fs::create_directories(dir_ / "anomalies", ec);
    if (ec) throw IoError("cannot create " + (dir_ / "anomalies").string() + ": " + ec.message());
}

fs::path ServingStore::snapshot_path(std::int64_t version) const {
    char name[32];
    std::snprintf(name, sizeof name, "v%08lld.snap", static_cast<long long>(version));
    return dir_ / "snapshots" / name;
}

std::int64_t ServingStore::latest_version() const {
    const fs::path pointer = dir_ / "LATEST";
    if (!fs::exists(pointer)) return 0;
    auto text = trim(read_file(pointer));
    auto v = parse_i64(text);
    if (!v || *v < 1) throw StoreError(pointer.string() + ": bad pointer \"" + text + "\"");
    return *v;
}

ModelSnapshot ServingStore::snapshot(std::int64_t version) const {
    return load_snapshot_file(snapshot_path(version));
}

ModelSnapshot ServingStore::latest_snapshot() const {
    const auto version = latest_version();
    if (version == 0) throw EmptyStoreError("store " + dir_.string() + ": no snapshot published");
    return snapshot(version);
}

std::int64_t ServingStore::publish_snapshot(const ModelSnapshot& snap, CrashPoint crash) {
    const auto current = latest_version();
    if (snap.version <= current)
        throw StoreError("stale snapshot version " + std::to_string(snap.version) +
                         " (current is " + std::to_string(current) + ")");
    atomic_write(snapshot_path(snap.version), serialize_snapshot(snap));
    if (crash == CrashPoint::AfterSnapshotWrite) throw CrashInjected();
    atomic_write(dir_ / "LATEST", std::to_string(snap.version) + "\n");
    return snap.version;
}

std::size_t ServingStore::append_anomalies(std::span<const AnomalyRecord> records) {
    // Group by day so each append touches its day file once, in input order.
    for (std::size_t i = 0; i < records.size();) {
        const auto day = records[i].stamp.day();
        const fs::path file = dir_ / "anomalies" / (records[i].stamp.date_string() + ".csv");
        const bool fresh = !fs::exists(file);
        std::ofstream out(file, std::ios::binary | std::ios::app);
        if (!out) throw IoError("cannot open " + file.string() + " for append");
        if (fresh) out << "meter_id,stamp,season,actual,predicted,score,epsilon_used,model_version\n";
        for (; i < records.size() && records[i].stamp.day() == day; ++i) {
            const auto& r = records[i];
            out << r.meter_id << ',' << r.stamp.to_string() << ',' << r.season << ','
                << fmt_g17(r.actual) << ',' << fmt_g17(r.predicted) << ',' << fmt_g17(r.score)
                << ',' << fmt_g17(r.epsilon_used) << ',' << r.model_version << '\n';
        }
        out.flush();
        if (!out) throw IoError("append failed: " + file.string());
    }
    return records.size();
}

std::vector<AnomalyRecord> ServingStore::query_anomalies(const std::string& meter_id,
                                                         HourStamp from, HourStamp to) const {
    std::vector<AnomalyRecord> out;
    for (DayIndex day = from.day(); day <= to.day(); ++day) {
        const fs::path file =
            dir_ / "anomalies" / (HourStamp::from_day_season(day, 0).date_string() + ".csv");
        if (!fs::exists(file)) continue;
        std::ifstream in(file, std::ios::binary);
        if (!in) throw IoError("cannot open " + file.string());
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line.rfind("meter_id", 0) == 0) continue;
            auto r = record_from_csv(line);
            if (!r)
                throw StoreError(file.string() + ":" + std::to_string(lineno) +
                                 ": bad anomaly record");
            if (!meter_id.empty() && r->meter_id != meter_id) continue;
            if (r->stamp < from || r->stamp > to) continue;
            out.push_back(std::move(*r));
        }
    }
    return out;
}

} // namespace parxad
