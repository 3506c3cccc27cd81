#include "parxad/csv.hpp"

#include "parxad/errors.hpp"
#include "parxad/num.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace parxad {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

namespace {

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

[[noreturn]] void bad_line(const std::string& origin, std::size_t lineno, const std::string& what) {
    throw InvalidInputError(origin + ":" + std::to_string(lineno) + ": " + what);
}

std::ofstream open_out(const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot open " + file.string() + " for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open " + file.string());
    return in;
}

} // namespace

Fleet read_readings_stream(std::istream& in, const std::string& origin, ReadingsStats* stats) {
    std::string line;
    if (!std::getline(in, line))
        throw InvalidInputError(origin + ": empty file (header line required)");
    if (strip_cr(line).rfind("meter_id", 0) != 0)
        throw InvalidInputError(origin + ": missing \"meter_id,stamp,kwh\" header");

    std::map<std::string, std::vector<ConsumptionSeries::Entry>> by_meter;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_cr(line);
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 3) bad_line(origin, lineno, "expected meter_id,stamp,kwh");
        auto stamp = HourStamp::parse(f[1]);
        if (!stamp) bad_line(origin, lineno, "bad stamp \"" + f[1] + "\"");
        auto kwh = parse_f64(f[2]);
        if (!kwh) bad_line(origin, lineno, "bad kwh \"" + f[2] + "\"");
        by_meter[f[0]].emplace_back(*stamp, *kwh);
        if (stats) ++stats->rows;
    }

    Fleet fleet;
    fleet.reserve(by_meter.size());
    for (auto& [id, rows] : by_meter) {
        ConsumptionSeries::LoadStats ls;
        fleet.push_back(ConsumptionSeries::from_unsorted(id, std::move(rows), &ls));
        if (stats) stats->duplicates += ls.duplicates;
    }
    return fleet;
}

Fleet read_readings_csv(const std::filesystem::path& file, ReadingsStats* stats) {
    auto in = open_in(file);
    return read_readings_stream(in, file.string(), stats);
}

void write_readings_csv(const std::filesystem::path& file, const Fleet& fleet) {
    auto out = open_out(file);
    out << "meter_id,stamp,kwh\n";
    for (const auto& series : fleet)
        for (const auto& [stamp, kwh] : series.readings())
            out << series.meter_id() << ',' << stamp.to_string() << ',' << fmt_g17(kwh) << '\n';
    if (!out) throw IoError("write failed: " + file.string());
}

void write_readings_csv_by_hour(const std::filesystem::path& file, const Fleet& fleet) {
    struct Row {
        HourStamp stamp;
        const std::string* id;
        double kwh;
    };
    std::vector<Row> rows;
    for (const auto& series : fleet)
        for (const auto& [stamp, kwh] : series.readings())
            rows.push_back({stamp, &series.meter_id(), kwh});
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.stamp != b.stamp) return a.stamp < b.stamp;
        return *a.id < *b.id;
    });
    auto out = open_out(file);
    out << "meter_id,stamp,kwh\n";
    for (const auto& r : rows)
        out << *r.id << ',' << r.stamp.to_string() << ',' << fmt_g17(r.kwh) << '\n';
    if (!out) throw IoError("write failed: " + file.string());
}

TemperatureSeries read_temperatures_csv(const std::filesystem::path& file) {
    auto in = open_in(file);
    std::string line;
    if (!std::getline(in, line))
        throw InvalidInputError(file.string() + ": empty file (header line required)");
    if (strip_cr(line).rfind("stamp", 0) != 0)
        throw InvalidInputError(file.string() + ": missing \"stamp,celsius\" header");
    std::vector<TemperatureSeries::Entry> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_cr(line);
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 2) bad_line(file.string(), lineno, "expected stamp,celsius");
        auto stamp = HourStamp::parse(f[0]);
        if (!stamp) bad_line(file.string(), lineno, "bad stamp \"" + f[0] + "\"");
        auto celsius = parse_f64(f[1]);
        if (!celsius) bad_line(file.string(), lineno, "bad celsius \"" + f[1] + "\"");
        rows.emplace_back(*stamp, *celsius);
    }
    return TemperatureSeries::from_unsorted(std::move(rows));
}

void write_temperatures_csv(const std::filesystem::path& file, const TemperatureSeries& temps) {
    auto out = open_out(file);
    out << "stamp,celsius\n";
    for (const auto& [stamp, celsius] : temps.observations())
        out << stamp.to_string() << ',' << fmt_g17(celsius) << '\n';
    if (!out) throw IoError("write failed: " + file.string());
}

} // namespace parxad
