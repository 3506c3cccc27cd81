#include "parxad/series.hpp"

#include <algorithm>
#include <cmath>

namespace parxad {

namespace {

bool stamp_less(const std::pair<HourStamp, double>& a, HourStamp b) { return a.first < b; }

} // namespace

void ConsumptionSeries::append(HourStamp stamp, double kwh) {
    if (!std::isfinite(kwh) || kwh < 0.0)
        throw InvalidInputError("reading for " + meter_id_ + " at " + stamp.to_string() +
                                ": kwh must be finite and >= 0");
    if (!readings_.empty() && stamp <= readings_.back().first)
        throw InvalidInputError("reading for " + meter_id_ + " at " + stamp.to_string() +
                                " is not after " + readings_.back().first.to_string());
    readings_.emplace_back(stamp, kwh);
}

std::optional<double> ConsumptionSeries::at(HourStamp stamp) const {
    auto it = std::lower_bound(readings_.begin(), readings_.end(), stamp, stamp_less);
    if (it == readings_.end() || it->first != stamp) return std::nullopt;
    return it->second;
}

ConsumptionSeries ConsumptionSeries::from_unsorted(std::string meter_id,
                                                   std::vector<Entry> rows,
                                                   LoadStats* stats) {
    // Last write wins: stable sort keeps input order within a stamp, then we
    // keep the final occurrence of each stamp.
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Entry& a, const Entry& b) { return a.first < b.first; });
    ConsumptionSeries out(std::move(meter_id));
    out.readings_.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i + 1 < rows.size() && rows[i + 1].first == rows[i].first) {
            if (stats) ++stats->duplicates;
            continue;
        }
        if (!std::isfinite(rows[i].second) || rows[i].second < 0.0)
            throw InvalidInputError("reading for " + out.meter_id_ + " at " +
                                    rows[i].first.to_string() + ": kwh must be finite and >= 0");
        out.readings_.push_back(rows[i]);
    }
    return out;
}

void TemperatureSeries::append(HourStamp stamp, double celsius) {
    if (!std::isfinite(celsius))
        throw InvalidInputError("temperature at " + stamp.to_string() + " is not finite");
    if (!obs_.empty() && stamp <= obs_.back().first)
        throw InvalidInputError("temperature at " + stamp.to_string() + " is not after " +
                                obs_.back().first.to_string());
    obs_.emplace_back(stamp, celsius);
}

std::optional<double> TemperatureSeries::at(HourStamp stamp) const {
    auto it = std::lower_bound(obs_.begin(), obs_.end(), stamp, stamp_less);
    if (it == obs_.end() || it->first != stamp) return std::nullopt;
    return it->second;
}

TemperatureSeries TemperatureSeries::from_unsorted(std::vector<Entry> rows) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Entry& a, const Entry& b) { return a.first < b.first; });
    TemperatureSeries out;
    out.obs_.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i + 1 < rows.size() && rows[i + 1].first == rows[i].first) continue;
        if (!std::isfinite(rows[i].second))
            throw InvalidInputError("temperature at " + rows[i].first.to_string() +
                                    " is not finite");
        out.obs_.push_back(rows[i]);
    }
    return out;
}

} // namespace parxad
