#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace parxad {

/// Days since 1970-01-01 (may be negative).
using DayIndex = std::int64_t;

/// Hour-of-day index 0..23 — the daily "season" of the PARX model.
using Season = int;

inline constexpr int kSeasonsPerDay = 24;

/// Timezone-naive local calendar hour. Stored as hours since the epoch so
/// ordering, day arithmetic and season extraction are integer operations.
struct HourStamp {
    std::int64_t hours = 0;

    static HourStamp from_ymdh(int year, unsigned month, unsigned day, unsigned hour);
    static HourStamp from_day_season(DayIndex day, Season season) {
        return HourStamp{day * kSeasonsPerDay + season};
    }

    /// Parses "YYYY-MM-DDTHH". Returns nullopt on malformed input.
    static std::optional<HourStamp> parse(std::string_view text);

    DayIndex day() const {
        return hours >= 0 ? hours / kSeasonsPerDay
                          : (hours - (kSeasonsPerDay - 1)) / kSeasonsPerDay;
    }
    Season season() const {
        auto h = hours % kSeasonsPerDay;
        return static_cast<Season>(h < 0 ? h + kSeasonsPerDay : h);
    }

    std::string to_string() const;        // "YYYY-MM-DDTHH"
    std::string date_string() const;      // "YYYY-MM-DD"

    auto operator<=>(const HourStamp&) const = default;
};

/// Civil-date <-> day-count conversions (proleptic Gregorian).
DayIndex days_from_civil(int year, unsigned month, unsigned day);
void civil_from_days(DayIndex z, int& year, unsigned& month, unsigned& day);

/// 0 = Monday .. 6 = Sunday.
int weekday_mon0(DayIndex day);

inline bool is_weekend(DayIndex day) { return weekday_mon0(day) >= 5; }

enum class DayType { AllDays, Workday, WeekendHoliday };

/// Unified: one pooled model per season. Split: separate workday and
/// weekend/holiday models.
enum class DayTypePolicy { Unified, Split };

using HolidayCalendar = std::set<DayIndex>;

/// Total classification: AllDays under the unified policy, otherwise Workday
/// iff Mon-Fri and not a listed holiday.
DayType classify_day(HourStamp stamp, DayTypePolicy policy, const HolidayCalendar& holidays);

Season season_of(HourStamp stamp);

const char* to_string(DayType t);
std::optional<DayType> day_type_from_string(std::string_view s);
const char* to_string(DayTypePolicy p);
std::optional<DayTypePolicy> policy_from_string(std::string_view s);

/// Parses "YYYY-MM-DD" into a day index (for holiday lists).
std::optional<DayIndex> parse_date(std::string_view text);

} // namespace parxad
