#include "parxad/time.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace parxad {

// Howard Hinnant's civil-date algorithms.
DayIndex days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<DayIndex>(era) * 146097 + static_cast<DayIndex>(doe) - 719468;
}

void civil_from_days(DayIndex z, int& year, unsigned& month, unsigned& day) {
    z += 719468;
    const DayIndex era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const DayIndex y = static_cast<DayIndex>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    day = doy - (153 * mp + 2) / 5 + 1;
    month = mp + (mp < 10 ? 3 : -9);
    year = static_cast<int>(y + (month <= 2));
}

int weekday_mon0(DayIndex day) {
    // 1970-01-01 was a Thursday.
    return static_cast<int>(((day % 7) + 7 + 3) % 7);
}

HourStamp HourStamp::from_ymdh(int year, unsigned month, unsigned day, unsigned hour) {
    return HourStamp{days_from_civil(year, month, day) * kSeasonsPerDay + hour};
}

namespace {

bool parse_int(std::string_view s, int& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

} // namespace

std::optional<DayIndex> parse_date(std::string_view t) {
    if (t.size() != 10 || t[4] != '-' || t[7] != '-') return std::nullopt;
    int y, m, d;
    if (!parse_int(t.substr(0, 4), y) || !parse_int(t.substr(5, 2), m) ||
        !parse_int(t.substr(8, 2), d))
        return std::nullopt;
    if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
    return days_from_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

std::optional<HourStamp> HourStamp::parse(std::string_view t) {
    if (t.size() != 13 || t[10] != 'T') return std::nullopt;
    auto day = parse_date(t.substr(0, 10));
    if (!day) return std::nullopt;
    int h;
    if (!parse_int(t.substr(11, 2), h) || h < 0 || h > 23) return std::nullopt;
    return HourStamp::from_day_season(*day, h);
}

std::string HourStamp::to_string() const {
    int y;
    unsigned m, d;
    civil_from_days(day(), y, m, d);
    std::array<char, 16> buf;
    std::snprintf(buf.data(), buf.size(), "%04d-%02u-%02uT%02d", y, m, d, season());
    return std::string(buf.data());
}

std::string HourStamp::date_string() const {
    int y;
    unsigned m, d;
    civil_from_days(day(), y, m, d);
    std::array<char, 12> buf;
    std::snprintf(buf.data(), buf.size(), "%04d-%02u-%02u", y, m, d);
    return std::string(buf.data());
}

DayType classify_day(HourStamp stamp, DayTypePolicy policy, const HolidayCalendar& holidays) {
    if (policy == DayTypePolicy::Unified) return DayType::AllDays;
    const DayIndex d = stamp.day();
    if (is_weekend(d) || holidays.count(d)) return DayType::WeekendHoliday;
    return DayType::Workday;
}

Season season_of(HourStamp stamp) { return stamp.season(); }

const char* to_string(DayType t) {
    switch (t) {
    case DayType::AllDays: return "all";
    case DayType::Workday: return "workday";
    case DayType::WeekendHoliday: return "weekend";
    }
    return "?";
}

std::optional<DayType> day_type_from_string(std::string_view s) {
    if (s == "all") return DayType::AllDays;
    if (s == "workday") return DayType::Workday;
    if (s == "weekend") return DayType::WeekendHoliday;
    return std::nullopt;
}

const char* to_string(DayTypePolicy p) {
    return p == DayTypePolicy::Unified ? "all" : "split";
}

std::optional<DayTypePolicy> policy_from_string(std::string_view s) {
    if (s == "all") return DayTypePolicy::Unified;
    if (s == "split") return DayTypePolicy::Split;
    return std::nullopt;
}

} // namespace parxad
