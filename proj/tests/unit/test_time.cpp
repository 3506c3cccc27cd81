#include "parxad/time.hpp"

#include "parxad/rng.hpp"

#include "doctest.h"

using namespace parxad;

TEST_CASE("season_of returns the hour of day") {
    CHECK(season_of(HourStamp::from_ymdh(2024, 1, 1, 0)) == 0);
    CHECK(season_of(HourStamp::from_ymdh(2024, 1, 1, 23)) == 23);
    CHECK(season_of(HourStamp::from_ymdh(2024, 6, 15, 7)) == 7);
}

TEST_CASE("stamps before the epoch still split cleanly") {
    const HourStamp s{-1}; // 1969-12-31T23
    CHECK(s.day() == -1);
    CHECK(s.season() == 23);
    CHECK(s.to_string() == "1969-12-31T23");
}

TEST_CASE("parse and to_string round trip") {
    const auto s = HourStamp::parse("2024-02-29T07");
    REQUIRE(s.has_value());
    CHECK(s->to_string() == "2024-02-29T07");
    CHECK(s->season() == 7);

    CHECK_FALSE(HourStamp::parse("2024-2-29T07").has_value());
    CHECK_FALSE(HourStamp::parse("2024-02-29 07").has_value());
    CHECK_FALSE(HourStamp::parse("2024-02-29T24").has_value());
    CHECK_FALSE(HourStamp::parse("2024-13-01T00").has_value());
    CHECK_FALSE(HourStamp::parse("garbage").has_value());
}

TEST_CASE("random stamps keep season in range and decompose exactly") {
    Rng rng(7);
    for (int i = 0; i < 2000; ++i) {
        const HourStamp s{static_cast<std::int64_t>(rng.below(4'000'000)) - 2'000'000};
        CHECK(s.season() >= 0);
        CHECK(s.season() <= 23);
        CHECK(HourStamp::from_day_season(s.day(), s.season()) == s);
    }
}

TEST_CASE("weekday math") {
    CHECK(weekday_mon0(days_from_civil(1970, 1, 1)) == 3);  // Thursday
    CHECK(weekday_mon0(days_from_civil(2024, 1, 1)) == 0);  // Monday
    CHECK(is_weekend(days_from_civil(2024, 1, 6)));         // Saturday
    CHECK(is_weekend(days_from_civil(2024, 1, 7)));         // Sunday
    CHECK_FALSE(is_weekend(days_from_civil(2024, 1, 8)));
}

TEST_CASE("classify_day covers both policies") {
    const HolidayCalendar none;
    const HourStamp saturday = HourStamp::from_ymdh(2024, 1, 6, 10);
    const HourStamp wednesday = HourStamp::from_ymdh(2024, 1, 3, 10);

    CHECK(classify_day(saturday, DayTypePolicy::Unified, none) == DayType::AllDays);
    CHECK(classify_day(wednesday, DayTypePolicy::Unified, none) == DayType::AllDays);

    CHECK(classify_day(saturday, DayTypePolicy::Split, none) == DayType::WeekendHoliday);
    CHECK(classify_day(wednesday, DayTypePolicy::Split, none) == DayType::Workday);

    HolidayCalendar holidays{wednesday.day()};
    CHECK(classify_day(wednesday, DayTypePolicy::Split, holidays) == DayType::WeekendHoliday);
}

TEST_CASE("classify_day is total over a long date range") {
    const HolidayCalendar none;
    for (DayIndex d = days_from_civil(2023, 1, 1); d <= days_from_civil(2025, 12, 31); ++d) {
        const auto t = classify_day(HourStamp::from_day_season(d, 12), DayTypePolicy::Split, none);
        CHECK((t == DayType::Workday || t == DayType::WeekendHoliday));
    }
}

TEST_CASE("enum string round trips") {
    CHECK(day_type_from_string(to_string(DayType::Workday)) == DayType::Workday);
    CHECK(policy_from_string(to_string(DayTypePolicy::Split)) == DayTypePolicy::Split);
    CHECK_FALSE(day_type_from_string("nope").has_value());
    CHECK(parse_date("2024-06-15") == days_from_civil(2024, 6, 15));
    CHECK_FALSE(parse_date("2024-06-155").has_value());
}
