#include "parxad/trainer.hpp"

#include "parxad/csv.hpp"
#include "parxad/datagen.hpp"
#include "parxad/store.hpp"

#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>

using namespace parxad;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const char* name) {
    auto dir = fs::temp_directory_path() / "parxad-tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

GeneratedFleet small_fleet(int meters, int days, std::uint64_t seed = 5) {
    FleetTemplate tmpl;
    tmpl.n_meters = meters;
    tmpl.n_days = days;
    tmpl.seed = seed;
    tmpl.noise_sigma = 0.1;
    return generate_fleet(tmpl);
}

/// Snapshot text with the version/created_at lines blanked, for
/// "identical except version and created_at" comparisons.
std::string stable_text(const ModelSnapshot& snap) {
    auto text = serialize_snapshot(snap);
    text = std::regex_replace(text, std::regex("version [0-9]+\n"), "version *\n");
    text = std::regex_replace(text, std::regex("created_at [^\n]+\n"), "created_at *\n");
    return text;
}

} // namespace

TEST_CASE("train_meter fits 24 cells with the expected sample counts") {
    const auto fleet = small_fleet(1, 40);
    DetectorConfig config;
    const auto result = train_meter(fleet.readings[0], fleet.temps, config);
    REQUIRE(result.models.size() == 24);
    CHECK(result.skipped.empty());
    for (const auto& model : result.models) {
        CHECK(model.parx.n_samples == 37); // 40 days minus p
        CHECK(model.gaussian.n_samples == 37);
        CHECK(model.parx.order_p == 3);
        CHECK(model.gaussian.sigma >= config.sigma_floor);
    }
    CHECK(result.low_sample_cells == 0); // 37 >= 30
}

TEST_CASE("short history trains with a low-sample warning") {
    const auto fleet = small_fleet(1, 10);
    DetectorConfig config;
    const auto result = train_meter(fleet.readings[0], fleet.temps, config);
    REQUIRE(result.models.size() == 24);
    for (const auto& model : result.models) CHECK(model.parx.n_samples == 7);
    CHECK(result.low_sample_cells == 24);
}

TEST_CASE("a season with a hole in every lag window is skipped and reported") {
    auto fleet = small_fleet(1, 40);
    // Rebuild the meter without any season-7 readings.
    ConsumptionSeries gappy(fleet.readings[0].meter_id());
    for (const auto& [stamp, kwh] : fleet.readings[0].readings())
        if (stamp.season() != 7) gappy.append(stamp, kwh);

    const auto result = train_meter(gappy, fleet.temps, DetectorConfig{});
    CHECK(result.models.size() == 23);
    REQUIRE(result.skipped.size() == 1);
    CHECK(result.skipped[0].season == 7);
    CHECK(result.skipped[0].rows == 0);
}

TEST_CASE("split policy trains two cells per season") {
    FleetTemplate tmpl;
    tmpl.n_meters = 1;
    tmpl.n_days = 70;
    tmpl.weekend_multiplier = 1.4;
    const auto fleet = generate_fleet(tmpl);

    DetectorConfig config;
    config.day_type_policy = DayTypePolicy::Split;
    const auto result = train_meter(fleet.readings[0], fleet.temps, config);
    CHECK(result.models.size() == 48);

    int workday = 0, weekend = 0;
    for (const auto& model : result.models) {
        if (model.parx.day_type == DayType::Workday) ++workday;
        if (model.parx.day_type == DayType::WeekendHoliday) ++weekend;
    }
    CHECK(workday == 24);
    CHECK(weekend == 24);
}

TEST_CASE("meter with too little data is untrainable") {
    const auto fleet = small_fleet(1, 4);
    CHECK_THROWS_AS(train_meter(fleet.readings[0], fleet.temps, DetectorConfig{}),
                    InsufficientDataError);
}

TEST_CASE("train_fleet: snapshot plus skip report covers every meter") {
    auto good = small_fleet(2, 40);
    auto bad = small_fleet(1, 4, 77);
    Fleet fleet = good.readings;
    ConsumptionSeries runt("zz-runt");
    for (const auto& [stamp, kwh] : bad.readings[0].readings()) runt.append(stamp, kwh);
    fleet.push_back(runt);

    const auto result = train_fleet(fleet, good.temps, DetectorConfig{}, 1, 1,
                                    HourStamp::from_ymdh(2024, 6, 1, 0));
    CHECK(result.snapshot.models.size() == 48); // 2 trained meters x 24
    REQUIRE(result.untrainable_meters.size() == 1);
    CHECK(result.untrainable_meters[0] == "zz-runt");
    CHECK(result.snapshot.version == 1);
}

TEST_CASE("train_fleet rejects an empty dataset") {
    const auto fleet = small_fleet(1, 40);
    CHECK_THROWS_AS(train_fleet(Fleet{}, fleet.temps, DetectorConfig{}, 1, 1, HourStamp{0}),
                    InvalidInputError);
}

TEST_CASE("parallel training is bit-identical to serial") {
    const auto fleet = small_fleet(6, 45);
    const auto created = HourStamp::from_ymdh(2024, 6, 1, 0);
    const auto serial = train_fleet(fleet.readings, fleet.temps, DetectorConfig{}, 1, 3, created);
    const auto parallel =
        train_fleet(fleet.readings, fleet.temps, DetectorConfig{}, 8, 3, created);
    CHECK(serialize_snapshot(serial.snapshot) == serialize_snapshot(parallel.snapshot));
}

TEST_CASE("retraining an unchanged log is idempotent up to version metadata") {
    const auto fleet = small_fleet(3, 40);
    const auto a = train_fleet(fleet.readings, fleet.temps, DetectorConfig{}, 2, 1,
                               HourStamp::from_ymdh(2024, 6, 1, 0));
    const auto b = train_fleet(fleet.readings, fleet.temps, DetectorConfig{}, 2, 2,
                               HourStamp::from_ymdh(2024, 6, 2, 0));
    CHECK(stable_text(a.snapshot) == stable_text(b.snapshot));
}

TEST_CASE("trainer recovers the generator on a synthetic meter") {
    FleetTemplate tmpl;
    tmpl.n_meters = 1;
    tmpl.n_days = 180;
    tmpl.seed = 1234;
    tmpl.noise_sigma = 0.08;
    tmpl.noise_rel = 0.05;
    const auto fleet = generate_fleet(tmpl);

    DetectorConfig config;
    config.fit_intercept = true; // generator has zero AR; level sits in the intercept
    const auto result = train_meter(fleet.readings[0], fleet.temps, config);
    REQUIRE(result.models.size() == 24);

    const auto& profile = fleet.profiles[0];
    for (const auto& model : result.models) {
        // Heating beta is identifiable at every hour in this climate.
        CHECK(model.parx.betas[1] ==
              doctest::Approx(profile.temp_betas[1]).epsilon(0.05));
        // By construction the ln-residuals are N(ln(rel * base_s), sigma^2).
        const double base = profile.base_pattern[static_cast<std::size_t>(model.parx.season)];
        CHECK(model.gaussian.sigma == doctest::Approx(tmpl.noise_sigma).epsilon(0.25));
        CHECK(std::abs(model.gaussian.mu - std::log(tmpl.noise_rel * base)) < 0.15);
    }
}

TEST_CASE("run_batch_cycle publishes growing versions and survives failures") {
    const auto dir = temp_dir("batch");
    const auto fleet = small_fleet(2, 30);
    write_readings_csv(dir / "readings.csv", fleet.readings);
    write_temperatures_csv(dir / "temps.csv", fleet.temps);

    ServingStore store(dir / "store");
    BatchCycleOptions opts;
    opts.interval_hours = 0.0;
    opts.max_cycles = 2;
    auto stats = run_batch_cycle(store, dir / "readings.csv", dir / "temps.csv", opts);
    CHECK(stats.cycles == 2);
    CHECK(stats.failures == 0);
    CHECK(store.latest_version() == 2);
    CHECK(store.snapshot(1).models.size() == store.snapshot(2).models.size());

    // A missing readings file must not kill the loop or the live snapshot.
    BatchCycleOptions bad = opts;
    bad.max_cycles = 1;
    auto failed = run_batch_cycle(store, dir / "nope.csv", dir / "temps.csv", bad);
    CHECK(failed.cycles == 1);
    CHECK(failed.failures == 1);
    CHECK(store.latest_version() == 2); // previous snapshot stays live
}
