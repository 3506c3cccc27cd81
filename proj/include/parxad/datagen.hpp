#pragma once

#include "parxad/series.hpp"
#include "parxad/time.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace parxad {

/// Generation recipe for one synthetic meter. A series is fully reproducible
/// from (profile, temperatures, date range): the RNG stream is derived from
/// (rng_seed, meter_id), so fleet-level parallelism cannot change output.
struct MeterProfile {
    std::string meter_id;
    std::array<double, kSeasonsPerDay> base_pattern{}; // kWh by hour of day
    double weekend_multiplier = 1.0;
    std::array<double, 3> temp_betas{0.0, 0.0, 0.0}; // cooling, heating, overheating
    std::vector<double> ar_alphas;                   // day-to-day carryover, most recent first
    double noise_sigma = 0.1; // sd of ln-residuals the meter will exhibit
    double noise_rel = 0.05;  // typical |deviation| as a fraction of the hourly mean
    std::uint64_t rng_seed = 0;

    /// Base level ramp: multiplies base_pattern by
    /// 1 + drift_total * clamp((day - drift_start_day) / drift_days, 0, 1).
    double drift_total = 0.0;
    DayIndex drift_start_day = 0;
    int drift_days = 1;
};

enum class AnomalyKind { Spike, Drop };

const char* to_string(AnomalyKind k);

/// Ground-truth label for one injected reading.
struct InjectedAnomaly {
    std::string meter_id;
    HourStamp stamp;
    AnomalyKind kind = AnomalyKind::Spike;
    double magnitude = 5.0;
};

/// Sinusoidal weather: annual cycle (coldest mid-January) plus a diurnal
/// cycle (warmest at 15:00), with optional seeded day-to-day jitter and hard
/// clamps. Day-to-day variation is what identifies the AR coefficients
/// sharply when a fleet is used for detector studies.
struct TempModelParams {
    double mean_celsius = 8.0;
    double annual_amplitude = 12.0;
    double diurnal_amplitude = 4.0;
    double daily_jitter_sd = 0.0; // one offset per day, shared by its 24 hours
    double min_celsius = -100.0;
    double max_celsius = 100.0;
    std::uint64_t seed = 0;
};

TemperatureSeries synthesize_temperatures(DayIndex start_day, int n_days,
                                          const TempModelParams& params);

/// Fleet-level template; per-meter profiles are derived from it with seeded
/// per-meter variation (overall scale and temperature sensitivities).
struct FleetTemplate {
    int n_meters = 1;
    DayIndex start_day = days_from_civil(2024, 1, 1);
    int n_days = 30;
    std::uint64_t seed = 1;

    double inject_rate = 0.0; // fraction of hours per meter
    double inject_magnitude = 5.0;
    AnomalyKind inject_kind = AnomalyKind::Spike;

    double base_scale_min = 0.5;
    double base_scale_max = 1.8;
    double weekend_multiplier = 1.0;
    std::vector<double> ar_alphas;
    double noise_sigma = 0.1;
    double noise_rel = 0.05;
    double temp_beta_scale = 1.0; // scales every meter's temperature betas

    double drift_total = 0.0;
    DayIndex drift_start_day = 0;
    int drift_days = 1;

    TempModelParams temps;
};

/// One meter's clean series from its profile and the weather.
ConsumptionSeries generate_series(const MeterProfile& profile, const TemperatureSeries& temps,
                                  DayIndex start_day, int n_days);

struct InjectSpec {
    double rate = 0.01;
    double magnitude = 5.0;
    AnomalyKind kind = AnomalyKind::Spike;
    std::uint64_t seed = 1;
};

/// Applies exactly floor(rate * size) anomalies at distinct seeded hours.
/// Spike multiplies by magnitude (> 1), Drop by magnitude (< 1).
std::pair<ConsumptionSeries, std::vector<InjectedAnomaly>> inject(const ConsumptionSeries& series,
                                                                  const InjectSpec& spec);

struct GeneratedFleet {
    Fleet clean;    // before injection
    Fleet readings; // after injection (equals clean when inject_rate == 0)
    std::vector<InjectedAnomaly> labels;
    TemperatureSeries temps;
    std::vector<MeterProfile> profiles;
};

GeneratedFleet generate_fleet(const FleetTemplate& tmpl, int threads = 1);

void write_labels_csv(const std::filesystem::path& file,
                      const std::vector<InjectedAnomaly>& labels);
std::vector<InjectedAnomaly> read_labels_csv(const std::filesystem::path& file);

} // namespace parxad
