#include "parxad/datagen.hpp"

#include "parxad/csv.hpp"
#include "parxad/errors.hpp"
#include "parxad/num.hpp"
#include "parxad/parallel.hpp"
#include "parxad/parx.hpp"
#include "parxad/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

namespace parxad {

const char* to_string(AnomalyKind k) { return k == AnomalyKind::Spike ? "spike" : "drop"; }

TemperatureSeries synthesize_temperatures(DayIndex start_day, int n_days,
                                          const TempModelParams& p) {
    TemperatureSeries out;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    Rng rng = Rng::for_stream(p.seed, "weather");
    for (int d = 0; d < n_days; ++d) {
        const DayIndex day = start_day + d;
        // Day-of-year phase relative to Jan 15 (coldest day of the model).
        int y;
        unsigned m, dd;
        civil_from_days(day, y, m, dd);
        const double doy = static_cast<double>(day - days_from_civil(y, 1, 15));
        const double annual = -p.annual_amplitude * std::cos(two_pi * doy / 365.25);
        const double jitter = p.daily_jitter_sd > 0.0 ? rng.normal(0.0, p.daily_jitter_sd) : 0.0;
        for (int s = 0; s < kSeasonsPerDay; ++s) {
            const double diurnal = p.diurnal_amplitude * std::cos(two_pi * (s - 15.0) / 24.0);
            const double celsius = std::clamp(p.mean_celsius + annual + diurnal + jitter,
                                              p.min_celsius, p.max_celsius);
            out.append(HourStamp::from_day_season(day, s), celsius);
        }
    }
    return out;
}

ConsumptionSeries generate_series(const MeterProfile& profile, const TemperatureSeries& temps,
                                  DayIndex start_day, int n_days) {
    const int p = static_cast<int>(profile.ar_alphas.size());
    if (n_days < p + 1)
        throw InvalidInputError("date range must cover at least p+1 = " + std::to_string(p + 1) +
                                " days");
    double alpha_sum = 0.0;
    for (double a : profile.ar_alphas) alpha_sum += a;

    Rng rng = Rng::for_stream(profile.rng_seed, profile.meter_id);
    ConsumptionSeries series(profile.meter_id);

    // history[i][s]: reading i+1 days back at season s
    std::vector<std::array<double, kSeasonsPerDay>> history(
        static_cast<std::size_t>(std::max(p, 1)));

    for (int d = 0; d < n_days; ++d) {
        const DayIndex day = start_day + d;
        double level_scale = is_weekend(day) ? profile.weekend_multiplier : 1.0;
        if (profile.drift_total != 0.0) {
            const double t = std::clamp(
                static_cast<double>(day - profile.drift_start_day) /
                    static_cast<double>(std::max(profile.drift_days, 1)),
                0.0, 1.0);
            level_scale *= 1.0 + profile.drift_total * t;
        }
        std::array<double, kSeasonsPerDay> today{};
        for (int s = 0; s < kSeasonsPerDay; ++s) {
            const HourStamp stamp = HourStamp::from_day_season(day, s);
            const auto celsius = temps.at(stamp);
            if (!celsius)
                throw InvalidInputError("no temperature at " + stamp.to_string());
            const auto xt = exogenous_features(*celsius);
            const double weather = profile.temp_betas[0] * xt.xt1 +
                                   profile.temp_betas[1] * xt.xt2 +
                                   profile.temp_betas[2] * xt.xt3;
            const double level = profile.base_pattern[static_cast<std::size_t>(s)] * level_scale;
            double mean;
            if (d < p) {
                mean = level + weather; // warm-up days: no AR feedback yet
            } else {
                mean = level * (1.0 - alpha_sum) + weather;
                for (int i = 0; i < p; ++i)
                    mean += profile.ar_alphas[static_cast<std::size_t>(i)] *
                            history[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)];
            }
            // Deviation with log-normal magnitude and random sign, scaled by
            // the hour's base level: the ln-L1 residual of a correct model is
            // then Gaussian with sd noise_sigma by construction.
            const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
            const double z = rng.normal();
            double value = mean;
            if (profile.noise_rel > 0.0)
                value = mean + sign * profile.noise_rel * level * std::exp(profile.noise_sigma * z);
            today[static_cast<std::size_t>(s)] = std::max(value, 0.0);
            series.append(stamp, today[static_cast<std::size_t>(s)]);
        }
        if (p > 0) {
            for (int i = p - 1; i > 0; --i)
                history[static_cast<std::size_t>(i)] = history[static_cast<std::size_t>(i - 1)];
            history[0] = today;
        }
    }
    return series;
}

std::pair<ConsumptionSeries, std::vector<InjectedAnomaly>> inject(const ConsumptionSeries& series,
                                                                  const InjectSpec& spec) {
    if (spec.rate < 0.0 || spec.rate > 1.0)
        throw InvalidInputError("inject rate must be in [0, 1]");
    if (spec.kind == AnomalyKind::Spike && spec.magnitude <= 1.0)
        throw InvalidInputError("spike magnitude must be > 1");
    if (spec.kind == AnomalyKind::Drop && (spec.magnitude < 0.0 || spec.magnitude >= 1.0))
        throw InvalidInputError("drop magnitude must be in [0, 1)");

    const std::size_t n = series.size();
    const auto target = static_cast<std::size_t>(spec.rate * static_cast<double>(n));
    Rng rng = Rng::for_stream(spec.seed, series.meter_id() + "/inject");
    std::set<std::size_t> picks;
    while (picks.size() < target) picks.insert(static_cast<std::size_t>(rng.below(n)));

    ConsumptionSeries out(series.meter_id());
    std::vector<InjectedAnomaly> labels;
    labels.reserve(target);
    std::size_t idx = 0;
    for (const auto& [stamp, kwh] : series.readings()) {
        if (picks.count(idx)) {
            out.append(stamp, kwh * spec.magnitude);
            labels.push_back({series.meter_id(), stamp, spec.kind, spec.magnitude});
        } else {
            out.append(stamp, kwh);
        }
        ++idx;
    }
    return {std::move(out), std::move(labels)};
}

namespace {

// Residential-ish daily shape: low overnight, morning and evening peaks.
std::array<double, kSeasonsPerDay> daily_shape() {
    std::array<double, kSeasonsPerDay> shape{};
    for (int s = 0; s < kSeasonsPerDay; ++s) {
        const double morning = 0.55 * std::exp(-0.5 * std::pow((s - 7.5) / 1.3, 2.0));
        const double evening = 0.95 * std::exp(-0.5 * std::pow((s - 18.5) / 2.2, 2.0));
        shape[static_cast<std::size_t>(s)] = 0.25 + morning + evening;
    }
    return shape;
}

std::string meter_name(int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "m%05d", i);
    return std::string(buf);
}

} // namespace

GeneratedFleet generate_fleet(const FleetTemplate& tmpl, int threads) {
    if (tmpl.n_meters < 1) throw InvalidInputError("n_meters must be >= 1");
    GeneratedFleet out;
    out.temps = synthesize_temperatures(tmpl.start_day, tmpl.n_days, tmpl.temps);

    const auto shape = daily_shape();
    out.profiles.resize(static_cast<std::size_t>(tmpl.n_meters));
    for (int i = 0; i < tmpl.n_meters; ++i) {
        MeterProfile& prof = out.profiles[static_cast<std::size_t>(i)];
        prof.meter_id = meter_name(i);
        Rng rng = Rng::for_stream(tmpl.seed, prof.meter_id + "/profile");
        const double scale = rng.uniform(tmpl.base_scale_min, tmpl.base_scale_max);
        for (int s = 0; s < kSeasonsPerDay; ++s)
            prof.base_pattern[static_cast<std::size_t>(s)] =
                scale * shape[static_cast<std::size_t>(s)];
        prof.weekend_multiplier = tmpl.weekend_multiplier;
        const double bs = scale * tmpl.temp_beta_scale;
        prof.temp_betas = {bs * rng.uniform(0.02, 0.06),   // cooling
                           bs * rng.uniform(0.05, 0.12),   // heating
                           bs * rng.uniform(0.02, 0.08)};  // overheating
        prof.ar_alphas = tmpl.ar_alphas;
        prof.noise_sigma = tmpl.noise_sigma;
        prof.noise_rel = tmpl.noise_rel;
        prof.rng_seed = tmpl.seed;
        prof.drift_total = tmpl.drift_total;
        prof.drift_start_day = tmpl.drift_start_day;
        prof.drift_days = tmpl.drift_days;
    }

    out.clean.resize(static_cast<std::size_t>(tmpl.n_meters));
    out.readings.resize(static_cast<std::size_t>(tmpl.n_meters));
    std::vector<std::vector<InjectedAnomaly>> labels(static_cast<std::size_t>(tmpl.n_meters));
    parallel_for(tmpl.n_meters, threads, [&](std::int64_t i) {
        const auto& prof = out.profiles[static_cast<std::size_t>(i)];
        auto clean = generate_series(prof, out.temps, tmpl.start_day, tmpl.n_days);
        if (tmpl.inject_rate > 0.0) {
            InjectSpec spec{tmpl.inject_rate, tmpl.inject_magnitude, tmpl.inject_kind, tmpl.seed};
            auto [dirty, lab] = inject(clean, spec);
            out.readings[static_cast<std::size_t>(i)] = std::move(dirty);
            labels[static_cast<std::size_t>(i)] = std::move(lab);
        } else {
            out.readings[static_cast<std::size_t>(i)] = clean;
        }
        out.clean[static_cast<std::size_t>(i)] = std::move(clean);
    });
    for (auto& lab : labels)
        out.labels.insert(out.labels.end(), lab.begin(), lab.end());
    return out;
}

void write_labels_csv(const std::filesystem::path& file,
                      const std::vector<InjectedAnomaly>& labels) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot open " + file.string() + " for writing");
    out << "meter_id,stamp,kind,magnitude\n";
    for (const auto& label : labels)
        out << label.meter_id << ',' << label.stamp.to_string() << ',' << to_string(label.kind)
            << ',' << fmt_g17(label.magnitude) << '\n';
    if (!out) throw IoError("write failed: " + file.string());
}

std::vector<InjectedAnomaly> read_labels_csv(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open " + file.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("meter_id", 0) != 0)
        throw InvalidInputError(file.string() + ": missing \"meter_id,stamp,kind,magnitude\" header");
    std::vector<InjectedAnomaly> labels;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        const auto ctx = file.string() + ":" + std::to_string(lineno);
        if (f.size() != 4) throw InvalidInputError(ctx + ": expected 4 fields");
        auto stamp = HourStamp::parse(f[1]);
        auto magnitude = parse_f64(f[3]);
        if (!stamp || !magnitude) throw InvalidInputError(ctx + ": bad stamp or magnitude");
        AnomalyKind kind;
        if (f[2] == "spike") kind = AnomalyKind::Spike;
        else if (f[2] == "drop") kind = AnomalyKind::Drop;
        else throw InvalidInputError(ctx + ": bad kind \"" + f[2] + "\"");
        labels.push_back({f[0], *stamp, kind, *magnitude});
    }
    return labels;
}

} // namespace parxad
