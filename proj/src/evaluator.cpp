#include "parxad/evaluator.hpp"

#include "parxad/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>

namespace parxad {

ConfusionCounts evaluate(const std::vector<InjectedAnomaly>& labels,
                         const std::vector<AnomalyRecord>& records, HourStamp after,
                         long long scored_hours) {
    std::set<std::pair<std::string, HourStamp>> labeled;
    for (const auto& label : labels)
        if (label.stamp >= after) labeled.emplace(label.meter_id, label.stamp);

    std::set<std::pair<std::string, HourStamp>> flagged;
    for (const auto& r : records)
        if (r.stamp >= after) flagged.emplace(r.meter_id, r.stamp);

    ConfusionCounts c;
    for (const auto& key : flagged)
        labeled.count(key) ? ++c.tp : ++c.fp;
    c.fn = static_cast<long long>(labeled.size()) - c.tp;
    if (scored_hours > 0) c.tn = scored_hours - c.tp - c.fp - c.fn;
    return c;
}

std::vector<SweepPoint> sweep_epsilon(const ModelSnapshot& snapshot, const Fleet& stream,
                                      const TemperatureSeries& temps, const DetectorConfig& base,
                                      std::span<const double> epsilons,
                                      const std::vector<InjectedAnomaly>* labels, HourStamp after,
                                      int threads) {
    std::vector<SweepPoint> out;
    out.reserve(epsilons.size());
    for (double epsilon : epsilons) {
        DetectorConfig config = base;
        config.epsilon = epsilon;
        auto records = replay_detect(snapshot, stream, temps, config, threads);
        SweepPoint point;
        point.epsilon = epsilon;
        long long counted = 0;
        for (const auto& r : records)
            if (r.stamp >= after) ++counted;
        point.anomalies = counted;
        if (labels) point.counts = evaluate(*labels, records, after);
        out.push_back(point);
    }
    return out;
}

const char* to_string(RefreshScenario s) {
    switch (s) {
    case RefreshScenario::Daily: return "daily";
    case RefreshScenario::EveryTenDays: return "every-10-days";
    case RefreshScenario::Never: return "never";
    }
    return "?";
}

namespace {

/// Readings strictly before `cutoff_day`, per meter.
Fleet truncate_fleet(const Fleet& fleet, DayIndex cutoff_day) {
    Fleet out;
    out.reserve(fleet.size());
    for (const auto& series : fleet) {
        ConsumptionSeries head(series.meter_id());
        for (const auto& [stamp, kwh] : series.readings()) {
            if (stamp.day() >= cutoff_day) break;
            head.append(stamp, kwh);
        }
        if (!head.empty()) out.push_back(std::move(head));
    }
    return out;
}

} // namespace

std::vector<RefreshPoint> refresh_study(const Fleet& readings, const TemperatureSeries& temps,
                                        const RefreshStudyOptions& opts) {
    std::vector<RefreshPoint> out;
    for (RefreshScenario scenario :
         {RefreshScenario::Daily, RefreshScenario::EveryTenDays, RefreshScenario::Never}) {
        const int period = scenario == RefreshScenario::Daily        ? 1
                           : scenario == RefreshScenario::EveryTenDays ? 10
                                                                       : 0;
        RefreshPoint point;
        point.scenario = scenario;

        auto initial = train_fleet(truncate_fleet(readings, opts.detect_start_day), temps,
                                   opts.config, opts.threads, 1,
                                   HourStamp::from_day_season(opts.detect_start_day, 0));
        ModelSnapshot snapshot = std::move(initial.snapshot);
        point.retrains = 1;

        WindowSet windows(opts.config.order_p);
        FleetReplaySource source(readings);
        DayIndex last_refresh_day = opts.detect_start_day;
        while (auto batch = source.next()) {
            const DayIndex day = batch->stamp.day();
            if (day < opts.detect_start_day) {
                for (const auto& reading : batch->readings) windows.ingest(reading);
                continue;
            }
            if (period > 0 && day - last_refresh_day >= period) {
                // Refit on everything up to (excluding) today, like a batch
                // cycle that ran overnight.
                auto refit = train_fleet(truncate_fleet(readings, day), temps, opts.config,
                                         opts.threads, snapshot.version + 1,
                                         HourStamp::from_day_season(day, 0));
                snapshot = std::move(refit.snapshot);
                last_refresh_day = day;
                ++point.retrains;
            }
            const auto celsius = temps.at(batch->stamp);
            if (!celsius) continue;
            auto records =
                detect_hour(*batch, *celsius, snapshot, windows, opts.config, opts.threads);
            point.anomalies += static_cast<long long>(records.size());
            for (const auto& reading : batch->readings) windows.ingest(reading);
        }
        out.push_back(point);
    }
    return out;
}

double skewness(std::span<const double> samples) {
    const auto n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= n;
    double m2 = 0.0, m3 = 0.0;
    for (double x : samples) {
        const double d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n;
    m3 /= n;
    return m2 == 0.0 ? 0.0 : m3 / std::pow(m2, 1.5);
}

ResidualHistogram residual_histogram(const ConsumptionSeries& series,
                                     const TemperatureSeries& temps, const DetectorConfig& config,
                                     Season season, DayType day_type, int bins) {
    config.validate();
    ProblemOptions popts;
    popts.policy = config.day_type_policy;
    popts.holidays = &config.holidays;
    popts.fit_intercept = config.fit_intercept;
    const auto problem = build_problem(series, temps, season, day_type, config.order_p, popts);
    const Eigen::VectorXd coeffs = fit_ols(problem);
    const Eigen::VectorXd fitted = problem.design * coeffs;

    std::vector<double> logs;
    logs.reserve(static_cast<std::size_t>(problem.n_rows()));
    for (long long r = 0; r < problem.n_rows(); ++r)
        logs.push_back(log_l1_residual(problem.target(r), fitted(r), config.residual_floor));

    ResidualHistogram h;
    h.n = static_cast<long long>(logs.size());
    const auto params = fit_gaussian(logs, config.sigma_floor);
    h.mu = params.mu;
    h.sigma = params.sigma;
    h.skewness = skewness(logs);

    double m2 = 0.0, m4 = 0.0;
    for (double x : logs) {
        const double d = x - h.mu;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= static_cast<double>(h.n);
    m4 /= static_cast<double>(h.n);
    h.excess_kurtosis = m2 == 0.0 ? 0.0 : m4 / (m2 * m2) - 3.0;

    const auto [lo_it, hi_it] = std::minmax_element(logs.begin(), logs.end());
    double lo = *lo_it, hi = *hi_it;
    if (lo == hi) hi = lo + 1.0; // degenerate: everything lands in one bin
    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    for (int b = 0; b <= bins; ++b)
        h.edges[static_cast<std::size_t>(b)] = lo + (hi - lo) * b / bins;
    for (double x : logs) {
        auto b = static_cast<std::size_t>((x - lo) / (hi - lo) * bins);
        if (b >= static_cast<std::size_t>(bins)) b = static_cast<std::size_t>(bins) - 1;
        ++h.counts[b];
    }
    return h;
}

std::vector<BenchPoint> scaling_run(std::span<const int> meter_counts, int days,
                                    std::uint64_t seed, const DetectorConfig& config,
                                    int threads) {
    using clock = std::chrono::steady_clock;
    auto seconds_since = [](clock::time_point t0) {
        return std::chrono::duration<double>(clock::now() - t0).count();
    };

    std::vector<BenchPoint> out;
    for (int meters : meter_counts) {
        BenchPoint point;
        point.meters = meters;

        FleetTemplate tmpl;
        tmpl.n_meters = meters;
        tmpl.n_days = days;
        tmpl.seed = seed;
        auto t0 = clock::now();
        auto fleet = generate_fleet(tmpl, threads);
        point.generate_seconds = seconds_since(t0);

        t0 = clock::now();
        auto serial = train_fleet(fleet.readings, fleet.temps, config, 1, 1,
                                  HourStamp::from_day_season(tmpl.start_day, 0));
        point.train_serial_seconds = seconds_since(t0);

        t0 = clock::now();
        auto parallel = train_fleet(fleet.readings, fleet.temps, config, threads, 1,
                                    HourStamp::from_day_season(tmpl.start_day, 0));
        point.train_parallel_seconds = seconds_since(t0);

        t0 = clock::now();
        DetectStats stats;
        replay_detect(parallel.snapshot, fleet.readings, fleet.temps, config, threads, &stats);
        point.detect_seconds = seconds_since(t0);
        point.detect_hours = static_cast<long long>(days) * kSeasonsPerDay;
        (void)serial;
        out.push_back(point);
    }
    return out;
}

} // namespace parxad
