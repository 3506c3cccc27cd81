#include "parxad/trainer.hpp"

#include "parxad/csv.hpp"
#include "parxad/parallel.hpp"
#include "parxad/residual.hpp"
#include "parxad/store.hpp"

#include <chrono>
#include <ostream>
#include <thread>

namespace parxad {

namespace {

std::vector<DayType> cell_day_types(DayTypePolicy policy) {
    if (policy == DayTypePolicy::Unified) return {DayType::AllDays};
    return {DayType::Workday, DayType::WeekendHoliday};
}

HourStamp now_stamp() {
    const auto now = std::chrono::system_clock::now();
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch());
    return HourStamp{secs.count() / 3600};
}

} // namespace

MeterTrainResult train_meter(const ConsumptionSeries& series, const TemperatureSeries& temps,
                             const DetectorConfig& config) {
    config.validate();
    if (series.empty())
        throw InsufficientDataError("meter " + series.meter_id() + ": empty series", 0);

    ProblemOptions popts;
    popts.policy = config.day_type_policy;
    popts.holidays = &config.holidays;
    popts.fit_intercept = config.fit_intercept;

    MeterTrainResult result;
    for (Season season = 0; season < kSeasonsPerDay; ++season) {
        for (DayType day_type : cell_day_types(config.day_type_policy)) {
            try {
                const auto problem =
                    build_problem(series, temps, season, day_type, config.order_p, popts);
                const Eigen::VectorXd coeffs = fit_ols(problem); // enforces the p+3 row floor
                ParxModel parx = make_model(series.meter_id(), season, day_type, problem, coeffs);

                // Residuals over the training days themselves (or a held-out
                // tail when configured), then the Gaussian over their logs.
                const Eigen::VectorXd fitted = problem.design * coeffs;
                long long first_row = 0;
                if (config.holdout_residuals) {
                    first_row = problem.n_rows() * 3 / 4;
                    if (problem.n_rows() - first_row < 2) first_row = problem.n_rows() - 2;
                    if (first_row < 0) first_row = 0;
                }
                std::vector<double> log_residuals;
                log_residuals.reserve(static_cast<std::size_t>(problem.n_rows() - first_row));
                for (long long r = first_row; r < problem.n_rows(); ++r)
                    log_residuals.push_back(
                        log_l1_residual(problem.target(r), fitted(r), config.residual_floor));

                const GaussianParams gaussian = fit_gaussian(log_residuals, config.sigma_floor);
                if (problem.n_rows() < config.min_rows_warn) ++result.low_sample_cells;
                result.models.push_back({std::move(parx), gaussian});
            } catch (const InsufficientDataError& e) {
                result.skipped.push_back({series.meter_id(), season, day_type, e.rows, e.what()});
            }
        }
    }

    if (result.models.empty())
        throw InsufficientDataError("meter " + series.meter_id() + ": no trainable cell",
                                    static_cast<long long>(series.size()));
    return result;
}

FleetTrainResult train_fleet(const Fleet& fleet, const TemperatureSeries& temps,
                             const DetectorConfig& config, int threads, std::int64_t version,
                             HourStamp created_at) {
    config.validate();
    if (fleet.empty()) throw InvalidInputError("train_fleet: empty dataset");

    struct PerMeter {
        MeterTrainResult result;
        bool untrainable = false;
        std::string error;
    };
    std::vector<PerMeter> per_meter(fleet.size());

    parallel_for(static_cast<std::int64_t>(fleet.size()), threads, [&](std::int64_t i) {
        auto& slot = per_meter[static_cast<std::size_t>(i)];
        try {
            slot.result = train_meter(fleet[static_cast<std::size_t>(i)], temps, config);
        } catch (const InsufficientDataError& e) {
            slot.untrainable = true;
            slot.error = e.what();
        }
    });

    FleetTrainResult out;
    out.snapshot.version = version;
    out.snapshot.created_at = created_at;
    out.snapshot.config = config;
    for (std::size_t i = 0; i < fleet.size(); ++i) {
        auto& slot = per_meter[i];
        if (slot.untrainable) {
            out.untrainable_meters.push_back(fleet[i].meter_id());
            out.skipped.push_back({fleet[i].meter_id(), 0, DayType::AllDays, 0, slot.error});
            continue;
        }
        out.low_sample_cells += static_cast<std::size_t>(slot.result.low_sample_cells);
        for (auto& model : slot.result.models) {
            ModelKey key{model.parx.meter_id, model.parx.season, model.parx.day_type};
            out.snapshot.models.emplace(std::move(key), std::move(model));
        }
        out.skipped.insert(out.skipped.end(), slot.result.skipped.begin(),
                           slot.result.skipped.end());
    }
    if (out.snapshot.models.empty())
        throw InsufficientDataError("train_fleet: no trainable meter", 0);
    return out;
}

BatchCycleStats run_batch_cycle(ServingStore& store, const std::filesystem::path& readings_file,
                                const std::filesystem::path& temps_file,
                                const BatchCycleOptions& opts) {
    BatchCycleStats stats;
    const auto interval = std::chrono::duration<double, std::ratio<3600>>(opts.interval_hours);
    while (!(opts.stop && opts.stop->load())) {
        const auto started = std::chrono::steady_clock::now();
        try {
            // Full recompute from the beginning of the data set, every cycle.
            const Fleet fleet = read_readings_csv(readings_file);
            const TemperatureSeries temps = read_temperatures_csv(temps_file);
            const std::int64_t version = store.latest_version() + 1;
            auto result = train_fleet(fleet, temps, opts.config, opts.threads, version, now_stamp());
            store.publish_snapshot(result.snapshot);
            stats.last_version = version;
            if (opts.log)
                *opts.log << "published snapshot v" << version << " ("
                          << result.snapshot.models.size() << " models, "
                          << result.skipped.size() << " skipped cells)\n";
        } catch (const std::exception& e) {
            // Previous snapshot stays live; try again next cycle.
            ++stats.failures;
            if (opts.log) *opts.log << "batch cycle failed: " << e.what() << '\n';
        }
        ++stats.cycles;
        if (opts.max_cycles > 0 && stats.cycles >= opts.max_cycles) break;
        const auto deadline =
            started + std::chrono::duration_cast<std::chrono::steady_clock::duration>(interval);
        while (std::chrono::steady_clock::now() < deadline) {
            if (opts.stop && opts.stop->load()) return stats;
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
        }
    }
    return stats;
}

} // namespace parxad
