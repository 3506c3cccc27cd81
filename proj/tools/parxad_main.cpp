// parxad: PARX + log-normal-residual anomaly detection for hourly smart-meter
// streams. One binary, subcommand per stage, so the batch and speed layers can
// run as two processes sharing one store directory.

#include "parxad/boxplot.hpp"
#include "parxad/csv.hpp"
#include "parxad/datagen.hpp"
#include "parxad/detector.hpp"
#include "parxad/evaluator.hpp"
#include "parxad/num.hpp"
#include "parxad/parallel.hpp"
#include "parxad/store.hpp"
#include "parxad/trainer.hpp"

#include "CLI11.hpp"

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace fs = std::filesystem;
using namespace parxad;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitIo = 4;

HourStamp now_stamp() {
    const auto now = std::chrono::system_clock::now();
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch());
    return HourStamp{secs.count() / 3600};
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        auto v = parse_f64(tok);
        if (!v) throw InvalidInputError("bad number \"" + tok + "\" in list");
        out.push_back(*v);
    }
    return out;
}

HolidayCalendar load_holidays(const std::string& file) {
    HolidayCalendar out;
    if (file.empty()) return out;
    std::ifstream in(file);
    if (!in) throw IoError("cannot open holidays file " + file);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto day = parse_date(line);
        if (!day) throw InvalidInputError("bad holiday date \"" + line + "\"");
        out.insert(*day);
    }
    return out;
}

/// Shared trainer/detector knobs, attached to the subcommands that fit or
/// score. Flags override --config file values (CLI11 precedence).
struct ConfigFlags {
    double epsilon = 0.05;
    int order = 3;
    std::string day_type = "all";
    double residual_floor = 1e-6;
    double sigma_floor = 1e-3;
    bool fit_intercept = false;
    bool holdout = false;
    int min_rows_warn = 30;
    std::string holidays_file;
    int threads = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--epsilon", epsilon, "Density threshold for anomalies");
        cmd->add_option("--order", order, "Autoregression order p");
        cmd->add_option("--day-type", day_type, "Day-type policy: all|split")
            ->check(CLI::IsMember({"all", "split"}));
        cmd->add_option("--residual-floor", residual_floor, "Floor on |actual-predicted|");
        cmd->add_option("--sigma-floor", sigma_floor, "Floor on fitted sigma");
        cmd->add_flag("--fit-intercept", fit_intercept, "Add a constant regression column");
        cmd->add_flag("--holdout-residuals", holdout,
                      "Fit the Gaussian on held-out rather than in-sample residuals");
        cmd->add_option("--min-rows-warn", min_rows_warn, "Low-sample warning threshold");
        cmd->add_option("--holidays", holidays_file, "File with one YYYY-MM-DD holiday per line");
        cmd->add_option("--threads,-j", threads, "Worker threads (0 = all cores)");
    }

    DetectorConfig to_config() const {
        DetectorConfig c;
        c.epsilon = epsilon;
        c.order_p = order;
        c.day_type_policy = day_type == "split" ? DayTypePolicy::Split : DayTypePolicy::Unified;
        c.residual_floor = residual_floor;
        c.sigma_floor = sigma_floor;
        c.fit_intercept = fit_intercept;
        c.holdout_residuals = holdout;
        c.min_rows_warn = min_rows_warn;
        c.holidays = load_holidays(holidays_file);
        c.validate();
        return c;
    }

    std::string echo() const {
        std::ostringstream s;
        s << "epsilon=" << fmt_g17(epsilon) << " order=" << order << " day_type=" << day_type
          << " residual_floor=" << fmt_g17(residual_floor)
          << " sigma_floor=" << fmt_g17(sigma_floor) << " fit_intercept=" << fit_intercept
          << " holdout_residuals=" << holdout;
        return s.str();
    }
};

std::ostream& open_or_stdout(std::ofstream& file, const std::string& path) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path, std::ios::binary);
    if (!file) throw IoError("cannot open " + path + " for writing");
    return file;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
    FleetTemplate tmpl;
    std::string start_date = "2024-01-01";
    std::string alphas;
    std::string inject_kind = "spike";
    std::string out_dir;
    int threads = 0;
};

void cmd_generate(GenerateArgs& a) {
    auto day = parse_date(a.start_date);
    if (!day) throw InvalidInputError("bad --start-date \"" + a.start_date + "\"");
    a.tmpl.start_day = *day;
    a.tmpl.drift_start_day += *day; // flag value is relative to the range start
    if (!a.alphas.empty()) a.tmpl.ar_alphas = parse_double_list(a.alphas);
    a.tmpl.inject_kind = a.inject_kind == "drop" ? AnomalyKind::Drop : AnomalyKind::Spike;
    a.tmpl.temps.seed = a.tmpl.seed;

    const auto fleet = generate_fleet(a.tmpl, effective_threads(a.threads));
    fs::create_directories(a.out_dir);
    write_readings_csv(fs::path(a.out_dir) / "readings.csv", fleet.readings);
    write_temperatures_csv(fs::path(a.out_dir) / "temps.csv", fleet.temps);
    write_labels_csv(fs::path(a.out_dir) / "labels.csv", fleet.labels);
    if (a.tmpl.inject_rate > 0.0)
        write_readings_csv(fs::path(a.out_dir) / "readings_clean.csv", fleet.clean);

    std::size_t rows = 0;
    for (const auto& s : fleet.readings) rows += s.size();
    std::cout << "generated " << a.tmpl.n_meters << " meters x " << a.tmpl.n_days << " days ("
              << rows << " readings, " << fleet.labels.size() << " injected anomalies) into "
              << a.out_dir << "\n";
}

// ---------------------------------------------------------------------------
// train / serve-batch

std::int64_t next_version(const std::string& store_dir) {
    if (store_dir.empty()) return 1;
    return ServingStore(store_dir).latest_version() + 1;
}

void cmd_train(const std::string& readings_file, const std::string& temps_file,
               const ConfigFlags& flags, const std::string& out_file,
               const std::string& store_dir) {
    const auto config = flags.to_config();
    const Fleet fleet = read_readings_csv(readings_file);
    const auto temps = read_temperatures_csv(temps_file);

    const auto result = train_fleet(fleet, temps, config, effective_threads(flags.threads),
                                    next_version(store_dir), now_stamp());
    std::cout << "trained " << result.snapshot.models.size() << " models ("
              << result.skipped.size() << " skipped cells, " << result.low_sample_cells
              << " low-sample, " << result.untrainable_meters.size()
              << " untrainable meters) with " << flags.echo() << "\n";
    for (const auto& cell : result.skipped)
        std::cerr << "skipped " << cell.meter_id << " season " << cell.season << " "
                  << to_string(cell.day_type) << ": " << cell.reason << "\n";

    if (!store_dir.empty()) {
        ServingStore store(store_dir);
        store.publish_snapshot(result.snapshot);
        std::cout << "published snapshot v" << result.snapshot.version << " to " << store_dir
                  << "\n";
    }
    if (!out_file.empty()) {
        save_snapshot_file(out_file, result.snapshot);
        std::cout << "wrote " << out_file << "\n";
    }
}

void cmd_serve_batch(const std::string& readings_file, const std::string& temps_file,
                     const ConfigFlags& flags, const std::string& store_dir,
                     double interval_hours, int cycles) {
    ServingStore store(store_dir);
    BatchCycleOptions opts;
    opts.config = flags.to_config();
    opts.threads = effective_threads(flags.threads);
    opts.interval_hours = interval_hours;
    opts.max_cycles = cycles;
    opts.log = &std::cout;
    const auto stats = run_batch_cycle(store, readings_file, temps_file, opts);
    std::cout << "serve-batch done: " << stats.cycles << " cycles, " << stats.failures
              << " failures, latest v" << stats.last_version << "\n";
}

// ---------------------------------------------------------------------------
// detect / serve-detect

/// Blocking single-connection TCP source carrying the readings wire format.
class TcpLineStream : public std::streambuf {
public:
    explicit TcpLineStream(int port) {
        listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (listen_fd_ < 0) throw IoError("socket() failed");
        const int one = 1;
        ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_ANY);
        addr.sin_port = htons(static_cast<std::uint16_t>(port));
        if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
            throw IoError("bind() failed on port " + std::to_string(port));
        if (::listen(listen_fd_, 1) != 0) throw IoError("listen() failed");
        conn_fd_ = ::accept(listen_fd_, nullptr, nullptr);
        if (conn_fd_ < 0) throw IoError("accept() failed");
    }
    ~TcpLineStream() override {
        if (conn_fd_ >= 0) ::close(conn_fd_);
        if (listen_fd_ >= 0) ::close(listen_fd_);
    }

protected:
    int_type underflow() override {
        const auto n = ::read(conn_fd_, buf_, sizeof buf_);
        if (n <= 0) return traits_type::eof();
        setg(buf_, buf_, buf_ + n);
        return traits_type::to_int_type(*gptr());
    }

private:
    int listen_fd_ = -1;
    int conn_fd_ = -1;
    char buf_[1 << 16];
};

void cmd_detect(const std::string& models, const std::string& temps_file,
                const ConfigFlags& flags, const std::string& source, const std::string& out_file,
                const std::string& store_dir, bool live_store_mode) {
    const DetectorConfig config = flags.to_config();
    const auto temps = read_temperatures_csv(temps_file);

    std::ofstream out_stream;
    auto& out = open_or_stdout(out_stream, out_file);
    out << "# parxad detect " << flags.echo() << "\n";
    out << "meter_id,stamp,season,actual,predicted,score,model_version\n";

    const bool models_is_dir = fs::is_directory(models);

    // File sources replay from memory in any line order; stdin and tcp stream
    // strictly by hour.
    std::unique_ptr<std::istream> owned_stream;
    std::unique_ptr<TcpLineStream> tcp;
    std::unique_ptr<ReadingSource> src;
    Fleet replay_fleet;
    if (source == "-") {
        src = std::make_unique<CsvStreamSource>(std::cin, "stdin");
    } else if (source.rfind("tcp:", 0) == 0) {
        auto port = parse_i64(source.substr(4));
        if (!port || *port < 1 || *port > 65535)
            throw InvalidInputError("bad --source \"" + source + "\"");
        tcp = std::make_unique<TcpLineStream>(static_cast<int>(*port));
        owned_stream = std::make_unique<std::istream>(tcp.get());
        src = std::make_unique<CsvStreamSource>(*owned_stream, source);
    } else {
        replay_fleet = read_readings_csv(source);
        src = std::make_unique<FleetReplaySource>(replay_fleet);
    }

    StreamStats stats;
    if (models_is_dir || live_store_mode) {
        // Live mode: hourly snapshot refresh + anomaly appends into the store.
        ServingStore store(models_is_dir ? models : store_dir);
        StreamOptions opts;
        opts.config = config;
        opts.threads = effective_threads(flags.threads);
        opts.record_sink = &out;
        opts.append_to_store = true;
        opts.log = &std::cerr;
        stats = run_stream(*src, store, temps, opts);
    } else {
        // Fixed snapshot from a file; optional --store receives the appends.
        const auto snapshot = load_snapshot_file(models);
        if (snapshot.config.order_p != config.order_p)
            std::cerr << "note: snapshot has order p=" << snapshot.config.order_p
                      << ", --order " << config.order_p << " ignored\n";
        std::unique_ptr<ServingStore> store;
        if (!store_dir.empty()) store = std::make_unique<ServingStore>(store_dir);
        WindowSet windows(snapshot.config.order_p);
        while (auto batch = src->next()) {
            const auto celsius = temps.at(batch->stamp);
            if (!celsius) {
                ++stats.detect.deferred_hours;
                for (const auto& r : batch->readings) windows.ingest(r);
                continue;
            }
            auto hour_records = detect_hour(*batch, *celsius, snapshot, windows, config,
                                            effective_threads(flags.threads), &stats.detect);
            for (const auto& r : batch->readings) windows.ingest(r);
            for (const auto& r : hour_records) out << record_to_csv(r) << "\n";
            if (store && !hour_records.empty()) store->append_anomalies(hour_records);
            stats.records += hour_records.size();
            ++stats.hours;
        }
    }
    out.flush();
    std::cerr << "detect: " << stats.hours << " hours, " << stats.detect.scored << " scored, "
              << stats.records << " anomalies, " << stats.detect.skipped_no_model << " no-model, "
              << stats.detect.skipped_incomplete_lags << " cold-start skips, "
              << stats.detect.deferred_hours << " deferred hours\n";
}

// ---------------------------------------------------------------------------
// baseline / evaluate / sweep / refresh-study / histogram / bench

void cmd_baseline(const std::string& readings_file, const std::string& out_file) {
    const Fleet fleet = read_readings_csv(readings_file);
    std::ofstream out_stream;
    auto& out = open_or_stdout(out_stream, out_file);
    out << "meter_id,stamp,season,kwh,fence\n";
    std::size_t total = 0, upper = 0, skipped_meters = 0;
    for (const auto& series : fleet) {
        try {
            for (const auto& o : detect_boxplot(series)) {
                out << series.meter_id() << ',' << o.stamp.to_string() << ',' << o.season << ','
                    << fmt_g17(o.kwh) << ',' << (o.above_upper ? "upper" : "lower") << "\n";
                ++total;
                upper += o.above_upper;
            }
        } catch (const InsufficientDataError& e) {
            ++skipped_meters;
            std::cerr << "skipped " << series.meter_id() << ": " << e.what() << "\n";
        }
    }
    out.flush();
    std::cerr << "baseline: " << total << " outliers (" << upper << " above, " << total - upper
              << " below), " << skipped_meters << " meters skipped\n";
}

HourStamp parse_after(const std::string& after) {
    if (after.empty()) return HourStamp{std::numeric_limits<std::int64_t>::min()};
    auto stamp = HourStamp::parse(after);
    if (!stamp) throw InvalidInputError("bad --after \"" + after + "\" (want YYYY-MM-DDTHH)");
    return *stamp;
}

void cmd_evaluate(const std::string& labels_file, const std::string& records_file,
                  const std::string& after, long long scored_hours) {
    const auto labels = read_labels_csv(labels_file);
    const auto records = read_records_csv(records_file);
    const auto c = evaluate(labels, records, parse_after(after), scored_hours);
    std::cout << "tp=" << c.tp << " fp=" << c.fp << " fn=" << c.fn;
    if (scored_hours > 0) std::cout << " tn=" << c.tn;
    std::cout << "\nprecision=" << c.precision() << " recall=" << c.recall() << " f1=" << c.f1()
              << "\n";
}

void cmd_sweep(const std::string& models_file, const std::string& readings_file,
               const std::string& temps_file, const ConfigFlags& flags,
               const std::string& epsilons_text, const std::string& labels_file,
               const std::string& after, const std::string& out_file) {
    const auto snapshot = load_snapshot_file(models_file);
    const Fleet stream = read_readings_csv(readings_file);
    const auto temps = read_temperatures_csv(temps_file);
    const auto epsilons = parse_double_list(epsilons_text);
    std::vector<InjectedAnomaly> labels;
    if (!labels_file.empty()) labels = read_labels_csv(labels_file);

    const auto points =
        sweep_epsilon(snapshot, stream, temps, flags.to_config(), epsilons,
                      labels_file.empty() ? nullptr : &labels, parse_after(after),
                      effective_threads(flags.threads));
    std::ofstream out_stream;
    auto& out = open_or_stdout(out_stream, out_file);
    out << "# parxad sweep " << flags.echo() << "\n";
    out << "epsilon,anomalies,tp,fp,fn,precision,recall\n";
    for (const auto& p : points)
        out << fmt_g17(p.epsilon) << ',' << p.anomalies << ',' << p.counts.tp << ','
            << p.counts.fp << ',' << p.counts.fn << ',' << p.counts.precision() << ','
            << p.counts.recall() << "\n";
    out.flush();
}

void cmd_refresh_study(const std::string& readings_file, const std::string& temps_file,
                       const ConfigFlags& flags, const std::string& detect_start,
                       const std::string& out_file) {
    const Fleet readings = read_readings_csv(readings_file);
    const auto temps = read_temperatures_csv(temps_file);
    auto day = parse_date(detect_start);
    if (!day) throw InvalidInputError("bad --detect-start \"" + detect_start + "\"");

    RefreshStudyOptions opts;
    opts.config = flags.to_config();
    opts.detect_start_day = *day;
    opts.threads = effective_threads(flags.threads);
    const auto points = refresh_study(readings, temps, opts);

    std::ofstream out_stream;
    auto& out = open_or_stdout(out_stream, out_file);
    out << "# parxad refresh-study " << flags.echo() << "\n";
    out << "scenario,anomalies,retrains\n";
    for (const auto& p : points)
        out << to_string(p.scenario) << ',' << p.anomalies << ',' << p.retrains << "\n";
    out.flush();
}

void cmd_histogram(const std::string& readings_file, const std::string& temps_file,
                   const ConfigFlags& flags, const std::string& meter, int season, int bins,
                   const std::string& out_file) {
    const Fleet fleet = read_readings_csv(readings_file);
    const auto temps = read_temperatures_csv(temps_file);
    const ConsumptionSeries* series = nullptr;
    for (const auto& s : fleet)
        if (s.meter_id() == meter) series = &s;
    if (!series) throw InvalidInputError("meter \"" + meter + "\" not in " + readings_file);

    const auto config = flags.to_config();
    const auto day_type =
        config.day_type_policy == DayTypePolicy::Unified ? DayType::AllDays : DayType::Workday;
    const auto h = residual_histogram(*series, temps, config, season, day_type, bins);

    std::ofstream out_stream;
    auto& out = open_or_stdout(out_stream, out_file);
    out << "# parxad histogram meter=" << meter << " season=" << season << " n=" << h.n
        << " mu=" << fmt_g17(h.mu) << " sigma=" << fmt_g17(h.sigma)
        << " skewness=" << fmt_g17(h.skewness)
        << " excess_kurtosis=" << fmt_g17(h.excess_kurtosis) << "\n";
    out << "bin_lo,bin_hi,count\n";
    for (std::size_t b = 0; b < h.counts.size(); ++b)
        out << fmt_g17(h.edges[b]) << ',' << fmt_g17(h.edges[b + 1]) << ',' << h.counts[b] << "\n";
    out.flush();
}

void cmd_bench(const std::string& meters_text, int days, std::uint64_t seed,
               const ConfigFlags& flags, const std::string& out_file) {
    std::vector<int> meter_counts;
    for (double v : parse_double_list(meters_text)) meter_counts.push_back(static_cast<int>(v));
    const auto points =
        scaling_run(meter_counts, days, seed, flags.to_config(), effective_threads(flags.threads));

    std::ofstream out_stream;
    auto& out = open_or_stdout(out_stream, out_file);
    out << "# parxad bench days=" << days << " seed=" << seed << " " << flags.echo() << "\n";
    out << "meters,generate_s,train_serial_s,train_parallel_s,speedup,detect_s,detect_hours\n";
    for (const auto& p : points)
        out << p.meters << ',' << p.generate_seconds << ',' << p.train_serial_seconds << ','
            << p.train_parallel_seconds << ','
            << (p.train_parallel_seconds > 0 ? p.train_serial_seconds / p.train_parallel_seconds
                                             : 0.0)
            << ',' << p.detect_seconds << ',' << p.detect_hours << "\n";
    for (std::size_t i = 1; i < points.size(); ++i)
        out << "# train-time ratio " << points[i].meters << "/" << points[i - 1].meters << " = "
            << points[i].train_parallel_seconds /
                   std::max(points[i - 1].train_parallel_seconds, 1e-9)
            << "\n";
    out.flush();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"PARX anomaly detection for hourly smart-meter streams"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read defaults from a TOML/INI config file");

    GenerateArgs gen;
    auto* cmd_gen = app.add_subcommand("generate", "Generate a synthetic fleet");
    cmd_gen->add_option("--meters", gen.tmpl.n_meters, "Number of meters")->required();
    cmd_gen->add_option("--days", gen.tmpl.n_days, "Days of hourly data")->required();
    cmd_gen->add_option("--seed", gen.tmpl.seed, "RNG seed");
    cmd_gen->add_option("--start-date", gen.start_date, "First day (YYYY-MM-DD)");
    cmd_gen->add_option("--inject-rate", gen.tmpl.inject_rate, "Fraction of hours to corrupt");
    cmd_gen->add_option("--inject-magnitude", gen.tmpl.inject_magnitude, "Spike/drop multiplier");
    cmd_gen->add_option("--inject-kind", gen.inject_kind, "spike|drop")
        ->check(CLI::IsMember({"spike", "drop"}));
    cmd_gen->add_option("--weekend-multiplier", gen.tmpl.weekend_multiplier,
                        "Weekend consumption scale");
    cmd_gen->add_option("--alphas", gen.alphas, "AR coefficients, comma separated");
    cmd_gen->add_option("--noise-sigma", gen.tmpl.noise_sigma, "Sd of ln-residuals");
    cmd_gen->add_option("--noise-rel", gen.tmpl.noise_rel, "Typical relative deviation");
    cmd_gen->add_option("--base-scale-min", gen.tmpl.base_scale_min, "Meter scale range low");
    cmd_gen->add_option("--base-scale-max", gen.tmpl.base_scale_max, "Meter scale range high");
    cmd_gen->add_option("--temp-beta-scale", gen.tmpl.temp_beta_scale,
                        "Scale on temperature sensitivity");
    cmd_gen->add_option("--temp-mean", gen.tmpl.temps.mean_celsius, "Mean temperature");
    cmd_gen->add_option("--temp-annual", gen.tmpl.temps.annual_amplitude, "Annual amplitude");
    cmd_gen->add_option("--temp-diurnal", gen.tmpl.temps.diurnal_amplitude, "Diurnal amplitude");
    cmd_gen->add_option("--temp-jitter", gen.tmpl.temps.daily_jitter_sd, "Daily jitter sd");
    cmd_gen->add_option("--temp-min", gen.tmpl.temps.min_celsius, "Clamp low");
    cmd_gen->add_option("--temp-max", gen.tmpl.temps.max_celsius, "Clamp high");
    cmd_gen->add_option("--drift", gen.tmpl.drift_total, "Total base-level ramp, e.g. 0.3");
    cmd_gen->add_option("--drift-start-day", gen.tmpl.drift_start_day,
                        "Ramp start, days after --start-date");
    cmd_gen->add_option("--drift-days", gen.tmpl.drift_days, "Ramp duration in days");
    cmd_gen->add_option("--threads,-j", gen.threads, "Worker threads (0 = all cores)");
    cmd_gen->add_option("--out-dir", gen.out_dir, "Output directory")->required();

    ConfigFlags train_flags;
    std::string train_readings, train_temps, train_out, train_store;
    auto* cmd_tr = app.add_subcommand("train", "Fit detection models for every meter");
    cmd_tr->add_option("--readings", train_readings, "Readings CSV")->required();
    cmd_tr->add_option("--temps", train_temps, "Temperature CSV")->required();
    cmd_tr->add_option("--out", train_out, "Snapshot file to write");
    cmd_tr->add_option("--store", train_store, "Store directory to publish into")
        ->envname("PARXAD_STORE");
    train_flags.attach(cmd_tr);

    ConfigFlags batch_flags;
    std::string batch_readings, batch_temps, batch_store;
    double batch_interval = 24.0;
    int batch_cycles = 0;
    auto* cmd_sb = app.add_subcommand("serve-batch", "Loop: retrain and publish snapshots");
    cmd_sb->add_option("--readings", batch_readings, "Readings CSV (re-read each cycle)")
        ->required();
    cmd_sb->add_option("--temps", batch_temps, "Temperature CSV")->required();
    cmd_sb->add_option("--store", batch_store, "Store directory")
        ->envname("PARXAD_STORE")
        ->required();
    cmd_sb->add_option("--interval-hours", batch_interval, "Time between cycle starts");
    cmd_sb->add_option("--cycles", batch_cycles, "Stop after N cycles (0 = forever)");
    batch_flags.attach(cmd_sb);

    ConfigFlags detect_flags;
    std::string detect_models, detect_temps, detect_source = "-", detect_out, detect_store;
    auto* cmd_de = app.add_subcommand("detect", "Score a reading stream against models");
    cmd_de->add_option("--models", detect_models, "Snapshot file or store directory")->required();
    cmd_de->add_option("--temps", detect_temps, "Temperature CSV")->required();
    cmd_de->add_option("--source", detect_source, "Readings file, - for stdin, or tcp:PORT");
    cmd_de->add_option("--out", detect_out, "Anomaly records CSV (default stdout)");
    cmd_de->add_option("--store", detect_store, "Store directory for anomaly appends")
        ->envname("PARXAD_STORE");
    detect_flags.attach(cmd_de);

    ConfigFlags sdetect_flags;
    std::string sdetect_store, sdetect_temps, sdetect_source = "-", sdetect_out;
    auto* cmd_sd = app.add_subcommand(
        "serve-detect", "Speed layer: stream detection with hourly snapshot refresh");
    cmd_sd->add_option("--store", sdetect_store, "Store directory")
        ->envname("PARXAD_STORE")
        ->required();
    cmd_sd->add_option("--temps", sdetect_temps, "Temperature CSV")->required();
    cmd_sd->add_option("--source", sdetect_source, "Readings file, - for stdin, or tcp:PORT");
    cmd_sd->add_option("--out", sdetect_out, "Anomaly records CSV (default stdout)");
    sdetect_flags.attach(cmd_sd);

    std::string base_readings, base_out;
    auto* cmd_ba = app.add_subcommand("baseline", "Per-season boxplot outlier baseline");
    cmd_ba->add_option("--readings", base_readings, "Readings CSV")->required();
    cmd_ba->add_option("--out", base_out, "Outliers CSV (default stdout)");

    std::string eval_labels, eval_records, eval_after;
    long long eval_scored = 0;
    auto* cmd_ev = app.add_subcommand("evaluate", "Precision/recall against injected labels");
    cmd_ev->add_option("--labels", eval_labels, "Labels CSV from generate")->required();
    cmd_ev->add_option("--records", eval_records, "Anomaly records CSV from detect")->required();
    cmd_ev->add_option("--after", eval_after, "Ignore labels/records before YYYY-MM-DDTHH");
    cmd_ev->add_option("--scored-hours", eval_scored, "Total scored hours (enables tn)");

    ConfigFlags sweep_flags;
    std::string sweep_models, sweep_readings, sweep_temps, sweep_eps = "0.05,0.10,0.15";
    std::string sweep_labels, sweep_after, sweep_out;
    auto* cmd_sw = app.add_subcommand("sweep", "Anomaly counts across epsilon values");
    cmd_sw->add_option("--models", sweep_models, "Snapshot file")->required();
    cmd_sw->add_option("--readings", sweep_readings, "Readings CSV")->required();
    cmd_sw->add_option("--temps", sweep_temps, "Temperature CSV")->required();
    cmd_sw->add_option("--epsilons", sweep_eps, "Comma-separated thresholds");
    cmd_sw->add_option("--labels", sweep_labels, "Labels CSV (adds precision/recall)");
    cmd_sw->add_option("--after", sweep_after, "Ignore stamps before YYYY-MM-DDTHH");
    cmd_sw->add_option("--out", sweep_out, "CSV output (default stdout)");
    sweep_flags.attach(cmd_sw);

    ConfigFlags refresh_flags;
    std::string refresh_readings, refresh_temps, refresh_start, refresh_out;
    auto* cmd_rs =
        app.add_subcommand("refresh-study", "Daily vs 10-day vs never model refreshes");
    cmd_rs->add_option("--readings", refresh_readings, "Readings CSV")->required();
    cmd_rs->add_option("--temps", refresh_temps, "Temperature CSV")->required();
    cmd_rs->add_option("--detect-start", refresh_start, "Detection start date (YYYY-MM-DD)")
        ->required();
    cmd_rs->add_option("--out", refresh_out, "CSV output (default stdout)");
    refresh_flags.attach(cmd_rs);

    ConfigFlags hist_flags;
    std::string hist_readings, hist_temps, hist_meter, hist_out;
    int hist_season = 18, hist_bins = 30;
    auto* cmd_hi = app.add_subcommand("histogram", "ln-L1 residual distribution of one cell");
    cmd_hi->add_option("--readings", hist_readings, "Readings CSV")->required();
    cmd_hi->add_option("--temps", hist_temps, "Temperature CSV")->required();
    cmd_hi->add_option("--meter", hist_meter, "Meter id")->required();
    cmd_hi->add_option("--season", hist_season, "Hour of day 0-23")->check(CLI::Range(0, 23));
    cmd_hi->add_option("--bins", hist_bins, "Histogram bins");
    cmd_hi->add_option("--out", hist_out, "CSV output (default stdout)");
    hist_flags.attach(cmd_hi);

    ConfigFlags bench_flags;
    std::string bench_meters = "1000,2000,4000", bench_out;
    int bench_days = 30;
    std::uint64_t bench_seed = 1;
    auto* cmd_be = app.add_subcommand("bench", "Serial vs parallel scaling timings");
    cmd_be->add_option("--meters", bench_meters, "Comma-separated fleet sizes");
    cmd_be->add_option("--days", bench_days, "Days per fleet");
    cmd_be->add_option("--seed", bench_seed, "RNG seed");
    cmd_be->add_option("--out", bench_out, "CSV output (default stdout)");
    bench_flags.attach(cmd_be);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help and friends
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (cmd_gen->parsed()) cmd_generate(gen);
        if (cmd_tr->parsed()) {
            if (train_out.empty() && train_store.empty())
                throw InvalidInputError("train: need --out and/or --store");
            cmd_train(train_readings, train_temps, train_flags, train_out, train_store);
        }
        if (cmd_sb->parsed())
            cmd_serve_batch(batch_readings, batch_temps, batch_flags, batch_store, batch_interval,
                            batch_cycles);
        if (cmd_de->parsed())
            cmd_detect(detect_models, detect_temps, detect_flags, detect_source, detect_out,
                       detect_store, false);
        if (cmd_sd->parsed())
            cmd_detect(sdetect_store, sdetect_temps, sdetect_flags, sdetect_source, sdetect_out,
                       sdetect_store, true);
        if (cmd_ba->parsed()) cmd_baseline(base_readings, base_out);
        if (cmd_ev->parsed()) cmd_evaluate(eval_labels, eval_records, eval_after, eval_scored);
        if (cmd_sw->parsed())
            cmd_sweep(sweep_models, sweep_readings, sweep_temps, sweep_flags, sweep_eps,
                      sweep_labels, sweep_after, sweep_out);
        if (cmd_rs->parsed())
            cmd_refresh_study(refresh_readings, refresh_temps, refresh_flags, refresh_start,
                              refresh_out);
        if (cmd_hi->parsed())
            cmd_histogram(hist_readings, hist_temps, hist_flags, hist_meter, hist_season,
                          hist_bins, hist_out);
        if (cmd_be->parsed())
            cmd_bench(bench_meters, bench_days, bench_seed, bench_flags, bench_out);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}
