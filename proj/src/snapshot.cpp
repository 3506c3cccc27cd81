#include "parxad/snapshot.hpp"

#include "parxad/csv.hpp"
#include "parxad/num.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

namespace parxad {

namespace {

constexpr std::string_view kMagic = "parxad-snapshot 1";

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

std::string holidays_to_string(const HolidayCalendar& days) {
    std::string out;
    for (DayIndex d : days) {
        if (!out.empty()) out += ';';
        out += HourStamp::from_day_season(d, 0).date_string();
    }
    return out.empty() ? "-" : out;
}

HolidayCalendar holidays_from_string(std::string_view s, const std::string& origin) {
    HolidayCalendar out;
    if (s == "-") return out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto pos = s.find(';', start);
        auto tok = s.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                                 : pos - start);
        if (!tok.empty()) {
            auto day = parse_date(tok);
            if (!day) throw StoreError(origin + ": bad holiday date \"" + std::string(tok) + "\"");
            out.insert(*day);
        }
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

[[noreturn]] void corrupt(const std::string& origin, const std::string& what) {
    throw StoreError(origin + ": corrupt snapshot: " + what);
}

} // namespace

std::string serialize_snapshot(const ModelSnapshot& snapshot) {
    std::string body;
    body.reserve(snapshot.models.size() * 160);
    for (const auto& [key, model] : snapshot.models) {
        body += key.meter_id;
        body += ',';
        body += std::to_string(key.season);
        body += ',';
        body += to_string(key.day_type);
        body += ',';
        body += std::to_string(model.parx.order_p);
        for (double a : model.parx.alphas) {
            body += ',';
            body += fmt_g17(a);
        }
        for (double b : model.parx.betas) {
            body += ',';
            body += fmt_g17(b);
        }
        body += ',';
        body += fmt_g17(model.parx.intercept);
        body += ',';
        body += fmt_g17(model.gaussian.mu);
        body += ',';
        body += fmt_g17(model.gaussian.sigma);
        body += ',';
        body += std::to_string(model.gaussian.n_samples);
        body += ',';
        body += model.parx.trained_through.to_string();
        body += '\n';
    }

    std::ostringstream head;
    const auto& c = snapshot.config;
    head << kMagic << '\n'
         << "version " << snapshot.version << '\n'
         << "created_at " << snapshot.created_at.to_string() << '\n'
         << "epsilon " << fmt_g17(c.epsilon) << '\n'
         << "order " << c.order_p << '\n'
         << "day_type_policy " << to_string(c.day_type_policy) << '\n'
         << "residual_floor " << fmt_g17(c.residual_floor) << '\n'
         << "sigma_floor " << fmt_g17(c.sigma_floor) << '\n'
         << "fit_intercept " << (c.fit_intercept ? 1 : 0) << '\n'
         << "holdout_residuals " << (c.holdout_residuals ? 1 : 0) << '\n'
         << "min_rows_warn " << c.min_rows_warn << '\n'
         << "holidays " << holidays_to_string(c.holidays) << '\n'
         << "models " << snapshot.models.size() << '\n'
         << "checksum " << std::hex << fnv1a64(body) << '\n';
    return head.str() + body;
}

ModelSnapshot parse_snapshot(std::string_view text, const std::string& origin) {
    std::istringstream in{std::string(text)};
    std::string line;

    auto next_line = [&]() -> std::string {
        if (!std::getline(in, line)) corrupt(origin, "truncated header");
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };
    auto field = [&](const char* name) -> std::string {
        next_line();
        const std::string prefix = std::string(name) + " ";
        if (line.rfind(prefix, 0) != 0) corrupt(origin, std::string("expected \"") + name + "\"");
        return line.substr(prefix.size());
    };

    if (next_line() != kMagic) corrupt(origin, "bad magic");

    ModelSnapshot snap;
    auto version = parse_i64(field("version"));
    if (!version || *version < 1) corrupt(origin, "bad version");
    snap.version = *version;
    auto created = HourStamp::parse(field("created_at"));
    if (!created) corrupt(origin, "bad created_at");
    snap.created_at = *created;

    auto epsilon = parse_f64(field("epsilon"));
    auto order = parse_i64(field("order"));
    auto policy = policy_from_string(field("day_type_policy"));
    auto residual_floor = parse_f64(field("residual_floor"));
    auto sigma_floor = parse_f64(field("sigma_floor"));
    auto fit_intercept = parse_i64(field("fit_intercept"));
    auto holdout = parse_i64(field("holdout_residuals"));
    auto min_rows_warn = parse_i64(field("min_rows_warn"));
    auto holidays = holidays_from_string(field("holidays"), origin);
    if (!epsilon || !order || !policy || !residual_floor || !sigma_floor || !fit_intercept ||
        !holdout || !min_rows_warn)
        corrupt(origin, "bad config field");
    snap.config.epsilon = *epsilon;
    snap.config.order_p = static_cast<int>(*order);
    snap.config.day_type_policy = *policy;
    snap.config.residual_floor = *residual_floor;
    snap.config.sigma_floor = *sigma_floor;
    snap.config.fit_intercept = *fit_intercept != 0;
    snap.config.holdout_residuals = *holdout != 0;
    snap.config.min_rows_warn = static_cast<int>(*min_rows_warn);
    snap.config.holidays = std::move(holidays);

    auto count = parse_i64(field("models"));
    if (!count || *count < 0) corrupt(origin, "bad model count");
    const std::string checksum_text = field("checksum");

    std::string body;
    body.reserve(text.size());
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        body += line;
        body += '\n';
    }
    if (body.empty() && *count > 0) corrupt(origin, "missing records");

    std::ostringstream want;
    want << std::hex << fnv1a64(*count == 0 ? std::string_view{} : std::string_view(body));
    if (want.str() != checksum_text) corrupt(origin, "checksum mismatch");

    std::istringstream records(body);
    long long seen = 0;
    while (std::getline(records, line)) {
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() < 5) corrupt(origin, "short record");
        auto season = parse_i64(f[1]);
        auto day_type = day_type_from_string(f[2]);
        auto order_p = parse_i64(f[3]);
        if (!season || *season < 0 || *season > 23 || !day_type || !order_p || *order_p < 1)
            corrupt(origin, "bad record key");
        const auto p = static_cast<std::size_t>(*order_p);
        // meter,season,day_type,p + p alphas + 3 betas + intercept,mu,sigma,n,trained_through
        if (f.size() != 4 + p + 3 + 5) corrupt(origin, "wrong field count");

        SeasonDetectionModel model;
        model.parx.meter_id = f[0];
        model.parx.season = static_cast<Season>(*season);
        model.parx.day_type = *day_type;
        model.parx.order_p = static_cast<int>(p);
        model.parx.alphas.resize(p);
        std::size_t at = 4;
        for (std::size_t i = 0; i < p; ++i) {
            auto v = parse_f64(f[at++]);
            if (!v) corrupt(origin, "bad alpha");
            model.parx.alphas[i] = *v;
        }
        for (std::size_t i = 0; i < 3; ++i) {
            auto v = parse_f64(f[at++]);
            if (!v) corrupt(origin, "bad beta");
            model.parx.betas[i] = *v;
        }
        auto intercept = parse_f64(f[at++]);
        auto mu = parse_f64(f[at++]);
        auto sigma = parse_f64(f[at++]);
        auto n = parse_i64(f[at++]);
        auto through = HourStamp::parse(f[at++]);
        if (!intercept || !mu || !sigma || !n || !through) corrupt(origin, "bad record value");
        model.parx.intercept = *intercept;
        model.parx.has_intercept = snap.config.fit_intercept;
        model.parx.trained_through = *through;
        model.parx.n_samples = *n;
        model.gaussian.mu = *mu;
        model.gaussian.sigma = *sigma;
        model.gaussian.n_samples = *n;
        snap.models.emplace(ModelKey{model.parx.meter_id, model.parx.season, model.parx.day_type},
                            std::move(model));
        ++seen;
    }
    if (seen != *count) corrupt(origin, "record count mismatch");
    return snap;
}

void save_snapshot_file(const std::filesystem::path& file, const ModelSnapshot& snapshot) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot open " + file.string() + " for writing");
    out << serialize_snapshot(snapshot);
    out.flush();
    if (!out) throw IoError("write failed: " + file.string());
}

ModelSnapshot load_snapshot_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_snapshot(buf.str(), file.string());
}

} // namespace parxad
