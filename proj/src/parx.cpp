#include "parxad/parx.hpp"

#include <cmath>
#include <map>

namespace parxad {

ExogenousFeatures exogenous_features(double celsius) {
    if (!std::isfinite(celsius))
        throw InvalidInputError("temperature is not finite");
    ExogenousFeatures f;
    if (celsius > 20.0) f.xt1 = celsius - 20.0;
    if (celsius < 16.0) f.xt2 = 16.0 - celsius;
    if (celsius < 5.0) f.xt3 = 5.0 - celsius;
    return f;
}

double predict(const ParxModel& model, std::span<const double> lags, double celsius) {
    if (static_cast<int>(lags.size()) != model.order_p)
        throw InvalidInputError("predict: expected " + std::to_string(model.order_p) +
                                " lags, got " + std::to_string(lags.size()));
    for (double lag : lags)
        if (!std::isfinite(lag)) throw InvalidInputError("predict: non-finite lag");
    const auto xt = exogenous_features(celsius);
    double y = model.intercept;
    for (std::size_t i = 0; i < lags.size(); ++i) y += model.alphas[i] * lags[i];
    y += model.betas[0] * xt.xt1 + model.betas[1] * xt.xt2 + model.betas[2] * xt.xt3;
    return y;
}

RegressionProblem build_problem(const ConsumptionSeries& series, const TemperatureSeries& temps,
                                Season season, DayType day_type, int order_p,
                                const ProblemOptions& opts) {
    if (order_p < 1) throw InvalidInputError("order p must be >= 1");
    static const HolidayCalendar kNoHolidays;
    const HolidayCalendar& holidays = opts.holidays ? *opts.holidays : kNoHolidays;

    // This season's readings, keyed by day.
    std::map<DayIndex, double> at_season;
    for (const auto& [stamp, kwh] : series.readings())
        if (stamp.season() == season) at_season.emplace(stamp.day(), kwh);

    const int n_cols = order_p + 3 + (opts.fit_intercept ? 1 : 0);
    std::vector<double> rows;
    std::vector<double> targets;
    std::vector<HourStamp> stamps;
    std::vector<double> lagbuf(static_cast<std::size_t>(order_p));

    for (const auto& [day, kwh] : at_season) {
        const HourStamp stamp = HourStamp::from_day_season(day, season);
        if (classify_day(stamp, opts.policy, holidays) != day_type) continue;
        const auto celsius = temps.at(day, season);
        if (!celsius) continue;
        bool complete = true;
        for (int i = 1; i <= order_p; ++i) {
            auto it = at_season.find(day - i);
            if (it == at_season.end()) {
                complete = false;
                break;
            }
            lagbuf[static_cast<std::size_t>(i - 1)] = it->second;
        }
        if (!complete) continue;

        const auto xt = exogenous_features(*celsius);
        for (int i = 0; i < order_p; ++i) rows.push_back(lagbuf[static_cast<std::size_t>(i)]);
        rows.push_back(xt.xt1);
        rows.push_back(xt.xt2);
        rows.push_back(xt.xt3);
        if (opts.fit_intercept) rows.push_back(1.0);
        targets.push_back(kwh);
        stamps.push_back(stamp);
    }

    const long long n = static_cast<long long>(targets.size());
    if (n == 0)
        throw InsufficientDataError("season " + std::to_string(season) + " day-type " +
                                        std::string(to_string(day_type)) +
                                        ": no usable rows after gap exclusion",
                                    0);

    RegressionProblem problem;
    problem.order_p = order_p;
    problem.has_intercept = opts.fit_intercept;
    problem.design.resize(n, n_cols);
    problem.target.resize(n);
    for (long long r = 0; r < n; ++r) {
        for (int c = 0; c < n_cols; ++c)
            problem.design(r, c) = rows[static_cast<std::size_t>(r) * n_cols + c];
        problem.target(r) = targets[static_cast<std::size_t>(r)];
    }
    problem.stamps = std::move(stamps);
    return problem;
}

Eigen::VectorXd fit_ols(const RegressionProblem& problem) {
    const auto& X = problem.design;
    const auto& y = problem.target;
    const int min_rows = problem.order_p + 3 + (problem.has_intercept ? 1 : 0);
    if (X.rows() < min_rows)
        throw InsufficientDataError("OLS needs at least " + std::to_string(min_rows) + " rows",
                                    X.rows());

    const Eigen::VectorXd rhs = X.transpose() * y;
    if (rhs.isZero(0.0)) // exact minimum-norm solution of a zero target
        return Eigen::VectorXd::Zero(X.cols());

    const Eigen::MatrixXd gram = X.transpose() * X;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    bool healthy = ldlt.info() == Eigen::Success && ldlt.isPositive();
    if (healthy) {
        const auto& d = ldlt.vectorD();
        const double dmax = d.maxCoeff();
        const double dmin = d.minCoeff();
        healthy = dmin > 0.0 && dmax / dmin < 1e12; // Gram condition threshold
    }
    if (healthy) {
        Eigen::VectorXd w = ldlt.solve(rhs);
        if (w.allFinite()) return w;
    }
    // Near-singular: rank-revealing decomposition of X itself, minimum-norm.
    return X.completeOrthogonalDecomposition().solve(y);
}

ParxModel make_model(std::string meter_id, Season season, DayType day_type,
                     const RegressionProblem& problem, const Eigen::VectorXd& coeffs) {
    ParxModel m;
    m.meter_id = std::move(meter_id);
    m.season = season;
    m.day_type = day_type;
    m.order_p = problem.order_p;
    m.alphas.assign(coeffs.data(), coeffs.data() + problem.order_p);
    m.betas = {coeffs(problem.order_p), coeffs(problem.order_p + 1), coeffs(problem.order_p + 2)};
    m.has_intercept = problem.has_intercept;
    m.intercept = problem.has_intercept ? coeffs(problem.order_p + 3) : 0.0;
    m.trained_through = problem.stamps.back();
    m.n_samples = problem.n_rows();
    return m;
}

} // namespace parxad
