#include "parxad/parx.hpp"

#include "parxad/rng.hpp"
#include "support/oracles.hpp"

#include "doctest.h"

#include <cmath>

using namespace parxad;

TEST_CASE("exogenous features follow the piecewise definition") {
    auto f = exogenous_features(25.0);
    CHECK(f.xt1 == 5.0);
    CHECK(f.xt2 == 0.0);
    CHECK(f.xt3 == 0.0);

    f = exogenous_features(18.0); // dead zone
    CHECK(f.xt1 == 0.0);
    CHECK(f.xt2 == 0.0);
    CHECK(f.xt3 == 0.0);

    f = exogenous_features(2.0);
    CHECK(f.xt1 == 0.0);
    CHECK(f.xt2 == 14.0);
    CHECK(f.xt3 == 3.0);

    // Strict inequalities at every breakpoint.
    f = exogenous_features(20.0);
    CHECK((f.xt1 == 0.0 && f.xt2 == 0.0 && f.xt3 == 0.0));
    f = exogenous_features(16.0);
    CHECK(f.xt2 == 0.0);
    f = exogenous_features(5.0);
    CHECK(f.xt3 == 0.0);
    CHECK(f.xt2 == 11.0);

    CHECK_THROWS_AS(exogenous_features(std::nan("")), InvalidInputError);
}

TEST_CASE("exogenous features: mutual exclusion and continuity") {
    for (int i = 0; i <= 1500; ++i) {
        const double t = -30.0 + 0.05 * i;
        const auto f = exogenous_features(t);
        CHECK(f.xt1 >= 0.0);
        CHECK(f.xt2 >= 0.0);
        CHECK(f.xt3 >= 0.0);
        CHECK(f.xt1 * f.xt2 == 0.0);
        if (f.xt3 > 0.0) CHECK(f.xt2 > 0.0);
    }
    for (double brk : {20.0, 16.0, 5.0}) {
        const auto lo = exogenous_features(brk - 1e-9);
        const auto hi = exogenous_features(brk + 1e-9);
        CHECK(std::abs(lo.xt1 - hi.xt1) < 1e-8);
        CHECK(std::abs(lo.xt2 - hi.xt2) < 1e-8);
        CHECK(std::abs(lo.xt3 - hi.xt3) < 1e-8);
    }
}

namespace {

ParxModel model_with(std::vector<double> alphas, std::array<double, 3> betas) {
    ParxModel m;
    m.meter_id = "m";
    m.order_p = static_cast<int>(alphas.size());
    m.alphas = std::move(alphas);
    m.betas = betas;
    return m;
}

} // namespace

TEST_CASE("predict matches the regression equation") {
    const auto identity = model_with({1.0, 0.0, 0.0}, {0.0, 0.0, 0.0});
    const std::vector<double> lags{2.5, 9.0, 9.0};
    CHECK(predict(identity, lags, 18.0) == 2.5);

    const auto cooling = model_with({0.0, 0.0, 0.0}, {1.0, 0.0, 0.0});
    CHECK(predict(cooling, lags, 25.0) == 5.0);

    const std::vector<double> two_lags{1.0, 2.0};
    CHECK_THROWS_AS(predict(identity, two_lags, 18.0), InvalidInputError);
}

TEST_CASE("predict equals an independent dot product on random inputs") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const int p = 1 + static_cast<int>(rng.below(5));
        std::vector<double> alphas, lags;
        for (int i = 0; i < p; ++i) {
            alphas.push_back(rng.uniform(-1.0, 1.0));
            lags.push_back(rng.uniform(0.0, 10.0));
        }
        std::array<double, 3> betas{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                                    rng.uniform(-1.0, 1.0)};
        const double t = rng.uniform(-25.0, 40.0);
        const auto m = model_with(alphas, betas);

        double want = 0.0;
        for (int i = 0; i < p; ++i) want += alphas[size_t(i)] * lags[size_t(i)];
        const double xt1 = t > 20.0 ? t - 20.0 : 0.0;
        const double xt2 = t < 16.0 ? 16.0 - t : 0.0;
        const double xt3 = t < 5.0 ? 5.0 - t : 0.0;
        want += betas[0] * xt1 + betas[1] * xt2 + betas[2] * xt3;

        CHECK(predict(m, lags, t) == want); // same operations, exact match
    }
}

TEST_CASE("predict is linear in the lags when betas are zero") {
    Rng rng(12);
    const auto m = model_with({0.4, 0.3, 0.2}, {0.0, 0.0, 0.0});
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> l1, l2, mix;
        const double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-2.0, 2.0);
        for (int i = 0; i < 3; ++i) {
            l1.push_back(rng.uniform(0.0, 5.0));
            l2.push_back(rng.uniform(0.0, 5.0));
            mix.push_back(a * l1.back() + b * l2.back());
        }
        const double lhs = predict(m, mix, 18.0);
        const double rhs = a * predict(m, l1, 18.0) + b * predict(m, l2, 18.0);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

namespace {

/// n complete days of one season, kwh = value(day), temps = celsius(day).
struct CellData {
    ConsumptionSeries series{"m"};
    TemperatureSeries temps;
};

template <class FY, class FT>
CellData cell_data(int days, Season season, FY value, FT celsius,
                   DayIndex start = days_from_civil(2024, 1, 1)) {
    CellData out;
    for (int d = 0; d < days; ++d) {
        out.series.append(HourStamp::from_day_season(start + d, season), value(d));
        out.temps.append(HourStamp::from_day_season(start + d, season), celsius(d));
    }
    return out;
}

} // namespace

TEST_CASE("build_problem counts rows and lays out lags most-recent-first") {
    auto data = cell_data(5, 9, [](int d) { return 1.0 + d; }, [](int) { return 18.0; });
    const auto problem = build_problem(data.series, data.temps, 9, DayType::AllDays, 3);
    REQUIRE(problem.n_rows() == 2); // first p days lack lags
    CHECK(problem.design.cols() == 6);
    // Day 4 (value 4): lags are days 3,2,1 -> 3,2,1 most recent first.
    CHECK(problem.target(0) == 4.0);
    CHECK(problem.design(0, 0) == 3.0);
    CHECK(problem.design(0, 1) == 2.0);
    CHECK(problem.design(0, 2) == 1.0);
    CHECK(problem.design(0, 3) == 0.0); // 18 C: all features zero
    CHECK(problem.target(1) == 5.0);
    CHECK(problem.stamps.size() == 2);

    const auto one = build_problem(data.series, data.temps, 9, DayType::AllDays, 1);
    CHECK(one.n_rows() == 4); // p=1: days 2..5
}

TEST_CASE("build_problem excludes rows whose lag window hits a gap") {
    // 8 days, day index 2 missing: only days 6 and 7 have complete lag windows.
    CellData data;
    const DayIndex start = days_from_civil(2024, 1, 1);
    for (int d = 0; d < 8; ++d) {
        if (d != 2) data.series.append(HourStamp::from_day_season(start + d, 9), 1.0 + d);
        data.temps.append(HourStamp::from_day_season(start + d, 9), 10.0);
    }
    const auto problem = build_problem(data.series, data.temps, 9, DayType::AllDays, 3);
    REQUIRE(problem.n_rows() == 2);
    CHECK(problem.stamps[0].day() == start + 6);
    CHECK(problem.stamps[1].day() == start + 7);
}

TEST_CASE("build_problem drops rows without a temperature") {
    auto data = cell_data(10, 9, [](int d) { return 1.0 + d; }, [](int) { return 18.0; });
    CellData sparse;
    sparse.series = data.series;
    for (const auto& [stamp, celsius] : data.temps.observations())
        if (stamp.day() != days_from_civil(2024, 1, 1) + 5) sparse.temps.append(stamp, celsius);
    const auto problem = build_problem(data.series, sparse.temps, 9, DayType::AllDays, 3);
    CHECK(problem.n_rows() == 6); // 7 candidate days minus the one without weather
}

TEST_CASE("build_problem with no usable rows reports insufficient data") {
    auto data = cell_data(3, 9, [](int) { return 1.0; }, [](int) { return 18.0; });
    CHECK_THROWS_AS(build_problem(data.series, data.temps, 9, DayType::AllDays, 3),
                    InsufficientDataError);
}

TEST_CASE("fit_ols recovers known coefficients and matches the oracle") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 40, k = 6;
        std::vector<std::vector<double>> rows(n, std::vector<double>(k));
        std::vector<double> w_true(k), y(n);
        for (int c = 0; c < k; ++c) w_true[size_t(c)] = rng.uniform(-2.0, 2.0);
        RegressionProblem problem;
        problem.order_p = 3;
        problem.design.resize(n, k);
        problem.target.resize(n);
        for (int r = 0; r < n; ++r) {
            double t = 0.0;
            for (int c = 0; c < k; ++c) {
                rows[size_t(r)][size_t(c)] = rng.uniform(-1.0, 3.0);
                problem.design(r, c) = rows[size_t(r)][size_t(c)];
                t += rows[size_t(r)][size_t(c)] * w_true[size_t(c)];
            }
            y[size_t(r)] = t;
            problem.target(r) = t;
        }
        problem.stamps.assign(size_t(n), HourStamp{0});

        const auto w = fit_ols(problem);
        const auto w_oracle = oracle::solve_normal_equations(rows, y);
        for (int c = 0; c < k; ++c) {
            CHECK(std::abs(w(c) - w_true[size_t(c)]) < 1e-8);
            CHECK(std::abs(w(c) - w_oracle[size_t(c)]) < 1e-7);
        }
    }
}

TEST_CASE("fit_ols: zero target gives the zero (minimum-norm) solution") {
    RegressionProblem problem;
    problem.order_p = 1;
    problem.design = Eigen::MatrixXd::Random(10, 4);
    problem.target = Eigen::VectorXd::Zero(10);
    problem.stamps.assign(10, HourStamp{0});
    const auto w = fit_ols(problem);
    CHECK(w.norm() == 0.0);
}

TEST_CASE("fit_ols: duplicated column still reproduces a consistent target") {
    Rng rng(23);
    RegressionProblem problem;
    problem.order_p = 1;
    problem.design.resize(12, 4);
    problem.target.resize(12);
    for (int r = 0; r < 12; ++r) {
        const double a = rng.uniform(0.0, 2.0), b = rng.uniform(0.0, 2.0),
                     c = rng.uniform(0.0, 2.0);
        problem.design(r, 0) = a;
        problem.design(r, 1) = b;
        problem.design(r, 2) = b; // rank deficient
        problem.design(r, 3) = c;
        problem.target(r) = 1.0 * a + 2.0 * b + 3.0 * b + 0.5 * c;
    }
    problem.stamps.assign(12, HourStamp{0});
    const auto w = fit_ols(problem);
    const Eigen::VectorXd fitted = problem.design * w;
    CHECK((fitted - problem.target).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("fit_ols residual is locally optimal") {
    Rng rng(29);
    RegressionProblem problem;
    problem.order_p = 2;
    problem.design.resize(30, 5);
    problem.target.resize(30);
    for (int r = 0; r < 30; ++r) {
        for (int c = 0; c < 5; ++c) problem.design(r, c) = rng.uniform(-1.0, 1.0);
        problem.target(r) = rng.uniform(-1.0, 1.0); // noisy: nonzero residual
    }
    problem.stamps.assign(30, HourStamp{0});
    const auto w = fit_ols(problem);
    const double best = (problem.design * w - problem.target).norm();
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd delta(5);
        for (int c = 0; c < 5; ++c) delta(c) = rng.uniform(-0.1, 0.1);
        const double other = (problem.design * (w + delta) - problem.target).norm();
        CHECK(best <= other + 1e-12);
    }
}

TEST_CASE("fit_ols refuses fewer rows than columns") {
    RegressionProblem problem;
    problem.order_p = 3;
    problem.design = Eigen::MatrixXd::Random(4, 6);
    problem.target = Eigen::VectorXd::Random(4);
    problem.stamps.assign(4, HourStamp{0});
    CHECK_THROWS_AS(fit_ols(problem), InsufficientDataError);
}

TEST_CASE("noiseless PARX data refits to the generating coefficients") {
    // Generate one season directly from the regression equation and refit.
    Rng rng(31);
    const int p = 3, days = 60;
    std::vector<double> alphas{0.45, 0.25, 0.15};
    std::array<double, 3> betas{0.4, 0.25, 0.3};

    CellData data;
    const DayIndex start = days_from_civil(2024, 1, 1);
    std::vector<double> history{2.0, 2.2, 1.8}; // most recent first
    for (int d = 0; d < days; ++d) {
        const double celsius = 10.0 - 14.0 * std::cos(2.0 * 3.14159265358979 * d / 60.0) +
                               rng.uniform(-1.0, 1.0);
        double y;
        if (d < p) {
            y = history[size_t(p - 1 - d)];
        } else {
            const auto xt = exogenous_features(celsius);
            y = alphas[0] * data.series.readings()[size_t(d - 1)].second +
                alphas[1] * data.series.readings()[size_t(d - 2)].second +
                alphas[2] * data.series.readings()[size_t(d - 3)].second + betas[0] * xt.xt1 +
                betas[1] * xt.xt2 + betas[2] * xt.xt3;
        }
        data.series.append(HourStamp::from_day_season(start + d, 7), y);
        data.temps.append(HourStamp::from_day_season(start + d, 7), celsius);
    }

    const auto problem = build_problem(data.series, data.temps, 7, DayType::AllDays, p);
    const auto w = fit_ols(problem);
    for (int i = 0; i < p; ++i)
        CHECK(w(i) == doctest::Approx(alphas[size_t(i)]).epsilon(1e-6));
    for (int i = 0; i < 3; ++i)
        CHECK(w(p + i) == doctest::Approx(betas[size_t(i)]).epsilon(1e-6));
}
