#pragma once

// Test-only reference implementations, kept independent of the library code
// paths they check.

#include "parxad/detector.hpp"
#include "parxad/series.hpp"
#include "parxad/time.hpp"

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace oracle {

/// Dense least squares via explicitly formed normal equations and Gaussian
/// elimination with partial pivoting. No Eigen.
inline std::vector<double> solve_normal_equations(const std::vector<std::vector<double>>& X,
                                                  const std::vector<double>& y) {
    const std::size_t n = X.size();
    const std::size_t k = X.front().size();
    // G = X^T X, b = X^T y
    std::vector<std::vector<double>> G(k, std::vector<double>(k + 1, 0.0));
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
            double s = 0.0;
            for (std::size_t r = 0; r < n; ++r) s += X[r][a] * X[r][b];
            G[a][b] = s;
        }
        double s = 0.0;
        for (std::size_t r = 0; r < n; ++r) s += X[r][a] * y[r];
        G[a][k] = s;
    }
    // Gaussian elimination with partial pivoting on the augmented system.
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < k; ++r)
            if (std::abs(G[r][col]) > std::abs(G[pivot][col])) pivot = r;
        std::swap(G[col], G[pivot]);
        if (std::abs(G[col][col]) < 1e-30) throw std::runtime_error("oracle: singular system");
        for (std::size_t r = 0; r < k; ++r) {
            if (r == col) continue;
            const double f = G[r][col] / G[col][col];
            for (std::size_t c = col; c <= k; ++c) G[r][c] -= f * G[col][c];
        }
    }
    std::vector<double> w(k);
    for (std::size_t i = 0; i < k; ++i) w[i] = G[i][k] / G[i][i];
    return w;
}

/// Simpson quadrature of the Gaussian density over [lo, hi].
inline double integrate_density(double mu, double sigma, double lo, double hi, int steps = 20000) {
    auto f = [&](double x) {
        const double z = (x - mu) / sigma;
        return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::acos(-1.0)));
    };
    if (steps % 2) ++steps;
    const double h = (hi - lo) / steps;
    double s = f(lo) + f(hi);
    for (int i = 1; i < steps; ++i) s += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

/// Replays an ingestion sequence with the dumbest possible data structure:
/// per season, a map day -> kwh plus that season's max day. Mirrors the
/// window contract: last write wins, readings at day <= max - p are dropped,
/// eviction keeps only days > max - p.
class WindowReplay {
public:
    explicit WindowReplay(int order_p) : p_(order_p) {}

    void ingest(parxad::HourStamp stamp, double kwh) {
        auto& cell = seasons_[stamp.season()];
        const parxad::DayIndex day = stamp.day();
        if (cell.has_max && day <= cell.max_day - p_) return; // too old
        cell.by_day[day] = kwh;
        if (!cell.has_max || day > cell.max_day) {
            cell.max_day = day;
            cell.has_max = true;
        }
        for (auto it = cell.by_day.begin(); it != cell.by_day.end();)
            it = it->first <= cell.max_day - p_ ? cell.by_day.erase(it) : std::next(it);
    }

    std::optional<std::vector<double>> lags(parxad::DayIndex day, parxad::Season season) const {
        auto found = seasons_.find(season);
        if (found == seasons_.end()) return std::nullopt;
        std::vector<double> out;
        for (int i = 1; i <= p_; ++i) {
            auto it = found->second.by_day.find(day - i);
            if (it == found->second.by_day.end()) return std::nullopt;
            out.push_back(it->second);
        }
        return out;
    }

private:
    struct Cell {
        std::map<parxad::DayIndex, double> by_day;
        parxad::DayIndex max_day = 0;
        bool has_max = false;
    };
    int p_;
    std::map<parxad::Season, Cell> seasons_;
};

/// Brute-force confusion counts by exhaustive pairing.
struct Confusion {
    long long tp = 0, fp = 0, fn = 0;
};

inline Confusion pair_exhaustively(const std::vector<std::pair<std::string, parxad::HourStamp>>& labels,
                                   const std::vector<std::pair<std::string, parxad::HourStamp>>& flags) {
    Confusion c;
    for (const auto& f : flags) {
        bool matched = false;
        for (const auto& l : labels)
            if (l.first == f.first && l.second == f.second) {
                matched = true;
                break;
            }
        matched ? ++c.tp : ++c.fp;
    }
    for (const auto& l : labels) {
        bool matched = false;
        for (const auto& f : flags)
            if (l.first == f.first && l.second == f.second) {
                matched = true;
                break;
            }
        if (!matched) ++c.fn;
    }
    return c;
}

} // namespace oracle
