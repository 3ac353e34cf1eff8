#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "flutrack/common.hpp"
#include "flutrack/dates.hpp"

namespace flutrack::eval {

inline void check_lengths(std::size_t a, std::size_t b) {
    if (a != b) throw std::invalid_argument("metric inputs have different lengths");
    if (a == 0) throw std::invalid_argument("metric inputs are empty");
}

inline double rmse(const std::vector<double>& forecast, const std::vector<double>& actual) {
    check_lengths(forecast.size(), actual.size());
    double s = 0.0;
    for (std::size_t i = 0; i < forecast.size(); ++i) s += square(forecast[i] - actual[i]);
    return std::sqrt(s / static_cast<double>(forecast.size()));
}

inline double mae(const std::vector<double>& forecast, const std::vector<double>& actual) {
    check_lengths(forecast.size(), actual.size());
    double s = 0.0;
    for (std::size_t i = 0; i < forecast.size(); ++i) s += std::abs(forecast[i] - actual[i]);
    return s / static_cast<double>(forecast.size());
}

// Mean absolute percent error, in percent. Pairs with a zero actual are
// excluded and counted (state count series have zero weeks; rates do not).
inline double mape(const std::vector<double>& forecast, const std::vector<double>& actual,
                   int* excluded = nullptr) {
    check_lengths(forecast.size(), actual.size());
    double s = 0.0;
    int used = 0, skipped = 0;
    for (std::size_t i = 0; i < forecast.size(); ++i) {
        if (actual[i] == 0.0) {
            ++skipped;
            continue;
        }
        s += std::abs(forecast[i] - actual[i]) / std::abs(actual[i]);
        ++used;
    }
    if (excluded) *excluded = skipped;
    if (used == 0) throw numeric_error("mape: every actual value is zero");
    return 100.0 * s / static_cast<double>(used);
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    check_lengths(a.size(), b.size());
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += square(a[i] - ma);
        sbb += square(b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0)
        throw numeric_error("pearson: zero variance on one side");
    return sab / std::sqrt(saa * sbb);
}

struct ForecastRow {
    std::int64_t origin_week = 0; // week-start day of the forecast origin
    int horizon = 0;
    std::string model;
    std::string geo;
    double forecast = kNaN;
    double actual = kNaN;
};

struct MetricRow {
    std::string model, geo;
    int horizon = 0;
    double rmse = kNaN, mape = kNaN, mae = kNaN;
    std::optional<double> pearson; // absent when variance degenerates
    int n = 0;
    int mape_excluded = 0;
    bool winner = false; // lowest RMSE among the families for this geo/horizon
    bool tie = false;
};

struct CompareOptions {
    // Correlation is reported over in-season forecasts (MMWR weeks
    // season_start..season_end, wrapping the new year), matching the paper's
    // per-season framing; set filter_pearson_to_season = false to use all.
    int season_start_week = 40;
    int season_end_week = 20;
    bool filter_pearson_to_season = true;
};

inline bool in_season(std::int64_t week_start, const CompareOptions& opt) {
    const int w = mmwr_week(week_start).week;
    if (opt.season_start_week <= opt.season_end_week)
        return w >= opt.season_start_week && w <= opt.season_end_week;
    return w >= opt.season_start_week || w <= opt.season_end_week;
}

// Per (model, geo, horizon) accuracy over the origins every family shares
// (inner join), plus lowest-RMSE winner flags.
inline std::vector<MetricRow> compare_report(const std::vector<ForecastRow>& rows,
                                             const CompareOptions& opt = {}) {
    if (rows.empty()) throw std::invalid_argument("compare_report: no forecasts");
    std::set<std::string> models;
    for (const auto& r : rows) models.insert(r.model);

    // Shared origins per (geo, horizon).
    std::map<std::pair<std::string, int>, std::map<std::int64_t, std::set<std::string>>> seen;
    for (const auto& r : rows) seen[{r.geo, r.horizon}][r.origin_week].insert(r.model);
    std::map<std::pair<std::string, int>, std::set<std::int64_t>> shared;
    for (const auto& [key, origins] : seen)
        for (const auto& [week, present] : origins)
            if (present.size() == models.size()) shared[key].insert(week);

    std::map<std::tuple<std::string, std::string, int>, std::vector<const ForecastRow*>> groups;
    for (const auto& r : rows) {
        if (!shared[{r.geo, r.horizon}].count(r.origin_week)) continue;
        groups[{r.model, r.geo, r.horizon}].push_back(&r);
    }
    if (groups.empty()) throw numeric_error("compare_report: no shared origins across model families");

    std::vector<MetricRow> out;
    for (const auto& [key, group] : groups) {
        MetricRow m;
        m.model = std::get<0>(key);
        m.geo = std::get<1>(key);
        m.horizon = std::get<2>(key);
        std::vector<const ForecastRow*> sorted = group;
        std::sort(sorted.begin(), sorted.end(),
                  [](const ForecastRow* a, const ForecastRow* b) { return a->origin_week < b->origin_week; });
        std::vector<double> f, a, fs, as;
        for (const ForecastRow* r : sorted) {
            f.push_back(r->forecast);
            a.push_back(r->actual);
            const std::int64_t target_week = r->origin_week + 7 * r->horizon;
            if (!opt.filter_pearson_to_season || in_season(target_week, opt)) {
                fs.push_back(r->forecast);
                as.push_back(r->actual);
            }
        }
        m.n = static_cast<int>(f.size());
        m.rmse = rmse(f, a);
        m.mae = mae(f, a);
        m.mape = mape(f, a, &m.mape_excluded);
        try {
            if (fs.size() >= 2) m.pearson = pearson(fs, as);
        } catch (const numeric_error&) {
            // constant forecasts or actuals: correlation undefined
        }
        out.push_back(std::move(m));
    }

    // Winner flags per (geo, horizon).
    std::map<std::pair<std::string, int>, double> best_rmse;
    for (const auto& m : out) {
        const auto key = std::make_pair(m.geo, m.horizon);
        const auto it = best_rmse.find(key);
        if (it == best_rmse.end() || m.rmse < it->second) best_rmse[key] = m.rmse;
    }
    std::map<std::pair<std::string, int>, int> winner_count;
    for (auto& m : out)
        if (m.rmse == best_rmse[{m.geo, m.horizon}]) {
            m.winner = true;
            ++winner_count[{m.geo, m.horizon}];
        }
    for (auto& m : out)
        if (m.winner && winner_count[{m.geo, m.horizon}] > 1) m.tie = true;
    return out;
}

} // namespace flutrack::eval
