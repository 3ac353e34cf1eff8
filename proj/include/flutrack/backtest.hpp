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
#include "flutrack/lasso.hpp"
#include "flutrack/metrics.hpp"
#include "flutrack/parallel.hpp"
#include "flutrack/sarima.hpp"

namespace flutrack::ts {

// Weekly ILI target series: national rates or raw state case counts.
struct IliSeries {
    std::string geo;
    bool count_mode = false;                 // counts (state feeds) vs rates (CDC national)
    std::vector<std::int64_t> week_starts;   // consecutive Sundays
    std::vector<double> values;

    void validate() const {
        if (week_starts.size() != values.size())
            throw config_error("ili series: dates and values differ in length");
        if (week_starts.empty()) throw config_error("ili series is empty");
        for (std::size_t i = 1; i < week_starts.size(); ++i)
            if (week_starts[i] != week_starts[i - 1] + 7)
                throw config_error("ili series for " + geo + " has a gap or duplicate at " +
                                   format_date(week_starts[i]));
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (is_missing(values[i]))
                throw config_error("ili series for " + geo + " has a missing value at " +
                                   format_date(week_starts[i]));
            if (values[i] < 0)
                throw config_error("ili series for " + geo + " has a negative value at " +
                                   format_date(week_starts[i]));
            if (count_mode && values[i] != std::floor(values[i]))
                throw config_error("ili count series for " + geo + " has a non-integer value at " +
                                   format_date(week_starts[i]));
        }
    }
};

// Weekly exogenous signal aligned to an IliSeries; gaps stay explicit as NaN.
struct ExogSignal {
    std::vector<double> values; // same length as the target series
};

// Aligns (week -> value) observations onto the target's week grid.
inline ExogSignal align_exog(const IliSeries& target, const std::map<std::int64_t, double>& by_week) {
    ExogSignal out;
    out.values.assign(target.week_starts.size(), kNaN);
    for (std::size_t i = 0; i < target.week_starts.size(); ++i) {
        const auto it = by_week.find(target.week_starts[i]);
        if (it != by_week.end()) out.values[i] = it->second;
    }
    return out;
}

// Logit-transformed volume share with the ratio clamped to [1e-6, 1-1e-6];
// weeks with a zero denominator are missing.
inline std::vector<double> logit_volume(const std::vector<double>& counts,
                                        const std::vector<double>& denominators) {
    if (counts.size() != denominators.size())
        throw std::invalid_argument("logit_volume: length mismatch");
    std::vector<double> out(counts.size(), kNaN);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (denominators[i] <= 0.0) continue;
        const double ratio = std::clamp(counts[i] / denominators[i], 1e-6, 1.0 - 1e-6);
        out[i] = logit(ratio);
    }
    return out;
}

// Fills gaps in a window slice: linear interpolation between observed
// neighbours, last-observation-carried-forward (or backward at the start) at
// the boundaries. Reports whether anything was filled.
inline std::vector<double> fill_missing(const std::vector<double>& v, bool* filled_any = nullptr) {
    std::vector<double> out = v;
    bool filled = false;
    const std::size_t n = out.size();
    std::size_t i = 0;
    while (i < n && is_missing(out[i])) ++i;
    if (i == n) throw numeric_error("exogenous window is entirely missing");
    for (std::size_t j = 0; j < i; ++j) {
        out[j] = out[i];
        filled = true;
    }
    std::size_t last_known = i;
    for (std::size_t j = i + 1; j < n; ++j) {
        if (!is_missing(out[j])) {
            if (j > last_known + 1) {
                const double lo = out[last_known], hi = out[j];
                for (std::size_t k = last_known + 1; k < j; ++k) {
                    const double t = static_cast<double>(k - last_known) / static_cast<double>(j - last_known);
                    out[k] = lo + t * (hi - lo);
                }
                filled = true;
            }
            last_known = j;
        }
    }
    for (std::size_t j = last_known + 1; j < n; ++j) {
        out[j] = out[last_known];
        filled = true;
    }
    if (filled_any) *filled_any = filled;
    return out;
}

// A1 query panel: weekly per-query counts plus the week's total query volume.
struct A1Panel {
    std::vector<std::int64_t> week_starts;
    std::vector<std::string> queries;            // distinct normalized texts, sorted
    std::vector<std::vector<double>> counts;     // [query][week]
    std::vector<double> denominators;            // [week]
};

enum class ModelFamily { SarimaHist, SarimaMrp, SarimaA1, LassoHist, LassoA1 };

inline const char* family_name(ModelFamily f) {
    switch (f) {
    case ModelFamily::SarimaHist: return "sarima_hist";
    case ModelFamily::SarimaMrp: return "sarima_mrp";
    case ModelFamily::SarimaA1: return "sarima_a1";
    case ModelFamily::LassoHist: return "lasso_hist";
    case ModelFamily::LassoA1: return "lasso_a1";
    }
    return "?";
}

inline bool parse_family(const std::string& s, ModelFamily& out) {
    if (s == "sarima_hist") out = ModelFamily::SarimaHist;
    else if (s == "sarima_mrp") out = ModelFamily::SarimaMrp;
    else if (s == "sarima_a1") out = ModelFamily::SarimaA1;
    else if (s == "lasso_hist") out = ModelFamily::LassoHist;
    else if (s == "lasso_a1") out = ModelFamily::LassoA1;
    else return false;
    return true;
}

struct BacktestConfig {
    int train_weeks = 156; // rolling three-year window
    std::vector<int> horizons{1, 2};
    SarimaGrid grid;
    int lasso_p = 52;
    int lambda_ladder_size = 12;
    double lambda_min_ratio = 1e-4;
    int sarima_restarts = 2;
    std::uint64_t seed = 1;
    unsigned jobs = 1;
    std::size_t a1_max_queries = 100; // widest A1 panel allowed into a window
    // Optional restriction of forecast origins (inclusive week-start bounds).
    std::optional<std::int64_t> origin_min, origin_max;
};

// Rolling-origin backtest of one model family on one geography. At each
// origin t the model (including order or penalty selection) sees only the
// trailing train_weeks of the target and exogenous signal, plus the exogenous
// values through t+h for the forecast itself; actuals never leak into
// fitting.
inline std::vector<eval::ForecastRow> rolling_backtest(const IliSeries& y, const ExogSignal* exog,
                                                       const A1Panel* panel, ModelFamily family,
                                                       const BacktestConfig& cfg) {
    y.validate();
    const int n = static_cast<int>(y.values.size());
    const int max_h = *std::max_element(cfg.horizons.begin(), cfg.horizons.end());
    if (n < cfg.train_weeks + max_h)
        throw numeric_error("backtest: need at least " + std::to_string(cfg.train_weeks + max_h) +
                            " weeks, have " + std::to_string(n));
    const bool needs_mrp = family == ModelFamily::SarimaMrp;
    const bool needs_panel = family == ModelFamily::SarimaA1 || family == ModelFamily::LassoA1;
    if (needs_mrp && (!exog || static_cast<int>(exog->values.size()) != n))
        throw config_error("backtest: MRP model needs an aligned exogenous signal");
    if (needs_panel) {
        if (!panel) throw config_error("backtest: A1 model needs the query panel");
        if (static_cast<int>(panel->week_starts.size()) != n ||
            panel->week_starts != y.week_starts)
            throw config_error("backtest: A1 panel weeks do not match the target series");
    }

    std::vector<int> origins;
    for (int t = cfg.train_weeks - 1; t + max_h < n; ++t) {
        const std::int64_t w = y.week_starts[static_cast<std::size_t>(t)];
        if (cfg.origin_min && w < *cfg.origin_min) continue;
        if (cfg.origin_max && w > *cfg.origin_max) continue;
        origins.push_back(t);
    }
    if (origins.empty()) throw numeric_error("backtest: no feasible forecast origins");

    std::vector<std::vector<eval::ForecastRow>> slots(origins.size());
    parallel_for(origins.size(), cfg.jobs, [&](std::size_t oi) {
        const int t = origins[oi];
        const int w0 = t - cfg.train_weeks + 1;
        const std::vector<double> y_win(y.values.begin() + w0, y.values.begin() + t + 1);
        const std::uint64_t origin_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(t));

        std::vector<double> forecasts;
        switch (family) {
        case ModelFamily::SarimaHist: {
            SarimaOptions opts;
            opts.seed = origin_seed;
            opts.restarts = cfg.sarima_restarts;
            opts.floor_at_zero = !y.count_mode;
            const SelectionResult sel = select_sarima(y_win, nullptr, cfg.grid, opts, 1);
            const SarimaFit fit = fit_sarima(y_win, nullptr, sel.best, opts);
            forecasts = forecast(fit, max_h, nullptr);
            break;
        }
        case ModelFamily::SarimaMrp: {
            std::vector<double> x_win(exog->values.begin() + w0, exog->values.begin() + t + 1);
            x_win = fill_missing(x_win);
            std::vector<double> x_future;
            double last = x_win.back();
            for (int j = 1; j <= max_h; ++j) {
                double v = exog->values[static_cast<std::size_t>(t + j)];
                if (is_missing(v)) v = last; // carry forward at the boundary
                last = v;
                x_future.push_back(v);
            }
            SarimaOptions opts;
            opts.seed = origin_seed;
            opts.restarts = cfg.sarima_restarts;
            opts.floor_at_zero = !y.count_mode;
            const SelectionResult sel = select_sarima(y_win, &x_win, cfg.grid, opts, 1);
            const SarimaFit fit = fit_sarima(y_win, &x_win, sel.best, opts);
            forecasts = forecast(fit, max_h, &x_future);
            break;
        }
        case ModelFamily::SarimaA1:
        case ModelFamily::LassoA1: {
            // Queries with volume inside the training window, widest first.
            std::vector<std::size_t> chosen;
            {
                std::vector<std::pair<double, std::size_t>> vol;
                for (std::size_t qi = 0; qi < panel->queries.size(); ++qi) {
                    double total = 0.0;
                    for (int wk = w0; wk <= t; ++wk) total += panel->counts[qi][static_cast<std::size_t>(wk)];
                    if (total > 0.0) vol.emplace_back(-total, qi);
                }
                std::sort(vol.begin(), vol.end());
                for (std::size_t i = 0; i < vol.size() && i < cfg.a1_max_queries; ++i)
                    chosen.push_back(vol[i].second);
                std::sort(chosen.begin(), chosen.end());
            }
            if (chosen.empty())
                throw numeric_error("backtest: no A1 queries with volume in the training window");

            // Per-query logit series over the whole span we may touch
            // (window plus forecast horizons), gap-filled within the window.
            std::vector<std::vector<double>> series(chosen.size());
            for (std::size_t ci = 0; ci < chosen.size(); ++ci) {
                std::vector<double> cnt, den;
                for (int wk = w0; wk <= t + max_h; ++wk) {
                    cnt.push_back(panel->counts[chosen[ci]][static_cast<std::size_t>(wk)]);
                    den.push_back(panel->denominators[static_cast<std::size_t>(wk)]);
                }
                std::vector<double> lv = logit_volume(cnt, den);
                series[ci] = fill_missing(lv);
            }
            const std::size_t win_len = static_cast<std::size_t>(cfg.train_weeks);
            if (family == ModelFamily::SarimaA1) {
                std::vector<double> mean_win(win_len, 0.0), mean_future(static_cast<std::size_t>(max_h), 0.0);
                for (std::size_t ci = 0; ci < chosen.size(); ++ci) {
                    for (std::size_t i = 0; i < win_len; ++i) mean_win[i] += series[ci][i];
                    for (int j = 0; j < max_h; ++j)
                        mean_future[static_cast<std::size_t>(j)] += series[ci][win_len + static_cast<std::size_t>(j)];
                }
                const double inv = 1.0 / static_cast<double>(chosen.size());
                for (double& v : mean_win) v *= inv;
                for (double& v : mean_future) v *= inv;
                SarimaOptions opts;
                opts.seed = origin_seed;
                opts.restarts = cfg.sarima_restarts;
                opts.floor_at_zero = !y.count_mode;
                const SelectionResult sel = select_sarima(y_win, &mean_win, cfg.grid, opts, 1);
                const SarimaFit fit = fit_sarima(y_win, &mean_win, sel.best, opts);
                forecasts = forecast(fit, max_h, &mean_future);
            } else {
                std::vector<std::vector<double>> exog_cols(chosen.size());
                for (std::size_t ci = 0; ci < chosen.size(); ++ci)
                    exog_cols[ci].assign(series[ci].begin(), series[ci].begin() + static_cast<std::ptrdiff_t>(win_len));
                const double lmax = lasso_lambda_max(y_win, exog_cols, cfg.lasso_p);
                const std::vector<double> ladder =
                    lambda_ladder(lmax, cfg.lambda_ladder_size, cfg.lambda_min_ratio);
                const double lambda = select_lambda(y_win, exog_cols, cfg.lasso_p, ladder);
                const LassoFit fit = fit_lasso_ar(y_win, exog_cols, cfg.lasso_p, lambda);
                std::vector<std::vector<double>> future_rows;
                for (int j = 0; j < max_h; ++j) {
                    std::vector<double> row;
                    for (std::size_t ci = 0; ci < chosen.size(); ++ci)
                        row.push_back(series[ci][win_len + static_cast<std::size_t>(j)]);
                    future_rows.push_back(std::move(row));
                }
                forecasts = forecast_lasso(fit, y_win, future_rows, max_h, !y.count_mode);
            }
            break;
        }
        case ModelFamily::LassoHist: {
            const std::vector<std::vector<double>> no_exog;
            const double lmax = lasso_lambda_max(y_win, no_exog, cfg.lasso_p);
            const std::vector<double> ladder =
                lambda_ladder(lmax, cfg.lambda_ladder_size, cfg.lambda_min_ratio);
            const double lambda = select_lambda(y_win, no_exog, cfg.lasso_p, ladder);
            const LassoFit fit = fit_lasso_ar(y_win, no_exog, cfg.lasso_p, lambda);
            forecasts = forecast_lasso(fit, y_win, {}, max_h, !y.count_mode);
            break;
        }
        }

        for (int h : cfg.horizons) {
            eval::ForecastRow row;
            row.origin_week = y.week_starts[static_cast<std::size_t>(t)];
            row.horizon = h;
            row.model = family_name(family);
            row.geo = y.geo;
            row.forecast = forecasts[static_cast<std::size_t>(h - 1)];
            row.actual = y.values[static_cast<std::size_t>(t + h)];
            slots[oi].push_back(row);
        }
    });

    std::vector<eval::ForecastRow> out;
    for (const auto& slot : slots)
        for (const auto& row : slot) out.push_back(row);
    return out;
}

} // namespace flutrack::ts
