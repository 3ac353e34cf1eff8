#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "flutrack/common.hpp"

namespace flutrack::ts {

// L1-penalized autoregression: y(t) on its own p lags (p = 52 to cover the
// seasonal cycle) plus optional contemporaneous exogenous columns. Solved by
// cyclic coordinate descent on the standardized design; the objective is
//   (1/2n) * sum (y - b0 - X beta)^2 + lambda * sum |beta_j|
// with the intercept unpenalized. Coefficients are reported on the original
// scale; entries outside the active set are exactly zero.

struct LassoFit {
    double intercept = 0.0;
    std::vector<double> lag_coefs;  // theta_1..theta_p, original scale
    std::vector<double> exog_coefs; // phi_1..phi_m, original scale
    double lambda = 0.0;
    std::vector<int> active; // indices into the standardized design (lags then exog)
    int p = 0;
    int iterations = 0;
};

namespace detail {

struct LassoDesign {
    std::vector<std::vector<double>> cols; // standardized columns
    std::vector<double> col_mean, col_sd;
    std::vector<double> y;       // centered targets
    double y_mean = 0.0;
    std::size_t n_rows = 0;
};

// Rows t = p .. n-1 of the autoregression, restricted to targets < limit.
inline LassoDesign build_design(const std::vector<double>& y,
                                const std::vector<std::vector<double>>& exog, int p,
                                std::size_t limit) {
    const std::size_t n = std::min(limit, y.size());
    if (n <= static_cast<std::size_t>(p))
        throw numeric_error("lasso: series length must exceed the lag order");
    for (const auto& col : exog)
        if (col.size() < n) throw std::invalid_argument("lasso: exogenous column too short");
    LassoDesign d;
    d.n_rows = n - static_cast<std::size_t>(p);
    const std::size_t n_cols = static_cast<std::size_t>(p) + exog.size();
    d.cols.assign(n_cols, std::vector<double>(d.n_rows));
    d.y.resize(d.n_rows);
    for (std::size_t r = 0; r < d.n_rows; ++r) {
        const std::size_t t = r + static_cast<std::size_t>(p);
        for (int lag = 1; lag <= p; ++lag) d.cols[static_cast<std::size_t>(lag - 1)][r] = y[t - static_cast<std::size_t>(lag)];
        for (std::size_t j = 0; j < exog.size(); ++j) d.cols[static_cast<std::size_t>(p) + j][r] = exog[j][t];
        d.y[r] = y[t];
    }
    d.col_mean.resize(n_cols);
    d.col_sd.resize(n_cols);
    for (std::size_t j = 0; j < n_cols; ++j) {
        double mean = 0.0;
        for (double v : d.cols[j]) mean += v;
        mean /= static_cast<double>(d.n_rows);
        double var = 0.0;
        for (double v : d.cols[j]) var += square(v - mean);
        var /= static_cast<double>(d.n_rows);
        d.col_mean[j] = mean;
        d.col_sd[j] = std::sqrt(var);
        for (double& v : d.cols[j]) v = d.col_sd[j] > 1e-12 ? (v - mean) / d.col_sd[j] : 0.0;
    }
    double ym = 0.0;
    for (double v : d.y) ym += v;
    ym /= static_cast<double>(d.n_rows);
    d.y_mean = ym;
    for (double& v : d.y) v -= ym;
    return d;
}

inline double soft_threshold(double z, double g) {
    if (z > g) return z - g;
    if (z < -g) return z + g;
    return 0.0;
}

struct CdResult {
    std::vector<double> beta; // standardized scale
    int iterations = 0;
};

inline CdResult coordinate_descent(const LassoDesign& d, double lambda,
                                   std::vector<double> warm = {}, int max_iter = 100000) {
    const std::size_t n_cols = d.cols.size();
    const double inv_n = 1.0 / static_cast<double>(d.n_rows);
    std::vector<double> beta = warm.size() == n_cols ? std::move(warm)
                                                     : std::vector<double>(n_cols, 0.0);
    std::vector<double> resid = d.y;
    for (std::size_t j = 0; j < n_cols; ++j) {
        if (beta[j] == 0.0) continue;
        for (std::size_t r = 0; r < d.n_rows; ++r) resid[r] -= d.cols[j][r] * beta[j];
    }
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        double max_change = 0.0;
        for (std::size_t j = 0; j < n_cols; ++j) {
            if (d.col_sd[j] <= 1e-12) continue; // constant column carries nothing
            double rho = 0.0;
            for (std::size_t r = 0; r < d.n_rows; ++r) rho += d.cols[j][r] * resid[r];
            rho = rho * inv_n + beta[j]; // columns have unit variance
            const double updated = soft_threshold(rho, lambda);
            const double delta = updated - beta[j];
            if (delta != 0.0) {
                for (std::size_t r = 0; r < d.n_rows; ++r) resid[r] -= d.cols[j][r] * delta;
                beta[j] = updated;
                max_change = std::max(max_change, std::abs(delta));
            }
        }
        if (max_change < 1e-9) { ++iter; break; }
    }
    return CdResult{std::move(beta), iter};
}

} // namespace detail

// Smallest penalty that zeroes every coefficient at the null model.
inline double lasso_lambda_max(const std::vector<double>& y,
                               const std::vector<std::vector<double>>& exog, int p) {
    const detail::LassoDesign d = detail::build_design(y, exog, p, y.size());
    double lmax = 0.0;
    for (std::size_t j = 0; j < d.cols.size(); ++j) {
        double g = 0.0;
        for (std::size_t r = 0; r < d.n_rows; ++r) g += d.cols[j][r] * d.y[r];
        lmax = std::max(lmax, std::abs(g) / static_cast<double>(d.n_rows));
    }
    return lmax;
}

inline LassoFit fit_lasso_ar(const std::vector<double>& y,
                             const std::vector<std::vector<double>>& exog, int p, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("fit_lasso_ar: lambda must be >= 0");
    if (p < 1) throw std::invalid_argument("fit_lasso_ar: lag order must be >= 1");
    for (double v : y)
        if (is_missing(v)) throw numeric_error("fit_lasso_ar: series contains missing values");
    const detail::LassoDesign d = detail::build_design(y, exog, p, y.size());
    const detail::CdResult cd = detail::coordinate_descent(d, lambda);

    LassoFit fit;
    fit.p = p;
    fit.lambda = lambda;
    fit.iterations = cd.iterations;
    fit.lag_coefs.assign(static_cast<std::size_t>(p), 0.0);
    fit.exog_coefs.assign(exog.size(), 0.0);
    double adj = 0.0;
    for (std::size_t j = 0; j < cd.beta.size(); ++j) {
        if (cd.beta[j] == 0.0) continue;
        fit.active.push_back(static_cast<int>(j));
        const double orig = cd.beta[j] / d.col_sd[j];
        if (j < static_cast<std::size_t>(p)) fit.lag_coefs[j] = orig;
        else fit.exog_coefs[j - static_cast<std::size_t>(p)] = orig;
        adj += orig * d.col_mean[j];
    }
    fit.intercept = d.y_mean - adj;
    return fit;
}

// Max KKT violation of a fit, on the standardized scale the solver uses:
// inactive coordinates need |gradient| <= lambda, active ones gradient =
// lambda * sign(beta).
inline double lasso_kkt_violation(const std::vector<double>& y,
                                  const std::vector<std::vector<double>>& exog,
                                  const LassoFit& fit) {
    const detail::LassoDesign d = detail::build_design(y, exog, fit.p, y.size());
    std::vector<double> beta_std(d.cols.size(), 0.0);
    for (std::size_t j = 0; j < d.cols.size(); ++j) {
        const double orig = j < static_cast<std::size_t>(fit.p)
                                ? fit.lag_coefs[j]
                                : fit.exog_coefs[j - static_cast<std::size_t>(fit.p)];
        beta_std[j] = orig * d.col_sd[j];
    }
    std::vector<double> resid = d.y;
    for (std::size_t j = 0; j < d.cols.size(); ++j) {
        if (beta_std[j] == 0.0) continue;
        for (std::size_t r = 0; r < d.n_rows; ++r) resid[r] -= d.cols[j][r] * beta_std[j];
    }
    double worst = 0.0;
    for (std::size_t j = 0; j < d.cols.size(); ++j) {
        if (d.col_sd[j] <= 1e-12) continue;
        double g = 0.0;
        for (std::size_t r = 0; r < d.n_rows; ++r) g += d.cols[j][r] * resid[r];
        g /= static_cast<double>(d.n_rows);
        if (beta_std[j] == 0.0)
            worst = std::max(worst, std::abs(g) - fit.lambda);
        else
            worst = std::max(worst, std::abs(g - fit.lambda * (beta_std[j] > 0 ? 1.0 : -1.0)));
    }
    return worst;
}

// Log-spaced penalty ladder from lambda_max down to lambda_max * min_ratio.
inline std::vector<double> lambda_ladder(double lambda_max, int size = 12,
                                         double min_ratio = 1e-4) {
    if (size < 1) throw std::invalid_argument("lambda_ladder: size must be >= 1");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(size));
    if (size == 1 || lambda_max <= 0.0) {
        out.assign(static_cast<std::size_t>(size), std::max(lambda_max, 0.0));
        return out;
    }
    const double lo = std::log(lambda_max * min_ratio), hi = std::log(lambda_max);
    for (int i = 0; i < size; ++i)
        out.push_back(std::exp(hi + (lo - hi) * static_cast<double>(i) / static_cast<double>(size - 1)));
    return out;
}

// Rolling-origin validation on the final fifth of the training window: for
// each held-out week, refit on everything before it and score the one-step
// forecast. Ties prefer the larger (more shrinkage) penalty.
inline double select_lambda(const std::vector<double>& y,
                            const std::vector<std::vector<double>>& exog, int p,
                            const std::vector<double>& ladder) {
    if (ladder.empty()) throw std::invalid_argument("select_lambda: empty ladder");
    if (ladder.size() == 1) return ladder[0];
    const std::size_t n = y.size();
    const std::size_t n_targets = n - static_cast<std::size_t>(p);
    const std::size_t n_val = std::max<std::size_t>(1, n_targets / 5);
    const std::size_t first_val = n - n_val;

    std::vector<double> sse(ladder.size(), 0.0);
    for (std::size_t t = first_val; t < n; ++t) {
        const detail::LassoDesign d = detail::build_design(y, exog, p, t);
        std::vector<double> row(d.cols.size());
        for (int lag = 1; lag <= p; ++lag)
            row[static_cast<std::size_t>(lag - 1)] = y[t - static_cast<std::size_t>(lag)];
        for (std::size_t j = 0; j < exog.size(); ++j) row[static_cast<std::size_t>(p) + j] = exog[j][t];
        std::vector<double> warm(d.cols.size(), 0.0);
        for (std::size_t li = 0; li < ladder.size(); ++li) {
            const detail::CdResult cd = detail::coordinate_descent(d, ladder[li], warm);
            warm = cd.beta;
            double pred = d.y_mean;
            for (std::size_t j = 0; j < d.cols.size(); ++j) {
                if (cd.beta[j] == 0.0 || d.col_sd[j] <= 1e-12) continue;
                pred += cd.beta[j] / d.col_sd[j] * (row[j] - d.col_mean[j]);
            }
            sse[li] += square(pred - y[t]);
        }
    }
    std::size_t best = 0;
    for (std::size_t li = 1; li < ladder.size(); ++li) {
        const bool better = sse[li] < sse[best] ||
                            (sse[li] == sse[best] && ladder[li] > ladder[best]);
        if (better) best = li;
    }
    return ladder[best];
}

// Recursive forecasts for horizons 1..h; exog_future rows give each future
// week's exogenous values (row j = week t+1+j).
inline std::vector<double> forecast_lasso(const LassoFit& fit, const std::vector<double>& y,
                                          const std::vector<std::vector<double>>& exog_future,
                                          int h, bool floor_at_zero) {
    if (h < 1) throw std::invalid_argument("forecast_lasso: horizon must be >= 1");
    if (!fit.exog_coefs.empty()) {
        if (static_cast<int>(exog_future.size()) < h)
            throw std::invalid_argument("forecast_lasso: exogenous model needs future exogenous rows through t+h");
        for (int j = 0; j < h; ++j)
            if (exog_future[static_cast<std::size_t>(j)].size() != fit.exog_coefs.size())
                throw std::invalid_argument("forecast_lasso: exogenous row width mismatch");
    }
    std::vector<double> hist = y;
    std::vector<double> out;
    for (int j = 0; j < h; ++j) {
        if (hist.size() < static_cast<std::size_t>(fit.p))
            throw numeric_error("forecast_lasso: not enough history for the lag order");
        double pred = fit.intercept;
        for (int lag = 1; lag <= fit.p; ++lag)
            pred += fit.lag_coefs[static_cast<std::size_t>(lag - 1)] * hist[hist.size() - static_cast<std::size_t>(lag)];
        for (std::size_t m = 0; m < fit.exog_coefs.size(); ++m)
            pred += fit.exog_coefs[m] * exog_future[static_cast<std::size_t>(j)][m];
        if (floor_at_zero && pred < 0.0) pred = 0.0;
        hist.push_back(pred);
        out.push_back(pred);
    }
    return out;
}

} // namespace flutrack::ts
