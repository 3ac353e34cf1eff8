#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flutrack/common.hpp"
#include "flutrack/parallel.hpp"
#include "flutrack/rng.hpp"

namespace flutrack::ts {

// Seasonal ARIMA (p,d,q)x(P,D,Q)_s fitted by conditional sum of squares.
// Exogenous signals enter as a linear regression with SARIMA errors:
//   y_t = c + beta * x_t + u_t,   phi(B) Phi(B^s) (1-B)^d (1-B^s)^D u_t
//                                   = theta(B) Theta(B^s) e_t
// The constant c is only present when d = D = 0 (differencing removes it).
// AR/MA blocks are optimized through a partial-autocorrelation transform, so
// every candidate parameter vector is stationary and invertible by
// construction. The regression part (c, beta) is profiled out exactly: for
// fixed polynomial parameters the CSS residual is linear in them, leaving a
// tiny least-squares solve instead of two extra search dimensions.

struct SarimaOrder {
    int p = 0, d = 0, q = 0;
    int P = 0, D = 0, Q = 0;
    int s = 52;

    int max_ar_lag() const { return p + s * P; }
    int max_ma_lag() const { return q + s * Q; }
    int diff_len() const { return d + s * D; }
    int n_poly_params() const { return p + q + P + Q; }

    auto tie() const { return std::tie(p, d, q, P, D, Q, s); }
    bool operator==(const SarimaOrder& o) const { return tie() == o.tie(); }
    bool operator<(const SarimaOrder& o) const { return tie() < o.tie(); }

    std::string to_string() const {
        return "(" + std::to_string(p) + "," + std::to_string(d) + "," + std::to_string(q) + ")x(" +
               std::to_string(P) + "," + std::to_string(D) + "," + std::to_string(Q) + ")_" +
               std::to_string(s);
    }
};

namespace detail {

// One difference at lag L: out[i] = in[i+L] - in[i].
inline std::vector<double> diff_at_lag(const std::vector<double>& v, int lag) {
    if (static_cast<int>(v.size()) <= lag) throw numeric_error("sarima: series too short to difference");
    std::vector<double> out(v.size() - static_cast<std::size_t>(lag));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i + static_cast<std::size_t>(lag)] - v[i];
    return out;
}

inline std::vector<double> apply_differencing(std::vector<double> v, const SarimaOrder& o) {
    for (int i = 0; i < o.D; ++i) v = diff_at_lag(v, o.s);
    for (int i = 0; i < o.d; ++i) v = diff_at_lag(v, 1);
    return v;
}

// Monahan's recursion: maps unconstrained reals through tanh to partial
// autocorrelations, then to the coefficients of a stationary AR polynomial
// 1 - sum(a_j B^j).
inline std::vector<double> pacf_to_ar(const double* r, int p) {
    std::vector<double> a(static_cast<std::size_t>(p), 0.0), prev;
    for (int i = 1; i <= p; ++i) {
        const double k = std::tanh(r[i - 1]);
        prev.assign(a.begin(), a.begin() + (i - 1));
        for (int j = 0; j < i - 1; ++j) a[static_cast<std::size_t>(j)] = prev[static_cast<std::size_t>(j)] - k * prev[static_cast<std::size_t>(i - 2 - j)];
        a[static_cast<std::size_t>(i - 1)] = k;
    }
    return a;
}

// Lag polynomial stored sparsely as (lag, coefficient) pairs, coefficients in
// the convention  poly(B) = 1 - sum(coef * B^lag)  for the AR side and
//                 poly(B) = 1 + sum(coef * B^lag)  for the MA side.
using SparsePoly = std::vector<std::pair<int, double>>;

inline SparsePoly expand_product(const std::vector<double>& short_coefs,
                                 const std::vector<double>& seasonal_coefs, int s, double cross_sign) {
    std::map<int, double> acc;
    for (std::size_t i = 0; i < short_coefs.size(); ++i) acc[static_cast<int>(i) + 1] += short_coefs[i];
    for (std::size_t j = 0; j < seasonal_coefs.size(); ++j) acc[s * (static_cast<int>(j) + 1)] += seasonal_coefs[j];
    for (std::size_t i = 0; i < short_coefs.size(); ++i)
        for (std::size_t j = 0; j < seasonal_coefs.size(); ++j)
            acc[static_cast<int>(i) + 1 + s * (static_cast<int>(j) + 1)] +=
                cross_sign * short_coefs[i] * seasonal_coefs[j];
    SparsePoly out;
    out.reserve(acc.size());
    for (const auto& [lag, c] : acc)
        if (c != 0.0) out.emplace_back(lag, c);
    return out;
}

// Conditional residual filter: e_t = v_t - sum a_i v_{t-i} - sum b_j e_{t-j},
// with e == 0 before m_start. Linear in v.
inline void css_filter(const std::vector<double>& v, const SparsePoly& a, const SparsePoly& b,
                       int m_start, std::vector<double>& e) {
    const int n = static_cast<int>(v.size());
    e.assign(v.size(), 0.0);
    for (int t = m_start; t < n; ++t) {
        double acc = v[static_cast<std::size_t>(t)];
        for (const auto& [lag, c] : a) acc -= c * v[static_cast<std::size_t>(t - lag)];
        for (const auto& [lag, c] : b) {
            const int tj = t - lag;
            if (tj >= m_start) acc -= c * e[static_cast<std::size_t>(tj)];
        }
        e[static_cast<std::size_t>(t)] = acc;
    }
}

struct ProfiledFit {
    double c = 0.0;
    double beta = 0.0;
    double ssr = 0.0;
};

// Exact least squares for (c, beta) given filtered base/intercept/exog series.
inline ProfiledFit profile_linear(const std::vector<double>& f_y, const std::vector<double>* f_one,
                                  const std::vector<double>* f_x, int m_start) {
    const std::size_t n = f_y.size();
    double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0, yy = 0;
    for (std::size_t t = static_cast<std::size_t>(m_start); t < n; ++t) {
        const double y = f_y[t];
        yy += y * y;
        const double u = f_one ? (*f_one)[t] : 0.0;
        const double x = f_x ? (*f_x)[t] : 0.0;
        a11 += u * u;
        a12 += u * x;
        a22 += x * x;
        b1 += u * y;
        b2 += x * y;
    }
    ProfiledFit out;
    if (f_one && f_x) {
        const double ridge = 1e-12 * std::max(1.0, std::max(a11, a22));
        const double det = (a11 + ridge) * (a22 + ridge) - a12 * a12;
        out.c = (b1 * (a22 + ridge) - a12 * b2) / det;
        out.beta = ((a11 + ridge) * b2 - a12 * b1) / det;
    } else if (f_one) {
        out.c = a11 > 0 ? b1 / a11 : 0.0;
    } else if (f_x) {
        out.beta = a22 > 0 ? b2 / a22 : 0.0;
    }
    out.ssr = yy - 2.0 * (out.c * b1 + out.beta * b2) + out.c * out.c * a11 +
              2.0 * out.c * out.beta * a12 + out.beta * out.beta * a22;
    if (out.ssr < 0.0) out.ssr = 0.0;
    return out;
}

// Plain Nelder-Mead on an unconstrained parameter vector.
inline std::pair<std::vector<double>, double> nelder_mead(
    const std::function<double(const std::vector<double>&)>& fn, std::vector<double> x0,
    double step, int max_iter, double ftol) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> pts(n + 1, x0);
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step;
    for (std::size_t i = 0; i <= n; ++i) fv[i] = fn(pts[i]);

    std::vector<std::size_t> ord(n + 1);
    for (int iter = 0; iter < max_iter; ++iter) {
        for (std::size_t i = 0; i <= n; ++i) ord[i] = i;
        std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        const std::size_t best = ord[0], worst = ord[n], second = ord[n - 1];
        if (std::abs(fv[worst] - fv[best]) <= ftol * (std::abs(fv[best]) + ftol)) break;

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        auto blend = [&](double t) {
            std::vector<double> p(n);
            for (std::size_t j = 0; j < n; ++j) p[j] = centroid[j] + t * (pts[worst][j] - centroid[j]);
            return p;
        };
        const std::vector<double> refl = blend(-1.0);
        const double f_refl = fn(refl);
        if (f_refl < fv[best]) {
            const std::vector<double> expa = blend(-2.0);
            const double f_expa = fn(expa);
            if (f_expa < f_refl) {
                pts[worst] = expa;
                fv[worst] = f_expa;
            } else {
                pts[worst] = refl;
                fv[worst] = f_refl;
            }
        } else if (f_refl < fv[second]) {
            pts[worst] = refl;
            fv[worst] = f_refl;
        } else {
            const bool outside = f_refl < fv[worst];
            const std::vector<double> contr = blend(outside ? -0.5 : 0.5);
            const double f_contr = fn(contr);
            if (f_contr < std::min(f_refl, fv[worst])) {
                pts[worst] = contr;
                fv[worst] = f_contr;
            } else {
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (std::size_t j = 0; j < n; ++j)
                        pts[i][j] = pts[best][j] + 0.5 * (pts[i][j] - pts[best][j]);
                    fv[i] = fn(pts[i]);
                }
            }
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i <= n; ++i)
        if (fv[i] < fv[best]) best = i;
    return {pts[best], fv[best]};
}

} // namespace detail

struct SarimaOptions {
    std::uint64_t seed = 1;
    int restarts = 2;          // seeded extra starts on top of the zero start
    int nm_iters_per_dim = 250;
    // Residuals are counted from this original-time index; used by order
    // selection to give every candidate the same sample. Default: the spec's
    // own burn-in (differencing plus AR conditioning).
    std::optional<int> condition_from;
    bool floor_at_zero = true; // rate series clamp forecasts at 0
};

struct SarimaFit {
    SarimaOrder order;
    bool has_intercept = false;
    double intercept = 0.0; // mean of the (standardized-exog-adjusted) series, d = D = 0 only
    bool has_exog = false;
    double exog_coef = 0.0; // on the original exogenous scale
    std::vector<double> ar, ma, sar, sma;
    double sigma2 = 0.0;
    double loglik = 0.0;
    double aic = 0.0;
    int n_used = 0;
    int m_start = 0; // conditioning offset inside the differenced series
    bool floor_at_zero = true;

    // Training snapshot; forecasts recompute residual state from it.
    std::vector<double> y_train;
    std::vector<double> x_train; // original scale, empty when has_exog == false
    double x_mean = 0.0, x_sd = 1.0;
    double beta_std = 0.0; // exog coefficient on the standardized scale
};

inline SarimaFit fit_sarima(const std::vector<double>& y, const std::vector<double>* x,
                            const SarimaOrder& order, const SarimaOptions& opts = {}) {
    if (order.p < 0 || order.q < 0 || order.P < 0 || order.Q < 0 || order.s < 1 ||
        order.d < 0 || order.d > 1 || order.D < 0 || order.D > 1)
        throw std::invalid_argument("fit_sarima: order out of range (d, D must be 0 or 1)");
    const int n = static_cast<int>(y.size());
    if (x && static_cast<int>(x->size()) != n)
        throw std::invalid_argument("fit_sarima: exogenous series length mismatch");
    for (double v : y)
        if (is_missing(v)) throw numeric_error("fit_sarima: series contains missing values");
    if (x)
        for (double v : *x)
            if (is_missing(v)) throw numeric_error("fit_sarima: exogenous series contains missing values");

    SarimaFit fit;
    fit.order = order;
    fit.has_intercept = (order.d == 0 && order.D == 0);
    fit.has_exog = x != nullptr;
    fit.floor_at_zero = opts.floor_at_zero;
    fit.y_train = y;

    // Standardize the exogenous signal within the training window; the
    // reported coefficient is rescaled back afterwards.
    std::vector<double> xs;
    if (x) {
        fit.x_train = *x;
        double mean = 0.0;
        for (double v : *x) mean += v;
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (double v : *x) var += square(v - mean);
        var /= static_cast<double>(n);
        fit.x_mean = mean;
        fit.x_sd = std::sqrt(var);
        xs.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            xs[static_cast<std::size_t>(i)] = fit.x_sd > 1e-12 ? ((*x)[static_cast<std::size_t>(i)] - mean) / fit.x_sd : 0.0;
    }

    if (n <= order.diff_len())
        throw numeric_error("fit_sarima: insufficient data for differencing " + order.to_string());
    const std::vector<double> wy = detail::apply_differencing(y, order);
    std::vector<double> wx;
    if (x) wx = detail::apply_differencing(xs, order);

    const int cond_from = opts.condition_from.value_or(order.diff_len() + order.max_ar_lag());
    const int m_start = cond_from - order.diff_len();
    if (m_start < order.max_ar_lag())
        throw std::invalid_argument("fit_sarima: conditioning offset shorter than AR burn-in");
    const int n_w = static_cast<int>(wy.size());
    const int n_used = n_w - m_start;
    const int k_free = order.n_poly_params() + (fit.has_intercept ? 1 : 0) + (fit.has_exog ? 1 : 0);
    if (n_used < std::max(4, k_free + 2))
        throw numeric_error("fit_sarima: insufficient data for " + order.to_string() +
                            " (usable points: " + std::to_string(std::max(n_used, 0)) + ")");

    std::vector<double> ones;
    if (fit.has_intercept) ones.assign(wy.size(), 1.0);

    std::vector<double> f_y, f_one, f_x;
    const auto evaluate = [&](const std::vector<double>& r, detail::ProfiledFit* prof_out,
                              detail::SparsePoly* a_out, detail::SparsePoly* b_out) {
        const std::vector<double> ar = detail::pacf_to_ar(r.data(), order.p);
        std::vector<double> ma = detail::pacf_to_ar(r.data() + order.p, order.q);
        const std::vector<double> sar = detail::pacf_to_ar(r.data() + order.p + order.q, order.P);
        std::vector<double> sma = detail::pacf_to_ar(r.data() + order.p + order.q + order.P, order.Q);
        for (double& v : ma) v = -v;  // invertible MA via the stationary-AR map
        for (double& v : sma) v = -v;
        const detail::SparsePoly a = detail::expand_product(ar, sar, order.s, -1.0);
        const detail::SparsePoly b = detail::expand_product(ma, sma, order.s, 1.0);
        detail::css_filter(wy, a, b, m_start, f_y);
        if (fit.has_intercept) detail::css_filter(ones, a, b, m_start, f_one);
        if (fit.has_exog) detail::css_filter(wx, a, b, m_start, f_x);
        const detail::ProfiledFit prof = detail::profile_linear(
            f_y, fit.has_intercept ? &f_one : nullptr, fit.has_exog ? &f_x : nullptr, m_start);
        if (prof_out) *prof_out = prof;
        if (a_out) *a_out = a;
        if (b_out) *b_out = b;
        return prof.ssr;
    };

    const int dim = order.n_poly_params();
    std::vector<double> best_r(static_cast<std::size_t>(dim), 0.0);
    if (dim > 0) {
        const int max_iter = opts.nm_iters_per_dim * dim;
        const auto objective = [&](const std::vector<double>& r) {
            return evaluate(r, nullptr, nullptr, nullptr);
        };
        double best_f = std::numeric_limits<double>::infinity();
        Rng rng(opts.seed);
        for (int attempt = 0; attempt <= opts.restarts; ++attempt) {
            std::vector<double> start(static_cast<std::size_t>(dim), 0.0);
            if (attempt > 0)
                for (double& v : start) v = rng.uniform(-0.8, 0.8);
            auto [rv, f] = detail::nelder_mead(objective, start, 0.5, max_iter, 1e-12);
            if (f < best_f) {
                best_f = f;
                best_r = rv;
            }
        }
        // Polish with a tighter simplex around the winner.
        auto [rv, f] = detail::nelder_mead(objective, best_r, 0.05, max_iter, 1e-14);
        if (f < best_f) best_r = rv;
    }

    detail::ProfiledFit prof;
    evaluate(best_r, &prof, nullptr, nullptr);

    fit.ar = detail::pacf_to_ar(best_r.data(), order.p);
    fit.ma = detail::pacf_to_ar(best_r.data() + order.p, order.q);
    fit.sar = detail::pacf_to_ar(best_r.data() + order.p + order.q, order.P);
    fit.sma = detail::pacf_to_ar(best_r.data() + order.p + order.q + order.P, order.Q);
    for (double& v : fit.ma) v = -v;
    for (double& v : fit.sma) v = -v;
    fit.intercept = prof.c;
    fit.beta_std = prof.beta;
    fit.exog_coef = fit.has_exog && fit.x_sd > 1e-12 ? prof.beta / fit.x_sd : 0.0;
    fit.m_start = m_start;
    fit.n_used = n_used;
    fit.sigma2 = std::max(prof.ssr / static_cast<double>(n_used), 1e-300);
    fit.loglik = -0.5 * static_cast<double>(n_used) *
                 (std::log(2.0 * 3.14159265358979323846 * fit.sigma2) + 1.0);
    const int k = k_free + 1; // + residual variance
    fit.aic = 2.0 * k - 2.0 * fit.loglik;
    return fit;
}

// Recursive point forecasts for horizons 1..h. Exogenous fits need the
// signal's future values (search data is available in real time, so the
// protocol supplies x through t+h).
inline std::vector<double> forecast(const SarimaFit& fit, int h,
                                    const std::vector<double>* exog_future = nullptr) {
    if (h < 1) throw std::invalid_argument("forecast: horizon must be >= 1");
    if (fit.has_exog) {
        if (!exog_future || static_cast<int>(exog_future->size()) < h)
            throw std::invalid_argument("forecast: exogenous model needs future exogenous values through t+h");
        for (int j = 0; j < h; ++j)
            if (is_missing((*exog_future)[static_cast<std::size_t>(j)]))
                throw std::invalid_argument("forecast: exogenous future contains missing values");
    }
    const SarimaOrder& o = fit.order;
    const int n = static_cast<int>(fit.y_train.size());

    // Extended standardized exog on original time 0..n+h-1.
    std::vector<double> xs;
    if (fit.has_exog) {
        xs.resize(static_cast<std::size_t>(n + h));
        for (int i = 0; i < n; ++i)
            xs[static_cast<std::size_t>(i)] =
                fit.x_sd > 1e-12 ? (fit.x_train[static_cast<std::size_t>(i)] - fit.x_mean) / fit.x_sd : 0.0;
        for (int j = 0; j < h; ++j)
            xs[static_cast<std::size_t>(n + j)] =
                fit.x_sd > 1e-12 ? ((*exog_future)[static_cast<std::size_t>(j)] - fit.x_mean) / fit.x_sd : 0.0;
    }

    const std::vector<double> wy = detail::apply_differencing(fit.y_train, o);
    std::vector<double> v(wy.size());
    std::vector<double> wx;
    if (fit.has_exog) {
        std::vector<double> hist(xs.begin(), xs.begin() + n);
        wx = detail::apply_differencing(hist, o);
    }
    for (std::size_t t = 0; t < wy.size(); ++t)
        v[t] = wy[t] - fit.intercept - (fit.has_exog ? fit.beta_std * wx[t] : 0.0);

    const detail::SparsePoly a = detail::expand_product(fit.ar, fit.sar, o.s, -1.0);
    const detail::SparsePoly b = detail::expand_product(fit.ma, fit.sma, o.s, 1.0);
    std::vector<double> e;
    detail::css_filter(v, a, b, fit.m_start, e);

    const int n_w = static_cast<int>(wy.size());
    std::vector<double> v_ext = v, e_ext = e, wy_ext = wy;
    std::vector<double> y_ext = fit.y_train;
    // Seasonal-differenced level (needed to invert regular differencing).
    std::vector<double> sd_ext;
    if (o.D == 1) {
        for (int t = o.s; t < n; ++t)
            sd_ext.push_back(fit.y_train[static_cast<std::size_t>(t)] - fit.y_train[static_cast<std::size_t>(t - o.s)]);
    } else {
        sd_ext = fit.y_train;
    }

    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(h));
    for (int j = 0; j < h; ++j) {
        const int t = n_w + j; // index into the differenced series
        double vhat = 0.0;
        for (const auto& [lag, c] : a) vhat += c * v_ext[static_cast<std::size_t>(t - lag)];
        for (const auto& [lag, c] : b) {
            const int tj = t - lag;
            if (tj >= fit.m_start && tj < n_w) vhat += c * e_ext[static_cast<std::size_t>(tj)];
        }
        double wxf = 0.0;
        if (fit.has_exog) {
            const int orig_t = n + j; // original-time index of this forecast
            double xv = xs[static_cast<std::size_t>(orig_t)];
            if (o.D == 1) xv -= xs[static_cast<std::size_t>(orig_t - o.s)];
            if (o.d == 1) {
                double xprev = xs[static_cast<std::size_t>(orig_t - 1)];
                if (o.D == 1) xprev -= xs[static_cast<std::size_t>(orig_t - 1 - o.s)];
                xv -= xprev;
            }
            wxf = xv;
        }
        const double what = vhat + fit.intercept + fit.beta_std * wxf;
        v_ext.push_back(what - fit.intercept - fit.beta_std * wxf);
        e_ext.push_back(0.0);
        wy_ext.push_back(what);

        // Undo differencing: first the regular difference, then the seasonal.
        double sd_val;
        if (o.d == 1)
            sd_val = what + sd_ext[sd_ext.size() - 1];
        else
            sd_val = what;
        sd_ext.push_back(sd_val);
        double yhat;
        if (o.D == 1)
            yhat = sd_val + y_ext[y_ext.size() - static_cast<std::size_t>(o.s)];
        else
            yhat = sd_val;
        if (fit.floor_at_zero && yhat < 0.0) yhat = 0.0;
        y_ext.push_back(yhat);
        out.push_back(yhat);
    }
    return out;
}

struct SarimaGrid {
    std::vector<int> p{0, 1, 2}, d{0, 1}, q{0, 1, 2};
    std::vector<int> P{0, 1}, D{0, 1}, Q{0, 1};
    int s = 52;

    std::vector<SarimaOrder> enumerate() const {
        std::vector<SarimaOrder> out;
        for (int pp : p)
            for (int dd : d)
                for (int qq : q)
                    for (int PP : P)
                        for (int DD : D)
                            for (int QQ : Q) out.push_back(SarimaOrder{pp, dd, qq, PP, DD, QQ, s});
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }
};

struct SelectionEntry {
    SarimaOrder order;
    double aic = kNaN;
    bool ok = false;
    std::string error;
};

struct SelectionResult {
    SarimaOrder best;
    std::vector<SelectionEntry> table;
};

// AIC order selection. Every candidate is conditioned from the same
// original-time index (the grid-wide worst-case burn-in), so residual sets
// cover identical time points and the AICs are comparable; per-candidate CSS
// conditioning would hand long-seasonal models a spurious advantage by
// silently shrinking their residual sample.
inline SelectionResult select_sarima(const std::vector<double>& y, const std::vector<double>* x,
                                     const SarimaGrid& grid, const SarimaOptions& opts = {},
                                     unsigned jobs = 1) {
    const std::vector<SarimaOrder> specs = grid.enumerate();
    if (specs.empty()) throw std::invalid_argument("select_sarima: empty grid");
    int burn = 0;
    for (const auto& o : specs) burn = std::max(burn, o.diff_len() + o.max_ar_lag());

    SelectionResult result;
    result.table.resize(specs.size());
    parallel_for(specs.size(), jobs, [&](std::size_t i) {
        SelectionEntry& entry = result.table[i];
        entry.order = specs[i];
        try {
            SarimaOptions o = opts;
            o.seed = derive_seed(opts.seed, i);
            o.condition_from = burn;
            const SarimaFit fit = fit_sarima(y, x, specs[i], o);
            entry.aic = fit.aic;
            entry.ok = true;
        } catch (const std::exception& ex) {
            entry.error = ex.what();
        }
    });

    const SelectionEntry* best = nullptr;
    for (const auto& entry : result.table) {
        if (!entry.ok) continue;
        if (!best || entry.aic < best->aic ||
            (entry.aic == best->aic &&
             (entry.order.n_poly_params() < best->order.n_poly_params() ||
              (entry.order.n_poly_params() == best->order.n_poly_params() &&
               entry.order < best->order))))
            best = &entry;
    }
    if (!best) {
        std::string msg = "select_sarima: every candidate failed:";
        for (const auto& entry : result.table)
            msg += "\n  " + entry.order.to_string() + ": " + entry.error;
        throw numeric_error(msg);
    }
    result.best = best->order;
    return result;
}

} // namespace flutrack::ts
