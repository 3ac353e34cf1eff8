// Acceptance suite: one pass/fail line per criterion, exit 0 only if every
// executed criterion passes. Run all criteria or a single one with --only N.
//
// The paper-scale reference numbers (national SARIMA-MRP RMSE 0.234 vs
// SARIMA-HIST 0.261, household-ILI RR 1.57, season correlations 0.90/0.84)
// come from proprietary panel/search/surveillance data and are not
// reproducible here; these criteria check the estimation chain against
// synthetic worlds with known ground truth instead, using the published
// effect sizes as planted targets.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "flutrack/backtest.hpp"
#include "flutrack/casecontrol.hpp"
#include "flutrack/metrics.hpp"
#include "flutrack/mrp.hpp"
#include "flutrack/parallel.hpp"
#include "flutrack/rng.hpp"
#include "flutrack/sarima.hpp"
#include "flutrack/schemas.hpp"
#include "flutrack/synth.hpp"

using namespace flutrack;
namespace fs = std::filesystem;

namespace {

std::string g_cli_path = FLUTRACK_CLI_PATH;

struct CriterionResult {
    bool pass = false;
    std::string detail;
};

using Criterion = std::function<CriterionResult()>;

// ---------------------------------------------------------------------------
// 1. Intercept-correction round trip: 1000 random (B0, tau, ybar) triples,
//    correct then re-correct to ybar, recover B0 within 1e-12. Runtime < 1 s.

CriterionResult criterion_1() {
    Rng rng(101);
    double worst = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
        const double b0 = rng.uniform(-20.0, 20.0);
        const double tau = std::exp(rng.uniform(std::log(1e-8), std::log(0.5)));
        const double ybar = rng.uniform(0.01, 0.99);
        cc::FittedLogit fit;
        fit.fit.beta = Eigen::VectorXd::Constant(1, b0);
        fit.fit.covariance = Eigen::MatrixXd::Zero(1, 1);
        fit.fit.ybar = ybar;
        fit.fit.names = {"(intercept)"};
        fit.calibration = ybar;
        const cc::FittedLogit once = cc::correct_intercept(fit, tau);
        const cc::FittedLogit back = cc::correct_intercept(once, ybar);
        worst = std::max(worst, std::abs(back.fit.beta[0] - b0));
    }
    CriterionResult r;
    r.pass = worst < 1e-12;
    r.detail = "max |recovered - B0| = " + format_double(worst);
    return r;
}

// ---------------------------------------------------------------------------
// 2. Case-control recovery at the paper's planted RR = 1.57 and sample scale
//    (n = 650): median recovered RR over 100 replications in [1.35, 1.85],
//    95% CIs cover the planted RR in >= 88/100. Runtime < 60 s.

CriterionResult criterion_2() {
    const int reps = 100;
    std::vector<double> rr(static_cast<std::size_t>(reps));
    std::vector<int> covered(static_cast<std::size_t>(reps), 0);
    parallel_for(static_cast<std::size_t>(reps), default_jobs(), [&](std::size_t rep) {
        synth::WorldConfig cfg;
        cfg.seed = 20000 + rep;
        cfg.rr_hh_ili = 1.57;
        cfg.rr_father = 0.0;
        cfg.cc_tau = 1.2e-5;
        const synth::CaseControlWorld world = synth::gen_casecontrol(cfg, 260, 390);
        cc::ModelFormula formula;
        for (const char* col : {"volume", "female", "parent", "spouse", "age", "hh_ili"})
            formula.terms.push_back(cc::ModelTerm{{col}});
        const cc::FittedLogit fit = cc::fit_logit(world.table, formula);
        const cc::FittedLogit corrected = cc::correct_intercept(fit, cfg.cc_tau);
        const Eigen::VectorXd x1 = cc::term_vector(world.table, formula, {{"hh_ili", 1.0}});
        const Eigen::VectorXd x0 = cc::term_vector(world.table, formula, {{"hh_ili", 0.0}});
        const cc::RiskContrast rc = cc::risk_contrast(corrected, x1, x0, 10000, 777 + rep);
        rr[rep] = rc.rr;
        covered[rep] = (world.truth.population_rr >= rc.rr_lo &&
                        world.truth.population_rr <= rc.rr_hi)
                           ? 1
                           : 0;
    });
    std::vector<double> sorted = rr;
    std::sort(sorted.begin(), sorted.end());
    const double median = 0.5 * (sorted[49] + sorted[50]);
    int n_covered = 0;
    for (int c : covered) n_covered += c;
    CriterionResult r;
    r.pass = median >= 1.35 && median <= 1.85 && n_covered >= 88;
    r.detail = "median RR = " + format_double(median) + ", CI coverage " +
               std::to_string(n_covered) + "/100";
    return r;
}

// ---------------------------------------------------------------------------
// 3. Logistic oracle: fit_logit matches the closed-form 2x2 log odds ratio
//    and an independent Newton solver within 1e-6 on 50 random instances.

CriterionResult criterion_3() {
    Rng rng(303);
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const int n11 = 10 + static_cast<int>(rng.below(70));
        const int n10 = 10 + static_cast<int>(rng.below(70));
        const int n01 = 10 + static_cast<int>(rng.below(70));
        const int n00 = 10 + static_cast<int>(rng.below(70));
        cc::CaseControlTable t;
        t.columns = {"exposed"};
        const int n = n11 + n10 + n01 + n00;
        t.values.resize(n, 1);
        t.y.resize(n);
        int row = 0;
        auto fill = [&](int count, double x, double y) {
            for (int i = 0; i < count; ++i, ++row) {
                t.values(row, 0) = x;
                t.y[row] = y;
            }
        };
        fill(n11, 1, 1);
        fill(n10, 1, 0);
        fill(n01, 0, 1);
        fill(n00, 0, 0);

        const cc::FittedLogit fit = cc::fit_logit(t, cc::default_formula(t));
        const double closed_slope =
            std::log(static_cast<double>(n11) * n00 / (static_cast<double>(n01) * n10));
        const double closed_b0 = std::log(static_cast<double>(n01) / n00);
        worst = std::max(worst, std::abs(fit.fit.beta[1] - closed_slope));
        worst = std::max(worst, std::abs(fit.fit.beta[0] - closed_b0));

        // independent Newton oracle
        double b0 = 0.0, b1 = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double g0 = 0, g1 = 0, h00 = 0, h01 = 0, h11 = 0;
            for (Eigen::Index i = 0; i < t.y.size(); ++i) {
                const double x = t.values(i, 0);
                const double p = inv_logit(b0 + b1 * x);
                g0 += t.y[i] - p;
                g1 += (t.y[i] - p) * x;
                const double w = p * (1 - p);
                h00 += w;
                h01 += w * x;
                h11 += w * x * x;
            }
            const double det = h00 * h11 - h01 * h01;
            b0 += (h11 * g0 - h01 * g1) / det;
            b1 += (h00 * g1 - h01 * g0) / det;
        }
        worst = std::max(worst, std::abs(fit.fit.beta[0] - b0));
        worst = std::max(worst, std::abs(fit.fit.beta[1] - b1));
    }
    CriterionResult r;
    r.pass = worst < 1e-6;
    r.detail = "max |fit - oracle| = " + format_double(worst);
    return r;
}

// ---------------------------------------------------------------------------
// 4. Poststratification oracle: brute-force weighted sums within 1e-12 on 100
//    random cell tables; weight-scaling invariance to 1e-12.

CriterionResult criterion_4() {
    Rng rng(404);
    const auto& bands = synth::default_age_bands();
    double worst = 0.0, worst_scale = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<mrp::CensusCell> cells;
        const int target = 5 + static_cast<int>(rng.below(40));
        for (int i = 0; i < target; ++i) {
            mrp::CensusCell c;
            c.key.state = synth::state_code(static_cast<int>(rng.below(8)));
            c.key.edu_q = 1 + static_cast<int>(rng.below(4));
            c.key.age_band = bands[rng.below(4)];
            c.key.child_q = 1 + static_cast<int>(rng.below(4));
            c.n_zip = rng.uniform(0.5, 80.0);
            c.mean_income = rng.uniform(20000.0, 90000.0);
            bool dup = false;
            for (const auto& prev : cells) dup |= prev.key == c.key;
            if (!dup) cells.push_back(c);
        }
        const mrp::CensusTable census(std::move(cells));
        std::vector<double> yhat(census.cells().size());
        for (double& v : yhat) v = rng.uniform();

        const std::string scope =
            rng.bernoulli(0.5) ? census.cells()[rng.below(census.cells().size())].key.state : "";
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < census.cells().size(); ++i) {
            if (!scope.empty() && census.cells()[i].key.state != scope) continue;
            num += census.cells()[i].n_zip * yhat[i];
            den += census.cells()[i].n_zip;
        }
        const double got = mrp::poststratify(yhat, census, scope);
        worst = std::max(worst, std::abs(got - num / den));

        std::vector<mrp::CensusCell> scaled = census.cells();
        const double c = rng.uniform(0.3, 30.0);
        for (auto& cell : scaled) cell.n_zip *= c;
        const mrp::CensusTable census2(std::move(scaled));
        worst_scale = std::max(worst_scale, std::abs(mrp::poststratify(yhat, census2, scope) - got));
    }
    CriterionResult r;
    r.pass = worst < 1e-12 && worst_scale < 1e-12;
    r.detail = "max |poststratify - oracle| = " + format_double(worst) +
               ", scaling drift = " + format_double(worst_scale);
    return r;
}

// ---------------------------------------------------------------------------
// 5. MRP shrinkage benefit under sparse sampling (<= 3 flagged queries per
//    cell-window, sigma_state = 0.5, 20 states): poststratified state
//    estimates beat raw per-state proportions in MSE against truth in >= 80
//    of 100 replications. Runtime < 5 min.

CriterionResult criterion_5() {
    const int reps = 100;
    std::vector<int> wins(static_cast<std::size_t>(reps), 0);
    parallel_for(static_cast<std::size_t>(reps), default_jobs(), [&](std::size_t rep) {
        synth::WorldConfig cfg;
        cfg.seed = 50000 + rep;
        cfg.states = 20;
        cfg.cells_per_state = 8;
        cfg.sd_state = 0.5;
        cfg.sd_edu = cfg.sd_age = cfg.sd_child = 0.15;
        cfg.sd_eduage = 0.1;
        cfg.income_coef = 0.1;
        cfg.tau_true = 0.25;
        const synth::World world = synth::gen_world(cfg);
        Rng rng(derive_seed(cfg.seed, 0x5EED));

        mrp::WindowDataset window;
        window.end_day = 2;
        window.span_days = 3;
        for (std::size_t cell = 0; cell < world.census.cells().size(); ++cell) {
            const std::int64_t n = std::min<std::int64_t>(rng.poisson(1.5), 3);
            if (n == 0) continue;
            std::int64_t a1 = 0;
            const double p = inv_logit(world.cell_eta0[cell]);
            for (std::int64_t i = 0; i < n; ++i) a1 += rng.bernoulli(p);
            window.cells.emplace_back(cell, n, a1);
        }
        const mrp::MrpFit fit = mrp::fit_mrp(window, world.census);
        const std::vector<double> yhat = mrp::predict_cells(fit, world.census);

        // raw per-state proportions with a pooled-national fallback
        std::map<std::string, std::pair<double, double>> raw; // state -> (a1, flagged)
        double tot_a1 = 0, tot_n = 0;
        for (const auto& [cell, nf, na] : window.cells) {
            auto& entry = raw[world.census.cells()[cell].key.state];
            entry.first += static_cast<double>(na);
            entry.second += static_cast<double>(nf);
            tot_a1 += static_cast<double>(na);
            tot_n += static_cast<double>(nf);
        }
        const double pooled = tot_n > 0 ? tot_a1 / tot_n : 0.0;

        double mse_mrp = 0.0, mse_raw = 0.0;
        for (const auto& state : world.census.states()) {
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < world.census.cells().size(); ++i) {
                if (world.census.cells()[i].key.state != state) continue;
                num += world.census.cells()[i].n_zip * inv_logit(world.cell_eta0[i]);
                den += world.census.cells()[i].n_zip;
            }
            const double truth = num / den;
            const double mrp_est = mrp::poststratify(yhat, world.census, state);
            const auto it = raw.find(state);
            const double raw_est =
                (it != raw.end() && it->second.second > 0) ? it->second.first / it->second.second
                                                           : pooled;
            mse_mrp += square(mrp_est - truth);
            mse_raw += square(raw_est - truth);
        }
        wins[rep] = mse_mrp < mse_raw ? 1 : 0;
    });
    int n_wins = 0;
    for (int w : wins) n_wins += w;
    CriterionResult r;
    r.pass = n_wins >= 80;
    r.detail = "MRP beat raw proportions in " + std::to_string(n_wins) + "/100 replications";
    return r;
}

// ---------------------------------------------------------------------------
// 6. SARIMA parameter recovery: AR(1) phi = 0.7 within +-0.1 on n = 300 and a
//    planted exogenous coefficient 2.0 within +-0.2, each in >= 90/100.

CriterionResult criterion_6() {
    const int reps = 100;
    std::vector<int> ar_ok(static_cast<std::size_t>(reps), 0), ex_ok(static_cast<std::size_t>(reps), 0);
    parallel_for(static_cast<std::size_t>(reps), default_jobs(), [&](std::size_t rep) {
        {
            Rng rng(60000 + rep);
            const int n = 300;
            std::vector<double> y(static_cast<std::size_t>(n));
            double u = rng.normal(0.0, 1.0 / std::sqrt(1.0 - 0.49));
            for (int t = 0; t < n; ++t) {
                y[static_cast<std::size_t>(t)] = 5.0 + u;
                u = 0.7 * u + rng.normal(0.0, 1.0);
            }
            ts::SarimaOptions opts;
            opts.seed = rep;
            opts.floor_at_zero = false;
            const ts::SarimaFit fit =
                ts::fit_sarima(y, nullptr, ts::SarimaOrder{1, 0, 0, 0, 0, 0, 52}, opts);
            ar_ok[rep] = std::abs(fit.ar[0] - 0.7) <= 0.1 ? 1 : 0;
        }
        {
            Rng rng(61000 + rep);
            const int n = 300;
            std::vector<double> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
            double u = 0.0;
            for (int t = 0; t < n; ++t) {
                x[static_cast<std::size_t>(t)] = rng.normal(0.0, 1.0);
                u = 0.5 * u + rng.normal(0.0, 1.0);
                y[static_cast<std::size_t>(t)] = 1.0 + 2.0 * x[static_cast<std::size_t>(t)] + u;
            }
            ts::SarimaOptions opts;
            opts.seed = rep;
            opts.floor_at_zero = false;
            const ts::SarimaFit fit =
                ts::fit_sarima(y, &x, ts::SarimaOrder{1, 0, 0, 0, 0, 0, 52}, opts);
            ex_ok[rep] = std::abs(fit.exog_coef - 2.0) <= 0.2 ? 1 : 0;
        }
    });
    int n_ar = 0, n_ex = 0;
    for (int i = 0; i < reps; ++i) {
        n_ar += ar_ok[static_cast<std::size_t>(i)];
        n_ex += ex_ok[static_cast<std::size_t>(i)];
    }
    CriterionResult r;
    r.pass = n_ar >= 90 && n_ex >= 90;
    r.detail = "AR(1) within 0.1: " + std::to_string(n_ar) + "/100, exog within 0.2: " +
               std::to_string(n_ex) + "/100";
    return r;
}

// ---------------------------------------------------------------------------
// 7. LASSO correctness: KKT residuals < 1e-6 on every fit, lambda = 0 matches
//    the OLS oracle within 1e-6, lambda >= lambda_max zeroes everything.

CriterionResult criterion_7() {
    Rng rng(707);
    double worst_kkt = 0.0, worst_ols = 0.0;
    bool all_zero_ok = true;
    for (int rep = 0; rep < 25; ++rep) {
        const int n = 200 + static_cast<int>(rng.below(100));
        std::vector<double> y(static_cast<std::size_t>(n), 0.0);
        for (int t = 0; t < n; ++t) {
            double v = rng.normal(0.0, 1.0);
            if (t >= 1) v += 0.45 * y[static_cast<std::size_t>(t - 1)];
            if (t >= 52) v += 0.3 * y[static_cast<std::size_t>(t - 52)];
            y[static_cast<std::size_t>(t)] = v;
        }
        const double lmax = ts::lasso_lambda_max(y, {}, 52);
        for (const double frac : {0.7, 0.1, 0.01}) {
            const ts::LassoFit fit = ts::fit_lasso_ar(y, {}, 52, lmax * frac);
            worst_kkt = std::max(worst_kkt, ts::lasso_kkt_violation(y, {}, fit));
        }
        const ts::LassoFit at_max = ts::fit_lasso_ar(y, {}, 52, lmax * 1.0001);
        for (double c : at_max.lag_coefs) all_zero_ok &= c == 0.0;

        // lambda = 0 vs OLS on a small, well-conditioned lag design
        const int p = 6;
        const ts::LassoFit ols_fit = ts::fit_lasso_ar(y, {}, p, 0.0);
        const int rows = n - p;
        Eigen::MatrixXd X(rows, p + 1);
        Eigen::VectorXd target(rows);
        for (int rr = 0; rr < rows; ++rr) {
            X(rr, 0) = 1.0;
            for (int lag = 1; lag <= p; ++lag)
                X(rr, lag) = y[static_cast<std::size_t>(rr + p - lag)];
            target(rr) = y[static_cast<std::size_t>(rr + p)];
        }
        const Eigen::VectorXd beta = (X.transpose() * X).ldlt().solve(X.transpose() * target);
        worst_ols = std::max(worst_ols, std::abs(ols_fit.intercept - beta[0]));
        for (int lag = 1; lag <= p; ++lag)
            worst_ols = std::max(worst_ols,
                                 std::abs(ols_fit.lag_coefs[static_cast<std::size_t>(lag - 1)] - beta[lag]));
    }
    CriterionResult r;
    r.pass = worst_kkt < 1e-6 && worst_ols < 1e-6 && all_zero_ok;
    r.detail = "max KKT violation = " + format_double(worst_kkt) +
               ", max |lasso(0) - OLS| = " + format_double(worst_ols) +
               (all_zero_ok ? ", lambda_max zeroes all" : ", lambda_max FAILED to zero");
    return r;
}

// ---------------------------------------------------------------------------
// 8. End-to-end signal value: on synthetic worlds whose A1 rate is driven by
//    the ILI curve, SARIMA-MRP beats SARIMA-HIST at h = 1 and h = 2 in >= 80
//    of 100 worlds, and the h = 2 improvement ratio exceeds the h = 1 ratio
//    in >= 60. Runtime < 20 min.

CriterionResult criterion_8() {
    const int reps = 100;
    std::vector<int> win_both(static_cast<std::size_t>(reps), 0);
    std::vector<int> h2_better(static_cast<std::size_t>(reps), 0);
    parallel_for(static_cast<std::size_t>(reps), default_jobs(), [&](std::size_t rep) {
        synth::WorldConfig cfg;
        cfg.seed = 80000 + rep;
        cfg.states = 6;
        cfg.cells_per_state = 8;
        cfg.weeks = 164;
        cfg.queries_per_day = 600.0;
        cfg.nonflu_share = 0.0;
        cfg.tau_true = 0.3;
        cfg.gamma = 1.2;
        cfg.sd_state = 0.3;
        cfg.sd_edu = cfg.sd_age = cfg.sd_child = 0.15;
        cfg.sd_eduage = 0.1;
        cfg.income_coef = 0.1;
        cfg.noise_sd = 0.35;
        cfg.noise_rho = 0.85;

        const synth::World world = synth::gen_world(cfg);
        const ts::IliSeries ili = synth::gen_ili_curve(cfg);
        const synth::QueryStream stream = synth::gen_query_stream(cfg, world, ili);

        const mrp::DailySignal sig =
            mrp::mrp_signal(stream.queries, world.census, world.zipmap, 3, 1);
        std::map<std::int64_t, double> weekly;
        for (const auto& p : mrp::weekly_aggregate(sig.days, sig.estimates[0]))
            if (!is_missing(p.value)) weekly[p.week_start] = p.value;
        const ts::ExogSignal exog = ts::align_exog(ili, weekly);

        ts::BacktestConfig bt;
        bt.horizons = {1, 2};
        bt.seed = cfg.seed;
        bt.jobs = 1;
        bt.sarima_restarts = 1;
        bt.grid.p = {0, 1, 2};
        bt.grid.d = {0, 1};
        bt.grid.q = {0, 1};
        bt.grid.P = {0, 1};
        bt.grid.D = {0};
        bt.grid.Q = {0};

        const auto hist_rows = ts::rolling_backtest(ili, nullptr, nullptr,
                                                    ts::ModelFamily::SarimaHist, bt);
        const auto mrp_rows = ts::rolling_backtest(ili, &exog, nullptr,
                                                   ts::ModelFamily::SarimaMrp, bt);
        auto rmse_at = [](const std::vector<eval::ForecastRow>& rows, int h) {
            std::vector<double> f, a;
            for (const auto& row : rows) {
                if (row.horizon != h) continue;
                f.push_back(row.forecast);
                a.push_back(row.actual);
            }
            return eval::rmse(f, a);
        };
        const double h1_hist = rmse_at(hist_rows, 1), h1_mrp = rmse_at(mrp_rows, 1);
        const double h2_hist = rmse_at(hist_rows, 2), h2_mrp = rmse_at(mrp_rows, 2);
        win_both[rep] = (h1_mrp < h1_hist && h2_mrp < h2_hist) ? 1 : 0;
        h2_better[rep] = (h2_hist / h2_mrp > h1_hist / h1_mrp) ? 1 : 0;
    });
    int n_win = 0, n_h2 = 0;
    for (int i = 0; i < reps; ++i) {
        n_win += win_both[static_cast<std::size_t>(i)];
        n_h2 += h2_better[static_cast<std::size_t>(i)];
    }
    CriterionResult r;
    r.pass = n_win >= 80 && n_h2 >= 60;
    r.detail = "MRP beat HIST at both horizons in " + std::to_string(n_win) +
               "/100 worlds; h=2 improvement ratio larger in " + std::to_string(n_h2) + "/100";
    return r;
}

// ---------------------------------------------------------------------------
// 9. No-leakage: truncating the inputs after t+h leaves the forecasts at
//    origin t bit-identical, across 20 random origins.

CriterionResult criterion_9() {
    Rng rng(909);
    const int n = 240;
    std::vector<double> values(static_cast<std::size_t>(n)), exog_values(static_cast<std::size_t>(n));
    double u = 0.0;
    for (int t = 0; t < n; ++t) {
        u = 0.75 * u + rng.normal(0.0, 0.4);
        values[static_cast<std::size_t>(t)] =
            2.5 + u + 0.8 * std::cos(6.2831853 * static_cast<double>(t % 52) / 52.0);
        exog_values[static_cast<std::size_t>(t)] = values[static_cast<std::size_t>(t)] + rng.normal(0.0, 0.15);
    }
    ts::IliSeries y;
    y.geo = "US";
    const std::int64_t start = synth::world_start_day();
    for (int t = 0; t < n; ++t) y.week_starts.push_back(start + 7 * static_cast<std::int64_t>(t));
    y.values = values;
    ts::ExogSignal x;
    x.values = exog_values;

    ts::BacktestConfig bt;
    bt.horizons = {1, 2};
    bt.jobs = 1;
    bt.sarima_restarts = 1;
    bt.grid.p = {0, 1};
    bt.grid.d = {0, 1};
    bt.grid.q = {0, 1};
    bt.grid.P = {0};
    bt.grid.D = {0};
    bt.grid.Q = {0};

    int checked = 0, identical = 0;
    for (int rep = 0; rep < 20; ++rep) {
        const int t = 155 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 2 - 155)));
        ts::BacktestConfig one = bt;
        one.origin_min = y.week_starts[static_cast<std::size_t>(t)];
        one.origin_max = one.origin_min;

        for (const auto family : {ts::ModelFamily::SarimaHist, ts::ModelFamily::SarimaMrp,
                                  ts::ModelFamily::LassoHist}) {
            const bool exo = family == ts::ModelFamily::SarimaMrp;
            const auto full =
                ts::rolling_backtest(y, exo ? &x : nullptr, nullptr, family, one);

            ts::IliSeries y_trunc = y;
            y_trunc.week_starts.resize(static_cast<std::size_t>(t + 3));
            y_trunc.values.resize(static_cast<std::size_t>(t + 3));
            ts::ExogSignal x_trunc;
            x_trunc.values.assign(exog_values.begin(), exog_values.begin() + t + 3);
            const auto trunc =
                ts::rolling_backtest(y_trunc, exo ? &x_trunc : nullptr, nullptr, family, one);

            ++checked;
            bool same = full.size() == trunc.size();
            for (std::size_t i = 0; same && i < full.size(); ++i)
                same = full[i].forecast == trunc[i].forecast &&
                       full[i].origin_week == trunc[i].origin_week;
            identical += same ? 1 : 0;
        }
    }
    CriterionResult r;
    r.pass = identical == checked;
    r.detail = std::to_string(identical) + "/" + std::to_string(checked) +
               " origin-family pairs bit-identical under truncation";
    return r;
}

// ---------------------------------------------------------------------------
// 10. Determinism: every CLI command rerun with identical config and seed
//     produces byte-identical output files.

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = g_cli_path + " " + args + " 2>/dev/null";
    return WEXITSTATUS(std::system(cmd.c_str()));
}

CriterionResult criterion_10() {
    const fs::path base = fs::temp_directory_path() / "flutrack_acceptance_10";
    fs::remove_all(base);
    fs::create_directories(base);

    const fs::path out1 = base / "run1";
    const fs::path out2 = base / "run2";
    std::ostringstream cfg;
    cfg << "seed = 4242\n"
        << "synth_states = 3\n"
        << "synth_cells_per_state = 5\n"
        << "synth_weeks = 160\n"
        << "synth_queries_per_day = 120\n"
        << "synth_state_counts = 0\n"
        << "models = sarima_hist,sarima_mrp,lasso_hist,lasso_a1\n"
        << "sarima_p = 0,1\nsarima_d = 0,1\nsarima_q = 0,1\n"
        << "sarima_P = 0,1\nsarima_D = 0\nsarima_Q = 0\n"
        << "sarima_restarts = 1\nlasso_ladder = 10\n"
        << "expand_k = 10\nemb_dim = 12\nemb_epochs = 2\n"
        << "n_draws = 2000\n";
    const std::string shared = cfg.str();

    auto pipeline = [&](const fs::path& out) -> bool {
        const fs::path cfg_path = base / (out.filename().string() + ".cfg");
        std::ostringstream full;
        full << shared << "out = " << out.string() << "\n"
             << "queries = " << (out / "queries.csv").string() << "\n"
             << "rules = " << (out / "rules.tsv").string() << "\n"
             << "cells = " << (out / "cells.csv").string() << "\n"
             << "zipmap = " << (out / "zipmap.csv").string() << "\n"
             << "ili = " << (out / "ili.csv").string() << "\n"
             << "casecontrol = " << (out / "casecontrol.csv").string() << "\n"
             << "mrp_signal = " << (out / "mrp_signal.csv").string() << "\n"
             << "a1_panel = " << (out / "a1_panel.csv").string() << "\n"
             << "forecasts = " << (out / "forecasts.csv").string() << "\n";
        {
            std::ofstream f(cfg_path);
            f << full.str();
        }
        const std::string c = "--config " + cfg_path.string();
        for (const char* sub : {"synth", "label", "expand", "casecontrol", "mrp", "backtest", "report"})
            if (run_cli(std::string(sub) + " " + c) != 0) return false;
        return true;
    };

    CriterionResult r;
    if (!pipeline(out1) || !pipeline(out2)) {
        r.detail = "a CLI command failed";
        return r;
    }
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(out1)) {
        const fs::path other = out2 / entry.path().filename();
        if (!fs::exists(other)) {
            r.detail = "missing on rerun: " + entry.path().filename().string();
            return r;
        }
        if (slurp(entry.path()) != slurp(other)) {
            r.detail = "differs between reruns: " + entry.path().filename().string();
            return r;
        }
        ++compared;
    }
    r.pass = compared > 0;
    r.detail = std::to_string(compared) + " output files byte-identical across reruns";
    return r;
}

struct Entry {
    int id;
    const char* name;
    double time_limit_s; // 0 = no stated limit
    Criterion run;
};

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
        else if (std::strcmp(argv[i], "--cli") == 0 && i + 1 < argc) g_cli_path = argv[++i];
    }

    const std::vector<Entry> criteria = {
        {1, "intercept-correction round trip", 1.0, criterion_1},
        {2, "case-control RR recovery and CI coverage", 60.0, criterion_2},
        {3, "logistic fit vs closed-form and Newton oracles", 0.0, criterion_3},
        {4, "poststratification brute-force oracle", 0.0, criterion_4},
        {5, "MRP shrinkage benefit under sparse sampling", 300.0, criterion_5},
        {6, "SARIMA AR and exogenous coefficient recovery", 0.0, criterion_6},
        {7, "LASSO KKT, OLS limit and lambda_max", 0.0, criterion_7},
        {8, "end-to-end MRP signal value in backtests", 1200.0, criterion_8},
        {9, "no-leakage truncation invariance", 0.0, criterion_9},
        {10, "CLI rerun determinism", 0.0, criterion_10},
    };

    bool all_pass = true;
    for (const auto& entry : criteria) {
        if (only != 0 && entry.id != only) continue;
        const auto t0 = std::chrono::steady_clock::now();
        CriterionResult result;
        try {
            result = entry.run();
        } catch (const std::exception& e) {
            result.pass = false;
            result.detail = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool pass = result.pass;
        std::string note = result.detail;
        if (pass && entry.time_limit_s > 0 && elapsed > entry.time_limit_s) {
            pass = false;
            note += " [exceeded " + format_double(entry.time_limit_s) + " s budget]";
        }
        std::printf("%s %2d %s (%.2fs) -- %s\n", pass ? "PASS" : "FAIL", entry.id, entry.name,
                    elapsed, note.c_str());
        std::fflush(stdout);
        all_pass &= pass;
    }
    return all_pass ? 0 : 1;
}
