#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "flutrack/lasso.hpp"
#include "flutrack/rng.hpp"

using namespace flutrack;
using namespace flutrack::ts;

namespace {

std::vector<double> simulate_lagged(int n, std::uint64_t seed) {
    // y_t = 0.5 y_{t-1} + 0.3 y_{t-52} + eps
    Rng rng(seed);
    std::vector<double> y(static_cast<std::size_t>(n), 0.0);
    for (int t = 0; t < n; ++t) {
        double v = rng.normal(0.0, 1.0);
        if (t >= 1) v += 0.5 * y[static_cast<std::size_t>(t - 1)];
        if (t >= 52) v += 0.3 * y[static_cast<std::size_t>(t - 52)];
        y[static_cast<std::size_t>(t)] = v;
    }
    return y;
}

} // namespace

TEST_CASE("lambda = 0 matches the normal-equations least squares oracle") {
    Rng rng(5);
    const int n = 220, p = 6;
    std::vector<double> y(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t)
        y[static_cast<std::size_t>(t)] =
            rng.normal(0.0, 1.0) + (t >= 1 ? 0.6 * y[static_cast<std::size_t>(t - 1)] : 0.0);
    const LassoFit fit = fit_lasso_ar(y, {}, p, 0.0);

    // OLS oracle on the same rows: y_t ~ 1 + y_{t-1..t-p}
    const int rows = n - p;
    Eigen::MatrixXd X(rows, p + 1);
    Eigen::VectorXd t_vec(rows);
    for (int r = 0; r < rows; ++r) {
        const int t = r + p;
        X(r, 0) = 1.0;
        for (int lag = 1; lag <= p; ++lag) X(r, lag) = y[static_cast<std::size_t>(t - lag)];
        t_vec(r) = y[static_cast<std::size_t>(t)];
    }
    const Eigen::VectorXd ols = (X.transpose() * X).ldlt().solve(X.transpose() * t_vec);
    REQUIRE(fit.intercept == Catch::Approx(ols[0]).margin(1e-6));
    for (int lag = 1; lag <= p; ++lag)
        REQUIRE(fit.lag_coefs[static_cast<std::size_t>(lag - 1)] ==
                Catch::Approx(ols[lag]).margin(1e-6));
}

TEST_CASE("lambda at or above lambda_max zeroes every penalized coefficient") {
    const auto y = simulate_lagged(200, 7);
    const double lmax = lasso_lambda_max(y, {}, 52);
    for (double lambda : {lmax, lmax * 1.5}) {
        const LassoFit fit = fit_lasso_ar(y, {}, 52, lambda);
        for (double c : fit.lag_coefs) REQUIRE(c == 0.0);
        REQUIRE(fit.active.empty());
    }
    // just below lambda_max at least one coefficient enters
    const LassoFit fit = fit_lasso_ar(y, {}, 52, lmax * 0.95);
    REQUIRE_FALSE(fit.active.empty());
}

TEST_CASE("KKT conditions hold on random fits") {
    Rng rng(11);
    for (int rep = 0; rep < 12; ++rep) {
        const auto y = simulate_lagged(180 + static_cast<int>(rng.below(80)),
                                       100 + static_cast<std::uint64_t>(rep));
        const double lmax = lasso_lambda_max(y, {}, 52);
        const double lambda = lmax * std::pow(10.0, -2.0 * rng.uniform());
        const LassoFit fit = fit_lasso_ar(y, {}, 52, lambda);
        REQUIRE(lasso_kkt_violation(y, {}, fit) < 1e-6);
    }
}

TEST_CASE("negative lambda is a domain error") {
    const auto y = simulate_lagged(120, 13);
    REQUIRE_THROWS_AS(fit_lasso_ar(y, {}, 52, -0.1), std::invalid_argument);
}

TEST_CASE("true lags 1 and 52 are found at the validation-selected penalty") {
    const int reps = 20;
    int ok = 0;
    for (int rep = 0; rep < reps; ++rep) {
        const auto y = simulate_lagged(400, 500 + static_cast<std::uint64_t>(rep));
        const double lmax = lasso_lambda_max(y, {}, 52);
        const auto ladder = lambda_ladder(lmax, 12, 1e-4);
        const double lambda = select_lambda(y, {}, 52, ladder);
        const LassoFit fit = fit_lasso_ar(y, {}, 52, lambda);
        const bool has1 = fit.lag_coefs[0] != 0.0;
        const bool has52 = fit.lag_coefs[51] != 0.0;
        if (has1 && has52 && fit.active.size() <= 6) ++ok;
    }
    INFO("recovered {1,52} with a small active set in " << ok << "/" << reps);
    REQUIRE(ok >= 16);
}

TEST_CASE("select_lambda shrinks hard on pure noise") {
    const int reps = 20;
    int ok = 0;
    for (int rep = 0; rep < reps; ++rep) {
        Rng rng(900 + static_cast<std::uint64_t>(rep));
        std::vector<double> y(260);
        for (double& v : y) v = rng.normal(0.0, 1.0);
        const double lmax = lasso_lambda_max(y, {}, 52);
        const auto ladder = lambda_ladder(lmax, 12, 1e-4);
        const double lambda = select_lambda(y, {}, 52, ladder);
        // top half of a descending ladder = heavier shrinkage
        if (lambda >= ladder[ladder.size() / 2 - 1]) ++ok;
    }
    INFO("selected a top-half penalty in " << ok << "/" << reps);
    REQUIRE(ok >= 16);
}

TEST_CASE("select_lambda admits lag 1 for a strongly autoregressive target") {
    Rng rng(17);
    std::vector<double> y(300);
    double prev = 0.0;
    for (double& v : y) {
        v = 0.9 * prev + rng.normal(0.0, 0.3);
        prev = v;
    }
    const double lmax = lasso_lambda_max(y, {}, 52);
    const auto ladder = lambda_ladder(lmax, 12, 1e-4);
    const double lambda = select_lambda(y, {}, 52, ladder);
    const LassoFit fit = fit_lasso_ar(y, {}, 52, lambda);
    REQUIRE(fit.lag_coefs[0] != 0.0);
}

TEST_CASE("single-candidate ladders are returned unchanged") {
    const auto y = simulate_lagged(120, 23);
    REQUIRE(select_lambda(y, {}, 52, {0.37}) == 0.37);
    REQUIRE(lambda_ladder(2.0, 1, 1e-4) == std::vector<double>{2.0});
    const auto ladder = lambda_ladder(2.0, 12, 1e-4);
    REQUIRE(ladder.size() == 12);
    REQUIRE(ladder.front() == Catch::Approx(2.0));
    REQUIRE(ladder.back() == Catch::Approx(2.0e-4));
    REQUIRE_THROWS_AS(select_lambda(y, {}, 52, {}), std::invalid_argument);
}

TEST_CASE("recursive forecasts reuse their own predictions for lag 1") {
    const auto y = simulate_lagged(200, 29);
    const LassoFit fit = fit_lasso_ar(y, {}, 52, 0.01);
    const auto fc = forecast_lasso(fit, y, {}, 2, false);

    double pred1 = fit.intercept;
    for (int lag = 1; lag <= fit.p; ++lag)
        pred1 += fit.lag_coefs[static_cast<std::size_t>(lag - 1)] * y[y.size() - static_cast<std::size_t>(lag)];
    REQUIRE(fc[0] == Catch::Approx(pred1).margin(1e-12));

    std::vector<double> extended = y;
    extended.push_back(fc[0]);
    double pred2 = fit.intercept;
    for (int lag = 1; lag <= fit.p; ++lag)
        pred2 += fit.lag_coefs[static_cast<std::size_t>(lag - 1)] *
                 extended[extended.size() - static_cast<std::size_t>(lag)];
    REQUIRE(fc[1] == Catch::Approx(pred2).margin(1e-12));
}

TEST_CASE("exogenous columns join the design and the forecast") {
    Rng rng(33);
    const int n = 260;
    std::vector<double> x(static_cast<std::size_t>(n));
    for (double& v : x) v = rng.normal(0.0, 1.0);
    std::vector<double> y(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
        y[static_cast<std::size_t>(t)] = 1.2 * x[static_cast<std::size_t>(t)] + rng.normal(0.0, 0.2) +
                                         (t >= 1 ? 0.3 * y[static_cast<std::size_t>(t - 1)] : 0.0);
    }
    const LassoFit fit = fit_lasso_ar(y, {x}, 52, 0.005);
    REQUIRE(fit.exog_coefs.size() == 1);
    REQUIRE(fit.exog_coefs[0] > 0.8);

    const std::vector<std::vector<double>> future{{0.5}, {-0.5}};
    const auto fc = forecast_lasso(fit, y, future, 2, false);
    REQUIRE(fc.size() == 2);
    REQUIRE_THROWS_AS(forecast_lasso(fit, y, {}, 1, false), std::invalid_argument);
}
