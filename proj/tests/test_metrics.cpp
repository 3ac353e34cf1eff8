#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "flutrack/metrics.hpp"
#include "flutrack/rng.hpp"
#include "flutrack/svg.hpp"

using namespace flutrack;
using namespace flutrack::eval;

TEST_CASE("metric definitions on the worked examples") {
    SECTION("perfect forecasts are zero error, correlation guarded") {
        const std::vector<double> f{2, 2, 2}, a{2, 2, 2};
        REQUIRE(rmse(f, a) == 0.0);
        REQUIRE(mae(f, a) == 0.0);
        REQUIRE(mape(f, a) == 0.0);
        REQUIRE_THROWS_AS(pearson(f, a), numeric_error); // constant on both sides
    }
    SECTION("single pair") {
        REQUIRE(rmse({2}, {1}) == 1.0);
        REQUIRE(mae({2}, {1}) == 1.0);
        REQUIRE(mape({2}, {1}) == 100.0);
    }
    SECTION("hand-computed triple") {
        const std::vector<double> f{1, 2, 3}, a{2, 2, 2};
        REQUIRE(rmse(f, a) == Catch::Approx(std::sqrt(2.0 / 3.0)).margin(1e-12));
        REQUIRE(mae(f, a) == Catch::Approx(2.0 / 3.0).margin(1e-12));
        REQUIRE(mape(f, a) == Catch::Approx(100.0 / 3.0).margin(1e-12));
    }
    SECTION("zero actuals are excluded from MAPE and counted") {
        int excluded = 0;
        const double m = mape({1, 5, 3}, {1, 0, 2}, &excluded);
        REQUIRE(excluded == 1);
        REQUIRE(m == Catch::Approx(100.0 * (0.0 + 0.5) / 2.0).margin(1e-12));
        REQUIRE_THROWS_AS(mape({1, 2}, {0, 0}), numeric_error);
    }
    SECTION("length mismatches are rejected") {
        REQUIRE_THROWS_AS(rmse({1, 2}, {1}), std::invalid_argument);
        REQUIRE_THROWS_AS(mae({}, {}), std::invalid_argument);
    }
}

TEST_CASE("metric properties hold on random data") {
    Rng rng(3);
    for (int rep = 0; rep < 25; ++rep) {
        const int n = 3 + static_cast<int>(rng.below(40));
        std::vector<double> f(static_cast<std::size_t>(n)), a(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            f[static_cast<std::size_t>(i)] = rng.uniform(0.5, 10.0);
            a[static_cast<std::size_t>(i)] = rng.uniform(0.5, 10.0);
        }
        REQUIRE(rmse(f, a) >= mae(f, a) - 1e-12);

        // permutation invariance
        std::vector<std::size_t> perm(static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        for (std::size_t i = perm.size(); i > 1; --i)
            std::swap(perm[i - 1], perm[rng.below(i)]);
        std::vector<double> fp, ap;
        for (std::size_t i : perm) {
            fp.push_back(f[i]);
            ap.push_back(a[i]);
        }
        REQUIRE(rmse(fp, ap) == Catch::Approx(rmse(f, a)).margin(1e-12));
        REQUIRE(mae(fp, ap) == Catch::Approx(mae(f, a)).margin(1e-12));

        // Pearson affine invariance
        const double scale = rng.uniform(0.1, 5.0) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
        const double shift = rng.uniform(-3.0, 3.0);
        std::vector<double> f2 = f;
        for (double& v : f2) v = scale * v + shift;
        const double sign = scale > 0 ? 1.0 : -1.0;
        REQUIRE(pearson(f2, a) == Catch::Approx(sign * pearson(f, a)).margin(1e-12));
    }
}

namespace {

ForecastRow row(const std::string& model, std::int64_t week, int horizon, double fc, double ac,
                const std::string& geo = "US") {
    ForecastRow r;
    r.origin_week = week;
    r.horizon = horizon;
    r.model = model;
    r.geo = geo;
    r.forecast = fc;
    r.actual = ac;
    return r;
}

} // namespace

TEST_CASE("compare_report joins origins, flags winners and ties") {
    const std::int64_t w0 = sunday_on_or_before(days_from_civil(2016, 1, 10));
    SECTION("identical tables tie") {
        std::vector<ForecastRow> rows;
        for (int i = 0; i < 5; ++i) {
            rows.push_back(row("a", w0 + 7 * i, 1, 2.0 + i, 2.5 + i));
            rows.push_back(row("b", w0 + 7 * i, 1, 2.0 + i, 2.5 + i));
        }
        const auto report = compare_report(rows);
        REQUIRE(report.size() == 2);
        REQUIRE(report[0].winner);
        REQUIRE(report[1].winner);
        REQUIRE(report[0].tie);
        REQUIRE(report[0].rmse == report[1].rmse);
    }
    SECTION("a pointwise-dominated table loses on every metric") {
        std::vector<ForecastRow> rows;
        for (int i = 0; i < 6; ++i) {
            const double actual = 3.0 + i;
            rows.push_back(row("close", w0 + 7 * i, 1, actual + 0.1, actual));
            rows.push_back(row("far", w0 + 7 * i, 1, actual + 0.8, actual));
        }
        const auto report = compare_report(rows);
        const MetricRow* close_row = nullptr;
        const MetricRow* far_row = nullptr;
        for (const auto& m : report) {
            if (m.model == "close") close_row = &m;
            else far_row = &m;
        }
        REQUIRE(close_row->winner);
        REQUIRE_FALSE(far_row->winner);
        REQUIRE(close_row->rmse < far_row->rmse);
        REQUIRE(close_row->mae < far_row->mae);
        REQUIRE(close_row->mape < far_row->mape);
    }
    SECTION("only shared origins enter the join") {
        std::vector<ForecastRow> rows;
        for (int i = 0; i < 4; ++i) rows.push_back(row("a", w0 + 7 * i, 1, 1.0, 1.0));
        for (int i = 2; i < 6; ++i) rows.push_back(row("b", w0 + 7 * i, 1, 1.0, 1.0));
        const auto report = compare_report(rows);
        for (const auto& m : report) REQUIRE(m.n == 2);
    }
    SECTION("an empty join is an error") {
        std::vector<ForecastRow> rows{row("a", w0, 1, 1, 1), row("b", w0 + 7, 1, 1, 1)};
        REQUIRE_THROWS_AS(compare_report(rows), numeric_error);
        REQUIRE_THROWS_AS(compare_report({}), std::invalid_argument);
    }
}

TEST_CASE("pearson season filter follows MMWR weeks 40..20 by default") {
    // Build two years of weekly forecasts with a signal only in-season.
    const std::int64_t start = sunday_on_or_before(days_from_civil(2015, 7, 5));
    std::vector<ForecastRow> rows;
    Rng rng(9);
    for (int i = 0; i < 80; ++i) {
        const std::int64_t week = start + 7 * i;
        const double actual = rng.uniform(1.0, 3.0);
        rows.push_back(row("m", week, 1, actual + rng.normal(0.0, 0.05), actual));
    }
    CompareOptions opt;
    const auto with_filter = compare_report(rows, opt);
    opt.filter_pearson_to_season = false;
    const auto without = compare_report(rows, opt);
    REQUIRE(with_filter[0].pearson.has_value());
    REQUIRE(without[0].pearson.has_value());
    // fewer points in season; both should still correlate strongly
    REQUIRE(*with_filter[0].pearson > 0.9);
    REQUIRE(*without[0].pearson > 0.9);

    REQUIRE(in_season(days_from_civil(2016, 1, 10), CompareOptions{}));  // week 2
    REQUIRE(in_season(days_from_civil(2015, 11, 8), CompareOptions{}));  // week 45
    REQUIRE_FALSE(in_season(days_from_civil(2016, 6, 12), CompareOptions{})); // week 24
}

TEST_CASE("svg chart renders polylines for each series") {
    ChartSeries actual{"actual", {100, 107, 114}, {1.0, 2.0, 1.5}};
    ChartSeries model{"model", {100, 107, 114}, {1.1, kNaN, 1.4}};
    const std::string svg = render_line_chart("demo", {actual, model});
    REQUIRE(svg.find("<svg") == 0);
    REQUIRE(svg.find("demo") != std::string::npos);
    // the NaN splits the second series into two polylines; 1 + 2 = 3 total
    std::size_t count = 0, pos = 0;
    while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
        ++count;
        pos += 9;
    }
    REQUIRE(count == 3);
    REQUIRE(render_line_chart("empty", {}) == render_line_chart("empty", {}));
}
