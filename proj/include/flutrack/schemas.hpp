#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "flutrack/backtest.hpp"
#include "flutrack/casecontrol.hpp"
#include "flutrack/csv.hpp"
#include "flutrack/dates.hpp"
#include "flutrack/metrics.hpp"
#include "flutrack/mrp.hpp"
#include "flutrack/taxonomy.hpp"

namespace flutrack::io {

// Write-temp-then-rename so readers never observe partial files and failed
// runs leave no output behind.
inline void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw config_error("cannot write file: " + tmp);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw config_error("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

inline void expect_header(const CsvReader& reader, const CsvRecord& rec,
                          const std::vector<std::string>& expected) {
    if (rec.fields.size() < expected.size())
        throw config_error(reader.source_name() + ":1: expected header " +
                           [&] {
                               std::string h;
                               for (std::size_t i = 0; i < expected.size(); ++i)
                                   h += (i ? "," : "") + expected[i];
                               return h;
                           }());
    for (std::size_t i = 0; i < expected.size(); ++i)
        if (rec.fields[i] != expected[i])
            throw config_error(reader.source_name() + ":1: column " + std::to_string(i + 1) +
                               " must be '" + expected[i] + "', got '" + rec.fields[i] + "'");
}

// ---------------------------------------------------------------------------
// queries.csv: timestamp,zipcode,raw_text

inline std::vector<tax::QueryRecord> read_queries(const std::string& path) {
    CsvReader reader = CsvReader::from_file(path);
    CsvRecord rec;
    if (!reader.next(rec)) throw config_error(path + ": empty file");
    expect_header(reader, rec, {"timestamp", "zipcode", "raw_text"});
    std::vector<tax::QueryRecord> out;
    while (reader.next(rec)) {
        if (rec.fields.size() == 1 && rec.fields[0].empty()) continue; // trailing newline
        if (rec.fields.size() != 3) reader.fail(rec, rec.fields.size(), "expected 3 fields");
        tax::QueryRecord q;
        q.timestamp = parse_int_field(reader, rec, 0);
        q.zipcode = rec.fields[1];
        if (q.zipcode.size() != 5 ||
            q.zipcode.find_first_not_of("0123456789") != std::string::npos)
            reader.fail(rec, 1, "zipcode must be 5 digits, got '" + q.zipcode + "'");
        q.raw_text = rec.fields[2];
        q.normalized_text = tax::normalize(q.raw_text);
        out.push_back(std::move(q));
    }
    return out;
}

inline std::string write_queries(const std::vector<tax::QueryRecord>& queries) {
    std::string out = "timestamp,zipcode,raw_text\n";
    for (const auto& q : queries)
        csv_append_row(out, {std::to_string(q.timestamp), q.zipcode, q.raw_text});
    return out;
}

// labeled_queries.csv adds normalized_text and label.
inline std::string write_labeled_queries(const std::vector<tax::QueryRecord>& queries) {
    std::string out = "timestamp,zipcode,raw_text,normalized_text,label\n";
    for (const auto& q : queries)
        csv_append_row(out, {std::to_string(q.timestamp), q.zipcode, q.raw_text,
                             q.normalized_text, tax::to_string(q.label)});
    return out;
}

inline std::vector<tax::QueryRecord> read_labeled_queries(const std::string& path) {
    CsvReader reader = CsvReader::from_file(path);
    CsvRecord rec;
    if (!reader.next(rec)) throw config_error(path + ": empty file");
    expect_header(reader, rec, {"timestamp", "zipcode", "raw_text", "normalized_text", "label"});
    std::vector<tax::QueryRecord> out;
    while (reader.next(rec)) {
        if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;
        if (rec.fields.size() != 5) reader.fail(rec, rec.fields.size(), "expected 5 fields");
        tax::QueryRecord q;
        q.timestamp = parse_int_field(reader, rec, 0);
        q.zipcode = rec.fields[1];
        q.raw_text = rec.fields[2];
        q.normalized_text = rec.fields[3];
        if (!tax::parse_label(rec.fields[4], q.label))
            reader.fail(rec, 4, "unknown label '" + rec.fields[4] + "'");
        out.push_back(std::move(q));
    }
    return out;
}

// ---------------------------------------------------------------------------
// cells.csv: state,edu_q,age_band,child_q,n_zip,mean_income

inline mrp::CensusTable read_cells(const std::string& path) {
    CsvReader reader = CsvReader::from_file(path);
    CsvRecord rec;
    if (!reader.next(rec)) throw config_error(path + ": empty file");
    expect_header(reader, rec, {"state", "edu_q", "age_band", "child_q", "n_zip", "mean_income"});
    std::vector<mrp::CensusCell> cells;
    while (reader.next(rec)) {
        if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;
        if (rec.fields.size() != 6) reader.fail(rec, rec.fields.size(), "expected 6 fields");
        mrp::CensusCell c;
        c.key.state = rec.fields[0];
        if (c.key.state.size() != 2) reader.fail(rec, 0, "state must be a 2-letter code");
        c.key.edu_q = static_cast<int>(parse_int_field(reader, rec, 1));
        if (c.key.edu_q < 1 || c.key.edu_q > 4) reader.fail(rec, 1, "edu_q must be 1..4");
        c.key.age_band = rec.fields[2];
        c.key.child_q = static_cast<int>(parse_int_field(reader, rec, 3));
        if (c.key.child_q < 1 || c.key.child_q > 4) reader.fail(rec, 3, "child_q must be 1..4");
        c.n_zip = parse_double_field(reader, rec, 4);
        if (c.n_zip < 0) reader.fail(rec, 4, "n_zip must be >= 0");
        c.mean_income = parse_double_field(reader, rec, 5);
        cells.push_back(std::move(c));
    }
    return mrp::CensusTable(std::move(cells));
}

inline std::string write_cells(const mrp::CensusTable& census) {
    std::string out = "state,edu_q,age_band,child_q,n_zip,mean_income\n";
    for (const auto& c : census.cells())
        csv_append_row(out, {c.key.state, std::to_string(c.key.edu_q), c.key.age_band,
                             std::to_string(c.key.child_q), format_double(c.n_zip),
                             format_double(c.mean_income)});
    return out;
}

// zipmap.csv: zipcode,state,edu_q,age_band,child_q

inline mrp::Zipmap read_zipmap(const std::string& path) {
    CsvReader reader = CsvReader::from_file(path);
    CsvRecord rec;
    if (!reader.next(rec)) throw config_error(path + ": empty file");
    expect_header(reader, rec, {"zipcode", "state", "edu_q", "age_band", "child_q"});
    mrp::Zipmap out;
    while (reader.next(rec)) {
        if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;
        if (rec.fields.size() != 5) reader.fail(rec, rec.fields.size(), "expected 5 fields");
        mrp::CellKey key;
        key.state = rec.fields[1];
        key.edu_q = static_cast<int>(parse_int_field(reader, rec, 2));
        key.age_band = rec.fields[3];
        key.child_q = static_cast<int>(parse_int_field(reader, rec, 4));
        if (!out.emplace(rec.fields[0], key).second)
            reader.fail(rec, 0, "duplicate zipcode '" + rec.fields[0] + "'");
    }
    return out;
}

inline std::string write_zipmap(const mrp::Zipmap& zipmap) {
    std::string out = "zipcode,state,edu_q,age_band,child_q\n";
    for (const auto& [zip, key] : zipmap)
        csv_append_row(out, {zip, key.state, std::to_string(key.edu_q), key.age_band,
                             std::to_string(key.child_q)});
    return out;
}

// ---------------------------------------------------------------------------
// census.csv (raw zipcode rows): zipcode,state,edu_value,age_band,child_value,mean_income
// Quartile sources are binned nationally (right-closed; boundary values fall
// into the lower quartile); the age band is the zipcode's modal band,
// supplied directly.

struct RawCensusRow {
    std::string zipcode, state, age_band;
    double edu_value = 0.0, child_value = 0.0, mean_income = 0.0;
};

inline std::vector<RawCensusRow> read_raw_census(const std::string& path) {
    CsvReader reader = CsvReader::from_file(path);
    CsvRecord rec;
    if (!reader.next(rec)) throw config_error(path + ": empty file");
    expect_header(reader, rec,
                  {"zipcode", "state", "edu_value", "age_band", "child_value", "mean_income"});
    std::vector<RawCensusRow> out;
    while (reader.next(rec)) {
        if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;
        if (rec.fields.size() != 6) reader.fail(rec, rec.fields.size(), "expected 6 fields");
        RawCensusRow r;
        r.zipcode = rec.fields[0];
        r.state = rec.fields[1];
        r.edu_value = parse_double_field(reader, rec, 2);
        r.age_band = rec.fields[3];
        r.child_value = parse_double_field(reader, rec, 4);
        r.mean_income = parse_double_field(reader, rec, 5);
        out.push_back(std::move(r));
    }
    return out;
}

// National quartile bin (1..4), right-closed: values at a boundary fall into
// the lower quartile.
inline int quartile_bin(double v, const std::vector<double>& sorted) {
    const std::size_t n = sorted.size();
    auto q = [&](double frac) {
        const double h = frac * static_cast<double>(n - 1);
        const std::size_t lo = static_cast<std::size_t>(h);
        if (lo + 1 >= n) return sorted.back();
        return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
    };
    if (v <= q(0.25)) return 1;
    if (v <= q(0.50)) return 2;
    if (v <= q(0.75)) return 3;
    return 4;
}

struct BinnedCensus {
    mrp::CensusTable census;
    mrp::Zipmap zipmap;
};

inline BinnedCensus bin_census(const std::vector<RawCensusRow>& rows) {
    if (rows.empty()) throw config_error("census: no zipcode rows");
    std::vector<double> edu, child;
    for (const auto& r : rows) {
        edu.push_back(r.edu_value);
        child.push_back(r.child_value);
    }
    std::sort(edu.begin(), edu.end());
    std::sort(child.begin(), child.end());

    struct Agg {
        double n = 0.0;
        double income_sum = 0.0;
    };
    std::map<mrp::CellKey, Agg> agg;
    mrp::Zipmap zipmap;
    for (const auto& r : rows) {
        mrp::CellKey key;
        key.state = r.state;
        key.edu_q = quartile_bin(r.edu_value, edu);
        key.age_band = r.age_band;
        key.child_q = quartile_bin(r.child_value, child);
        auto& a = agg[key];
        a.n += 1.0;
        a.income_sum += r.mean_income;
        if (!zipmap.emplace(r.zipcode, key).second)
            throw config_error("census: duplicate zipcode '" + r.zipcode + "'");
    }
    std::vector<mrp::CensusCell> cells;
    for (const auto& [key, a] : agg)
        cells.push_back(mrp::CensusCell{key, a.n, a.income_sum / a.n});
    return BinnedCensus{mrp::CensusTable(std::move(cells)), std::move(zipmap)};
}

// ---------------------------------------------------------------------------
// ili.csv: week_start,value,geo,mode   (mode: rate | count)

inline std::vector<ts::IliSeries> read_ili(const std::string& path) {
    CsvReader reader = CsvReader::from_file(path);
    CsvRecord rec;
    if (!reader.next(rec)) throw config_error(path + ": empty file");
    expect_header(reader, rec, {"week_start", "value", "geo", "mode"});
    std::map<std::string, ts::IliSeries> by_geo;
    std::vector<std::string> order;
    while (reader.next(rec)) {
        if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;
        if (rec.fields.size() != 4) reader.fail(rec, rec.fields.size(), "expected 4 fields");
        const std::string& geo = rec.fields[2];
        auto it = by_geo.find(geo);
        if (it == by_geo.end()) {
            it = by_geo.emplace(geo, ts::IliSeries{}).first;
            it->second.geo = geo;
            order.push_back(geo);
        }
        ts::IliSeries& s = it->second;
        const std::string& mode = rec.fields[3];
        if (mode != "rate" && mode != "count") reader.fail(rec, 3, "mode must be rate or count");
        const bool count = mode == "count";
        if (!s.week_starts.empty() && count != s.count_mode)
            reader.fail(rec, 3, "mode changes mid-series for geo '" + geo + "'");
        s.count_mode = count;
        std::int64_t day;
        try {
            day = parse_date(rec.fields[0]);
        } catch (const config_error& e) {
            reader.fail(rec, 0, e.what());
        }
        s.week_starts.push_back(day);
        s.values.push_back(parse_double_field(reader, rec, 1));
    }
    std::vector<ts::IliSeries> out;
    for (const auto& geo : order) {
        by_geo[geo].validate();
        out.push_back(std::move(by_geo[geo]));
    }
    if (out.empty()) throw config_error(path + ": no data rows");
    return out;
}

inline std::string write_ili(const std::vector<ts::IliSeries>& series) {
    std::string out = "week_start,value,geo,mode\n";
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.week_starts.size(); ++i)
            csv_append_row(out, {format_date(s.week_starts[i]), format_double(s.values[i]), s.geo,
                                 s.count_mode ? "count" : "rate"});
    return out;
}

// ---------------------------------------------------------------------------
// a1_panel.csv: week_start,query,count,denominator

inline ts::A1Panel read_a1_panel(const std::string& path) {
    CsvReader reader = CsvReader::from_file(path);
    CsvRecord rec;
    if (!reader.next(rec)) throw config_error(path + ": empty file");
    expect_header(reader, rec, {"week_start", "query", "count", "denominator"});
    std::map<std::int64_t, double> denoms;
    std::map<std::string, std::map<std::int64_t, double>> counts;
    while (reader.next(rec)) {
        if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;
        if (rec.fields.size() != 4) reader.fail(rec, rec.fields.size(), "expected 4 fields");
        std::int64_t day;
        try {
            day = parse_date(rec.fields[0]);
        } catch (const config_error& e) {
            reader.fail(rec, 0, e.what());
        }
        counts[rec.fields[1]][day] = parse_double_field(reader, rec, 2);
        denoms[day] = parse_double_field(reader, rec, 3);
    }
    if (denoms.empty()) throw config_error(path + ": no data rows");
    ts::A1Panel panel;
    for (const auto& [day, d] : denoms) panel.week_starts.push_back(day);
    panel.denominators.reserve(denoms.size());
    for (const auto& [day, d] : denoms) panel.denominators.push_back(d);
    for (const auto& [q, series] : counts) panel.queries.push_back(q);
    panel.counts.assign(panel.queries.size(), std::vector<double>(panel.week_starts.size(), 0.0));
    for (std::size_t qi = 0; qi < panel.queries.size(); ++qi) {
        const auto& series = counts[panel.queries[qi]];
        for (std::size_t wi = 0; wi < panel.week_starts.size(); ++wi) {
            const auto it = series.find(panel.week_starts[wi]);
            if (it != series.end()) panel.counts[qi][wi] = it->second;
        }
    }
    return panel;
}

inline std::string write_a1_panel(const ts::A1Panel& panel) {
    // Zero counts are written too: a week's denominator matters even when a
    // query was silent.
    std::string out = "week_start,query,count,denominator\n";
    for (std::size_t qi = 0; qi < panel.queries.size(); ++qi)
        for (std::size_t wi = 0; wi < panel.week_starts.size(); ++wi)
            csv_append_row(out, {format_date(panel.week_starts[wi]), panel.queries[qi],
                                 format_double(panel.counts[qi][wi]),
                                 format_double(panel.denominators[wi])});
    return out;
}

// Builds the weekly A1 panel from a labeled stream: counts per distinct A1
// text, denominators = all queries that week.
inline ts::A1Panel build_a1_panel(const std::vector<tax::QueryRecord>& queries) {
    std::map<std::int64_t, double> denoms;
    std::map<std::string, std::map<std::int64_t, double>> counts;
    for (const auto& q : queries) {
        const std::int64_t ws = sunday_on_or_before(day_from_timestamp(q.timestamp));
        denoms[ws] += 1.0;
        if (q.label == tax::Label::A1) counts[q.normalized_text][ws] += 1.0;
    }
    ts::A1Panel panel;
    for (const auto& [day, d] : denoms) {
        panel.week_starts.push_back(day);
        panel.denominators.push_back(d);
    }
    for (const auto& [q, series] : counts) panel.queries.push_back(q);
    panel.counts.assign(panel.queries.size(), std::vector<double>(panel.week_starts.size(), 0.0));
    for (std::size_t qi = 0; qi < panel.queries.size(); ++qi) {
        const auto& series = counts[panel.queries[qi]];
        for (std::size_t wi = 0; wi < panel.week_starts.size(); ++wi) {
            const auto it = series.find(panel.week_starts[wi]);
            if (it != series.end()) panel.counts[qi][wi] = it->second;
        }
    }
    return panel;
}

// Restricts/aligns a panel to a weekly grid (missing weeks get denominator 0).
inline ts::A1Panel align_panel(const ts::A1Panel& panel, const std::vector<std::int64_t>& weeks) {
    ts::A1Panel out;
    out.week_starts = weeks;
    out.queries = panel.queries;
    out.denominators.assign(weeks.size(), 0.0);
    out.counts.assign(panel.queries.size(), std::vector<double>(weeks.size(), 0.0));
    std::map<std::int64_t, std::size_t> index;
    for (std::size_t i = 0; i < panel.week_starts.size(); ++i) index[panel.week_starts[i]] = i;
    for (std::size_t wi = 0; wi < weeks.size(); ++wi) {
        const auto it = index.find(weeks[wi]);
        if (it == index.end()) continue;
        out.denominators[wi] = panel.denominators[it->second];
        for (std::size_t qi = 0; qi < panel.queries.size(); ++qi)
            out.counts[qi][wi] = panel.counts[qi][it->second];
    }
    return out;
}

// ---------------------------------------------------------------------------
// mrp_signal.csv: date,scope,estimate,n_flagged,partial_flag

inline std::string write_mrp_signal(const mrp::DailySignal& sig) {
    std::string out = "date,scope,estimate,n_flagged,partial_flag\n";
    for (std::size_t s = 0; s < sig.scopes.size(); ++s)
        for (std::size_t i = 0; i < sig.days.size(); ++i) {
            const double v = sig.estimates[s][i];
            csv_append_row(out, {format_date(sig.days[i]), sig.scopes[s],
                                 is_missing(v) ? "" : format_double(v),
                                 std::to_string(sig.n_flagged[i]), sig.partial[i] ? "1" : "0"});
        }
    return out;
}

struct MrpSignalFile {
    // scope -> (day -> estimate); missing estimates skipped
    std::map<std::string, std::map<std::int64_t, double>> by_scope;
};

inline MrpSignalFile read_mrp_signal(const std::string& path) {
    CsvReader reader = CsvReader::from_file(path);
    CsvRecord rec;
    if (!reader.next(rec)) throw config_error(path + ": empty file");
    expect_header(reader, rec, {"date", "scope", "estimate", "n_flagged", "partial_flag"});
    MrpSignalFile out;
    while (reader.next(rec)) {
        if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;
        if (rec.fields.size() != 5) reader.fail(rec, rec.fields.size(), "expected 5 fields");
        if (rec.fields[2].empty()) continue;
        std::int64_t day;
        try {
            day = parse_date(rec.fields[0]);
        } catch (const config_error& e) {
            reader.fail(rec, 0, e.what());
        }
        out.by_scope[rec.fields[1]][day] = parse_double_field(reader, rec, 2);
    }
    return out;
}

// ---------------------------------------------------------------------------
// forecasts.csv: origin_week,horizon,model,geo,forecast,actual

inline std::string write_forecasts(std::vector<eval::ForecastRow> rows) {
    std::sort(rows.begin(), rows.end(), [](const eval::ForecastRow& a, const eval::ForecastRow& b) {
        return std::tie(a.geo, a.model, a.origin_week, a.horizon) <
               std::tie(b.geo, b.model, b.origin_week, b.horizon);
    });
    std::string out = "origin_week,horizon,model,geo,forecast,actual\n";
    for (const auto& r : rows)
        csv_append_row(out, {format_date(r.origin_week), std::to_string(r.horizon), r.model, r.geo,
                             format_double(r.forecast), format_double(r.actual)});
    return out;
}

inline std::vector<eval::ForecastRow> read_forecasts(const std::string& path) {
    CsvReader reader = CsvReader::from_file(path);
    CsvRecord rec;
    if (!reader.next(rec)) throw config_error(path + ": empty file");
    expect_header(reader, rec, {"origin_week", "horizon", "model", "geo", "forecast", "actual"});
    std::vector<eval::ForecastRow> out;
    while (reader.next(rec)) {
        if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;
        if (rec.fields.size() != 6) reader.fail(rec, rec.fields.size(), "expected 6 fields");
        eval::ForecastRow r;
        try {
            r.origin_week = parse_date(rec.fields[0]);
        } catch (const config_error& e) {
            reader.fail(rec, 0, e.what());
        }
        r.horizon = static_cast<int>(parse_int_field(reader, rec, 1));
        r.model = rec.fields[2];
        r.geo = rec.fields[3];
        r.forecast = parse_double_field(reader, rec, 4);
        r.actual = parse_double_field(reader, rec, 5);
        out.push_back(std::move(r));
    }
    if (out.empty()) throw config_error(path + ": no forecasts");
    return out;
}

// metrics.csv: model,geo,horizon,rmse,mape,mae,pearson,n

inline std::string write_metrics(const std::vector<eval::MetricRow>& rows) {
    std::string out = "model,geo,horizon,rmse,mape,mae,pearson,n\n";
    for (const auto& m : rows)
        csv_append_row(out, {m.model, m.geo, std::to_string(m.horizon), format_double(m.rmse),
                             format_double(m.mape), format_double(m.mae),
                             m.pearson ? format_double(*m.pearson) : "", std::to_string(m.n)});
    return out;
}

// ---------------------------------------------------------------------------
// casecontrol.csv: y,<covariate...>  (numeric, no missing values)

inline cc::CaseControlTable read_casecontrol(const std::string& path) {
    CsvReader reader = CsvReader::from_file(path);
    CsvRecord rec;
    if (!reader.next(rec)) throw config_error(path + ": empty file");
    if (rec.fields.empty() || rec.fields[0] != "y")
        throw config_error(path + ":1: first column must be 'y'");
    cc::CaseControlTable table;
    for (std::size_t i = 1; i < rec.fields.size(); ++i) {
        if (rec.fields[i].empty()) throw config_error(path + ":1: empty column name");
        table.columns.push_back(rec.fields[i]);
    }
    if (table.columns.empty()) throw config_error(path + ":1: no covariate columns");
    std::vector<std::vector<double>> rows;
    std::vector<double> ys;
    while (reader.next(rec)) {
        if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;
        if (rec.fields.size() != table.columns.size() + 1)
            reader.fail(rec, rec.fields.size(), "expected " +
                                                    std::to_string(table.columns.size() + 1) +
                                                    " fields");
        for (std::size_t i = 0; i < rec.fields.size(); ++i)
            if (rec.fields[i].empty()) reader.fail(rec, i, "missing value");
        const double y = parse_double_field(reader, rec, 0);
        if (y != 0.0 && y != 1.0) reader.fail(rec, 0, "y must be 0 or 1");
        ys.push_back(y);
        std::vector<double> row;
        for (std::size_t i = 1; i < rec.fields.size(); ++i)
            row.push_back(parse_double_field(reader, rec, i));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw config_error(path + ": no data rows");
    table.values.resize(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(table.columns.size()));
    table.y.resize(static_cast<Eigen::Index>(ys.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        table.y[static_cast<Eigen::Index>(i)] = ys[i];
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return table;
}

inline std::string write_casecontrol(const cc::CaseControlTable& table) {
    std::string out = "y";
    for (const auto& c : table.columns) out += "," + c;
    out += "\n";
    for (Eigen::Index i = 0; i < table.y.size(); ++i) {
        std::vector<std::string> fields{format_double(table.y[i])};
        for (Eigen::Index j = 0; j < table.values.cols(); ++j)
            fields.push_back(format_double(table.values(i, j)));
        csv_append_row(out, fields);
    }
    return out;
}

} // namespace flutrack::io
