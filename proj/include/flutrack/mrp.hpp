#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flutrack/common.hpp"
#include "flutrack/dates.hpp"
#include "flutrack/parallel.hpp"
#include "flutrack/taxonomy.hpp"

namespace flutrack::mrp {

// One poststratification cell: state x education quartile x age band x
// children-per-household quartile.
struct CellKey {
    std::string state;    // 2-letter code
    int edu_q = 0;        // 1..4
    std::string age_band; // e.g. "30-44"
    int child_q = 0;      // 1..4

    auto tie() const { return std::tie(state, edu_q, age_band, child_q); }
    bool operator==(const CellKey& o) const { return tie() == o.tie(); }
    bool operator<(const CellKey& o) const { return tie() < o.tie(); }
};

struct CensusCell {
    CellKey key;
    double n_zip = 0.0; // zipcodes in the cell; the poststratification weight
    double mean_income = 0.0;
};

// Immutable cell universe. Level lists and the cell order are sorted so that
// coefficient indexing is reproducible.
class CensusTable {
public:
    explicit CensusTable(std::vector<CensusCell> cells) : cells_(std::move(cells)) {
        if (cells_.empty()) throw config_error("census table has no cells");
        std::sort(cells_.begin(), cells_.end(),
                  [](const CensusCell& a, const CensusCell& b) { return a.key < b.key; });
        for (std::size_t i = 0; i < cells_.size(); ++i) {
            if (i > 0 && cells_[i].key == cells_[i - 1].key)
                throw config_error("duplicate census cell: " + cells_[i].key.state);
            if (cells_[i].n_zip < 0)
                throw config_error("census cell with negative zipcode count");
            index_[cells_[i].key] = i;
            add_level(states_, cells_[i].key.state);
            add_level(edu_levels_, cells_[i].key.edu_q);
            add_level(age_bands_, cells_[i].key.age_band);
            add_level(child_levels_, cells_[i].key.child_q);
            add_level(eduage_levels_, std::make_pair(cells_[i].key.edu_q, cells_[i].key.age_band));
        }
        // Standardized cell income (mean 0, sd 1 across cells).
        double mean = 0.0;
        for (const auto& c : cells_) mean += c.mean_income;
        mean /= static_cast<double>(cells_.size());
        double var = 0.0;
        for (const auto& c : cells_) var += square(c.mean_income - mean);
        var /= static_cast<double>(cells_.size());
        const double sd = std::sqrt(var);
        income_std_.resize(cells_.size());
        for (std::size_t i = 0; i < cells_.size(); ++i)
            income_std_[i] = sd > 0.0 ? (cells_[i].mean_income - mean) / sd : 0.0;
    }

    const std::vector<CensusCell>& cells() const { return cells_; }
    double income_std(std::size_t cell) const { return income_std_[cell]; }

    std::optional<std::size_t> find(const CellKey& key) const {
        const auto it = index_.find(key);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const std::vector<std::string>& states() const { return states_; }
    const std::vector<int>& edu_levels() const { return edu_levels_; }
    const std::vector<std::string>& age_bands() const { return age_bands_; }
    const std::vector<int>& child_levels() const { return child_levels_; }
    const std::vector<std::pair<int, std::string>>& eduage_levels() const { return eduage_levels_; }

    std::size_t level_of_state(const std::string& s) const { return level_index(states_, s); }
    std::size_t level_of_edu(int e) const { return level_index(edu_levels_, e); }
    std::size_t level_of_age(const std::string& a) const { return level_index(age_bands_, a); }
    std::size_t level_of_child(int c) const { return level_index(child_levels_, c); }
    std::size_t level_of_eduage(int e, const std::string& a) const {
        return level_index(eduage_levels_, std::make_pair(e, a));
    }

private:
    template <typename T, typename U>
    static void add_level(std::vector<T>& levels, const U& v) {
        const auto it = std::lower_bound(levels.begin(), levels.end(), v);
        if (it == levels.end() || *it != v) levels.insert(it, v);
    }
    template <typename T, typename U>
    static std::size_t level_index(const std::vector<T>& levels, const U& v) {
        const auto it = std::lower_bound(levels.begin(), levels.end(), v);
        if (it == levels.end() || *it != v)
            throw numeric_error("census level lookup failed");
        return static_cast<std::size_t>(it - levels.begin());
    }

    std::vector<CensusCell> cells_;
    std::map<CellKey, std::size_t> index_;
    std::vector<double> income_std_;
    std::vector<std::string> states_;
    std::vector<int> edu_levels_;
    std::vector<std::string> age_bands_;
    std::vector<int> child_levels_;
    std::vector<std::pair<int, std::string>> eduage_levels_;
};

using Zipmap = std::map<std::string, CellKey>;

// Per-cell flu-candidate counts pooled over one rolling window. The window
// normally spans 3 consecutive days; the first days of a stream carry
// shorter, flagged partial windows.
struct WindowDataset {
    std::int64_t end_day = 0;
    int span_days = 0;
    bool partial = false;
    std::vector<std::tuple<std::size_t, std::int64_t, std::int64_t>> cells; // (cell, n_flagged, n_a1)

    std::int64_t total_flagged() const {
        std::int64_t t = 0;
        for (const auto& [c, nf, na] : cells) t += nf;
        return t;
    }
};

struct WindowBuild {
    std::vector<WindowDataset> windows; // one per calendar day, ascending
    std::int64_t dropped_unmapped = 0;  // queries in zipcodes the map does not cover
};

// Aggregates labeled queries into one dataset per calendar day, pooling the
// trailing `window_days` days. Denominator: flu-candidate queries (label !=
// NON_ILI); numerator: A1 labels.
inline WindowBuild build_windows(const std::vector<tax::QueryRecord>& queries,
                                 const Zipmap& zipmap, const CensusTable& census,
                                 int window_days = 3) {
    if (window_days < 1) throw std::invalid_argument("build_windows: window_days must be >= 1");
    WindowBuild out;
    if (queries.empty()) return out;

    struct Counts {
        std::int64_t flagged = 0;
        std::int64_t a1 = 0;
    };
    std::map<std::int64_t, std::map<std::size_t, Counts>> daily;
    std::int64_t min_day = std::numeric_limits<std::int64_t>::max();
    std::int64_t max_day = std::numeric_limits<std::int64_t>::min();
    for (const auto& q : queries) {
        const std::int64_t day = day_from_timestamp(q.timestamp);
        min_day = std::min(min_day, day);
        max_day = std::max(max_day, day);
        if (!tax::is_flagged(q.label)) continue;
        const auto zit = zipmap.find(q.zipcode);
        if (zit == zipmap.end()) {
            ++out.dropped_unmapped;
            continue;
        }
        const auto cell = census.find(zit->second);
        if (!cell) {
            ++out.dropped_unmapped;
            continue;
        }
        auto& c = daily[day][*cell];
        ++c.flagged;
        if (q.label == tax::Label::A1) ++c.a1;
    }

    for (std::int64_t d = min_day; d <= max_day; ++d) {
        WindowDataset w;
        w.end_day = d;
        w.span_days = static_cast<int>(std::min<std::int64_t>(window_days, d - min_day + 1));
        w.partial = w.span_days < window_days;
        std::map<std::size_t, Counts> merged;
        for (std::int64_t back = 0; back < w.span_days; ++back) {
            const auto it = daily.find(d - back);
            if (it == daily.end()) continue;
            for (const auto& [cell, c] : it->second) {
                merged[cell].flagged += c.flagged;
                merged[cell].a1 += c.a1;
            }
        }
        for (const auto& [cell, c] : merged) w.cells.emplace_back(cell, c.flagged, c.a1);
        out.windows.push_back(std::move(w));
    }
    return out;
}

// Hierarchical logistic fit for one window: fixed intercept and income slope,
// varying intercepts for state, education, age, children-per-household and
// education x age, each with its own variance.
struct MrpFit {
    double beta0 = 0.0;
    double beta_income = 0.0;
    std::vector<double> alpha_state, alpha_edu, alpha_age, alpha_child, alpha_eduage;
    double sigma2_state = 0.0, sigma2_edu = 0.0, sigma2_age = 0.0, sigma2_child = 0.0,
           sigma2_eduage = 0.0;
    int outer_iterations = 0;
    bool converged = false;
};

struct MrpOptions {
    int max_outer = 200;
    int max_inner = 100;
    double outer_tol = 1e-6;
    double sigma2_floor = 1e-8;
    double sigma2_init = 0.25;
    // Fixing a group's variance (e.g. near 0) pins its effects; used to test
    // the collapse-to-pooled-model limit.
    std::optional<double> fix_sigma2_state, fix_sigma2_edu, fix_sigma2_age, fix_sigma2_child,
        fix_sigma2_eduage;
};

namespace detail {

struct GroupLayout {
    // Coefficient vector: [0]=intercept, [1]=income, then one block per group.
    std::size_t offsets[5];
    std::size_t sizes[5];
    std::size_t total = 0;
};

inline GroupLayout make_layout(const CensusTable& census) {
    GroupLayout g;
    const std::size_t sizes[5] = {census.states().size(), census.edu_levels().size(),
                                  census.age_bands().size(), census.child_levels().size(),
                                  census.eduage_levels().size()};
    std::size_t off = 2;
    for (int i = 0; i < 5; ++i) {
        g.offsets[i] = off;
        g.sizes[i] = sizes[i];
        off += sizes[i];
    }
    g.total = off;
    return g;
}

// Sparse design row: intercept, income, and the five group indicator columns.
struct ObsRow {
    double income = 0.0;
    std::size_t idx[5];
    double y = 0.0; // A1 count
    double n = 0.0; // flagged count
};

inline void cell_indices(const CensusTable& census, const GroupLayout& layout, std::size_t cell,
                         std::size_t out[5]) {
    const CellKey& key = census.cells()[cell].key;
    out[0] = layout.offsets[0] + census.level_of_state(key.state);
    out[1] = layout.offsets[1] + census.level_of_edu(key.edu_q);
    out[2] = layout.offsets[2] + census.level_of_age(key.age_band);
    out[3] = layout.offsets[3] + census.level_of_child(key.child_q);
    out[4] = layout.offsets[4] + census.level_of_eduage(key.edu_q, key.age_band);
}

inline double row_eta(const ObsRow& r, const Eigen::VectorXd& beta) {
    double eta = beta[0] + beta[1] * r.income;
    for (int g = 0; g < 5; ++g) eta += beta[static_cast<Eigen::Index>(r.idx[g])];
    return std::clamp(eta, -30.0, 30.0);
}

inline double penalized_loglik(const std::vector<ObsRow>& rows, const Eigen::VectorXd& beta,
                               const Eigen::VectorXd& penalty) {
    double ll = 0.0;
    for (const auto& r : rows) {
        const double eta = row_eta(r, beta);
        const double log1pe = eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
        ll += r.y * eta - r.n * log1pe;
    }
    for (Eigen::Index j = 0; j < beta.size(); ++j) ll -= 0.5 * penalty[j] * beta[j] * beta[j];
    return ll;
}

} // namespace detail

inline MrpFit fit_mrp(const WindowDataset& window, const CensusTable& census,
                      const MrpOptions& opts = {}) {
    const detail::GroupLayout layout = detail::make_layout(census);
    std::vector<detail::ObsRow> rows;
    rows.reserve(window.cells.size());
    std::int64_t total_flagged = 0, total_a1 = 0;
    for (const auto& [cell, n_flag, n_a1] : window.cells) {
        if (n_flag <= 0) continue;
        if (n_a1 < 0 || n_a1 > n_flag)
            throw numeric_error("fit_mrp: cell with A1 count outside [0, flagged]");
        detail::ObsRow r;
        r.income = census.income_std(cell);
        detail::cell_indices(census, layout, cell, r.idx);
        r.y = static_cast<double>(n_a1);
        r.n = static_cast<double>(n_flag);
        rows.push_back(r);
        total_flagged += n_flag;
        total_a1 += n_a1;
    }
    if (rows.empty()) throw numeric_error("fit_mrp: window has no flagged queries");

    const Eigen::Index k = static_cast<Eigen::Index>(layout.total);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
    // Warm start the intercept at the smoothed pooled rate.
    beta[0] = logit((static_cast<double>(total_a1) + 0.5) / (static_cast<double>(total_flagged) + 1.0));

    double sigma2[5];
    const std::optional<double>* fixed[5] = {&opts.fix_sigma2_state, &opts.fix_sigma2_edu,
                                             &opts.fix_sigma2_age, &opts.fix_sigma2_child,
                                             &opts.fix_sigma2_eduage};
    for (int g = 0; g < 5; ++g)
        sigma2[g] = std::max(fixed[g]->value_or(opts.sigma2_init), opts.sigma2_floor);

    Eigen::VectorXd penalty(k);
    Eigen::MatrixXd info(k, k);
    Eigen::VectorXd score(k);
    MrpFit fit;
    int outer = 0;
    for (; outer < opts.max_outer; ++outer) {
        penalty[0] = penalty[1] = 1e-10; // numerical ridge only; effectively unpenalized
        for (int g = 0; g < 5; ++g)
            for (std::size_t j = 0; j < layout.sizes[g]; ++j)
                penalty[static_cast<Eigen::Index>(layout.offsets[g] + j)] = 1.0 / sigma2[g];

        // Inner loop: ridge-penalized IRLS at the current variances.
        double pll = detail::penalized_loglik(rows, beta, penalty);
        for (int inner = 0; inner < opts.max_inner; ++inner) {
            score.setZero();
            info.setZero();
            for (const auto& r : rows) {
                const double eta = detail::row_eta(r, beta);
                const double p = inv_logit(eta);
                const double resid = r.y - r.n * p;
                const double w = std::max(r.n * p * (1.0 - p), 1e-12);
                const std::size_t cols[7] = {0, 1, r.idx[0], r.idx[1], r.idx[2], r.idx[3], r.idx[4]};
                const double vals[7] = {1.0, r.income, 1.0, 1.0, 1.0, 1.0, 1.0};
                for (int a = 0; a < 7; ++a) {
                    score[static_cast<Eigen::Index>(cols[a])] += vals[a] * resid;
                    for (int b = 0; b < 7; ++b)
                        info(static_cast<Eigen::Index>(cols[a]), static_cast<Eigen::Index>(cols[b])) +=
                            w * vals[a] * vals[b];
                }
            }
            score -= penalty.cwiseProduct(beta);
            info.diagonal() += penalty;
            if (score.cwiseAbs().maxCoeff() < 1e-8) break;
            const Eigen::VectorXd step = info.ldlt().solve(score);
            double scale = 1.0;
            Eigen::VectorXd beta_new;
            double pll_new = 0.0;
            for (int half = 0; half < 40; ++half) {
                beta_new = beta + scale * step;
                pll_new = detail::penalized_loglik(rows, beta_new, penalty);
                if (pll_new >= pll - 1e-12) break;
                scale *= 0.5;
            }
            const double rel = std::abs(pll_new - pll) / (std::abs(pll) + 1.0);
            beta = beta_new;
            pll = pll_new;
            if (rel < 1e-12) break;
        }

        // Refresh the information matrix at the final inner beta; the inner
        // loop may have stepped after info was last assembled.
        info.setZero();
        for (const auto& r : rows) {
            const double eta = detail::row_eta(r, beta);
            const double p = inv_logit(eta);
            const double w = std::max(r.n * p * (1.0 - p), 1e-12);
            const std::size_t cols[7] = {0, 1, r.idx[0], r.idx[1], r.idx[2], r.idx[3], r.idx[4]};
            const double vals[7] = {1.0, r.income, 1.0, 1.0, 1.0, 1.0, 1.0};
            for (int a = 0; a < 7; ++a)
                for (int b = 0; b < 7; ++b)
                    info(static_cast<Eigen::Index>(cols[a]), static_cast<Eigen::Index>(cols[b])) +=
                        w * vals[a] * vals[b];
        }
        info.diagonal() += penalty;

        // Variance updates (Schall): sigma2_g = sum(alpha^2) / (m_g - tr(C_gg)/sigma2_g),
        // with C the inverse penalized information. Groups with no usable
        // degrees of freedom collapse to the floor (full pooling).
        const Eigen::MatrixXd C = info.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
        double max_rel_change = 0.0;
        for (int g = 0; g < 5; ++g) {
            if (fixed[g]->has_value()) continue;
            double num = 0.0, tr = 0.0;
            for (std::size_t j = 0; j < layout.sizes[g]; ++j) {
                const Eigen::Index idx = static_cast<Eigen::Index>(layout.offsets[g] + j);
                num += beta[idx] * beta[idx];
                tr += C(idx, idx);
            }
            const double denom = static_cast<double>(layout.sizes[g]) - tr / sigma2[g];
            double next = denom > 1e-10 ? num / denom : 0.0;
            next = std::max(next, opts.sigma2_floor);
            max_rel_change = std::max(max_rel_change,
                                      std::abs(next - sigma2[g]) / (sigma2[g] + 1e-12));
            sigma2[g] = next;
        }
        if (max_rel_change < opts.outer_tol) {
            fit.converged = true;
            ++outer;
            break;
        }
    }

    fit.outer_iterations = outer;
    fit.beta0 = beta[0];
    fit.beta_income = beta[1];
    auto copy_block = [&](int g, std::vector<double>& dst) {
        dst.resize(layout.sizes[g]);
        for (std::size_t j = 0; j < layout.sizes[g]; ++j)
            dst[j] = beta[static_cast<Eigen::Index>(layout.offsets[g] + j)];
    };
    copy_block(0, fit.alpha_state);
    copy_block(1, fit.alpha_edu);
    copy_block(2, fit.alpha_age);
    copy_block(3, fit.alpha_child);
    copy_block(4, fit.alpha_eduage);
    fit.sigma2_state = sigma2[0];
    fit.sigma2_edu = sigma2[1];
    fit.sigma2_age = sigma2[2];
    fit.sigma2_child = sigma2[3];
    fit.sigma2_eduage = sigma2[4];
    return fit;
}

// Model prediction for every census cell, observed in the window or not;
// unobserved cells are pure partial pooling (their group effects only).
inline std::vector<double> predict_cells(const MrpFit& fit, const CensusTable& census) {
    std::vector<double> out(census.cells().size());
    for (std::size_t i = 0; i < census.cells().size(); ++i) {
        const CellKey& key = census.cells()[i].key;
        const double eta = fit.beta0 + fit.beta_income * census.income_std(i) +
                           fit.alpha_state[census.level_of_state(key.state)] +
                           fit.alpha_edu[census.level_of_edu(key.edu_q)] +
                           fit.alpha_age[census.level_of_age(key.age_band)] +
                           fit.alpha_child[census.level_of_child(key.child_q)] +
                           fit.alpha_eduage[census.level_of_eduage(key.edu_q, key.age_band)];
        out[i] = inv_logit(eta);
    }
    return out;
}

// Census-weighted mean of cell predictions: sum_j N_j yhat_j / sum_j N_j over
// the cells in scope (a state code, or empty for national).
inline double poststratify(const std::vector<double>& yhat, const CensusTable& census,
                           const std::string& scope = "") {
    if (yhat.size() != census.cells().size())
        throw std::invalid_argument("poststratify: prediction vector does not match census");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < census.cells().size(); ++i) {
        const auto& cell = census.cells()[i];
        if (!scope.empty() && cell.key.state != scope) continue;
        num += cell.n_zip * yhat[i];
        den += cell.n_zip;
    }
    if (den <= 0.0) throw numeric_error("poststratify: zero total weight in scope '" + scope + "'");
    return num / den;
}

// Daily poststratified signal; scope "national" plus one series per state.
struct DailySignal {
    std::vector<std::int64_t> days;
    std::vector<std::int64_t> n_flagged;
    std::vector<bool> partial;
    std::vector<std::string> scopes;            // "national" first, then states
    std::vector<std::vector<double>> estimates; // [scope][day], NaN = missing
    std::int64_t dropped_unmapped = 0;
};

inline DailySignal mrp_signal(const std::vector<tax::QueryRecord>& queries, const CensusTable& census,
                              const Zipmap& zipmap, int window_days = 3, unsigned jobs = 1,
                              const MrpOptions& opts = {}) {
    WindowBuild build = build_windows(queries, zipmap, census, window_days);
    if (build.windows.empty()) throw numeric_error("mrp_signal: no data days");
    DailySignal sig;
    sig.dropped_unmapped = build.dropped_unmapped;
    sig.scopes.push_back("national");
    for (const auto& s : census.states()) sig.scopes.push_back(s);
    const std::size_t n_days = build.windows.size();
    sig.days.resize(n_days);
    sig.n_flagged.resize(n_days);
    sig.partial.resize(n_days);
    sig.estimates.assign(sig.scopes.size(), std::vector<double>(n_days, kNaN));
    for (std::size_t i = 0; i < n_days; ++i) {
        sig.days[i] = build.windows[i].end_day;
        sig.n_flagged[i] = build.windows[i].total_flagged();
        sig.partial[i] = build.windows[i].partial;
    }
    parallel_for(n_days, jobs, [&](std::size_t i) {
        if (sig.n_flagged[i] == 0) return; // missing day
        const MrpFit fit = fit_mrp(build.windows[i], census, opts);
        const std::vector<double> yhat = predict_cells(fit, census);
        sig.estimates[0][i] = poststratify(yhat, census, "");
        for (std::size_t s = 0; s < census.states().size(); ++s)
            sig.estimates[s + 1][i] = poststratify(yhat, census, census.states()[s]);
    });
    return sig;
}

// Weekly mean of daily values, MMWR weeks (Sunday start). Weeks with no
// usable days are missing; weeks with fewer than 7 are flagged partial.
struct WeeklyPoint {
    std::int64_t week_start = 0;
    double value = kNaN;
    int n_days = 0;
    bool partial = false;
};

inline std::vector<WeeklyPoint> weekly_aggregate(const std::vector<std::int64_t>& days,
                                                 const std::vector<double>& values) {
    if (days.size() != values.size())
        throw std::invalid_argument("weekly_aggregate: size mismatch");
    std::map<std::int64_t, std::pair<double, int>> weeks;
    for (std::size_t i = 0; i < days.size(); ++i) {
        if (is_missing(values[i])) continue;
        auto& [sum, n] = weeks[sunday_on_or_before(days[i])];
        sum += values[i];
        ++n;
    }
    std::vector<WeeklyPoint> out;
    if (days.empty()) return out;
    const std::int64_t first = sunday_on_or_before(*std::min_element(days.begin(), days.end()));
    const std::int64_t last = sunday_on_or_before(*std::max_element(days.begin(), days.end()));
    for (std::int64_t ws = first; ws <= last; ws += 7) {
        WeeklyPoint p;
        p.week_start = ws;
        const auto it = weeks.find(ws);
        if (it != weeks.end() && it->second.second > 0) {
            p.value = it->second.first / it->second.second;
            p.n_days = it->second.second;
        }
        p.partial = p.n_days < 7;
        out.push_back(p);
    }
    return out;
}

} // namespace flutrack::mrp
