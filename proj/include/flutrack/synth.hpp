#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "flutrack/backtest.hpp"
#include "flutrack/casecontrol.hpp"
#include "flutrack/common.hpp"
#include "flutrack/dates.hpp"
#include "flutrack/mrp.hpp"
#include "flutrack/rng.hpp"
#include "flutrack/taxonomy.hpp"

namespace flutrack::synth {

// Ground-truth synthetic worlds standing in for the proprietary panel, query
// stream and surveillance feeds. Every generator is a pure function of
// (config, seed): regenerating is bit-identical, and generated files flow
// through the same CSV schemas the ingestion layer reads.

struct WorldConfig {
    std::uint64_t seed = 42;
    int states = 8;
    int cells_per_state = 16; // populated cells out of the 4x4x4 key space
    double sd_state = 0.5, sd_edu = 0.3, sd_age = 0.3, sd_child = 0.2, sd_eduage = 0.2;
    double income_coef = 0.2;
    double tau_true = 0.3; // baseline A1 share among flu-candidate queries
    // Behavioral (case-control) targets; father_rr = 0 disables the
    // parenthood x household-ILI interaction.
    double rr_hh_ili = 1.57;
    double rr_volume = 1.32;
    double rr_father = 0.0;
    double cc_tau = 1.2e-5; // population A1-search rate planted in the case-control world
    double gamma = 1.0;     // ILI-to-search link, per sd of the ILI curve, on the logit scale
    // Weekly ILI curve: base + seasonal sinusoid + epidemic bump + AR(1) noise.
    int peak_week = 5;
    double amplitude = 2.0;
    double noise_sd = 0.15;
    double noise_rho = 0.8;
    double base_level = 1.5;
    int weeks = 164;
    double queries_per_day = 500.0;
    double nonflu_share = 0.25; // extra unflagged noise queries, as a share of flagged volume

    void validate() const {
        if (states < 1 || states > 26 * 26) throw config_error("synth: states out of range");
        if (cells_per_state < 1 || cells_per_state > 64)
            throw config_error("synth: cells_per_state must be in [1, 64]");
        if (!(tau_true > 0.0 && tau_true < 1.0)) throw config_error("synth: tau_true must be in (0,1)");
        if (!(cc_tau > 0.0 && cc_tau < 1.0)) throw config_error("synth: cc_tau must be in (0,1)");
        if (sd_state < 0 || sd_edu < 0 || sd_age < 0 || sd_child < 0 || sd_eduage < 0)
            throw config_error("synth: group effect sds must be >= 0");
        if (weeks < 160) throw config_error("synth: weeks must be >= 160 for backtest feasibility");
        if (queries_per_day < 0) throw config_error("synth: queries_per_day must be >= 0");
        if (noise_sd < 0) throw config_error("synth: noise_sd must be >= 0");
        if (noise_rho <= -1.0 || noise_rho >= 1.0) throw config_error("synth: noise_rho must be in (-1,1)");
    }
};

// The world's start is a fixed Sunday so synthetic weeks align with MMWR
// weeks out of the box.
inline std::int64_t world_start_day() { return days_from_civil(2012, 1, 1); }

inline const std::vector<std::string>& default_age_bands() {
    static const std::vector<std::string> bands{"18-29", "30-44", "45-64", "65+"};
    return bands;
}

struct World {
    WorldConfig config;
    mrp::CensusTable census;
    mrp::Zipmap zipmap;
    // Planted effects, indexed like the census level lists.
    std::vector<double> alpha_state, alpha_edu, alpha_age, alpha_child, alpha_eduage;
    double income_coef = 0.0;
    std::vector<double> cell_eta0; // per-cell logit(tau) + effects, before the ILI term
};

inline std::string state_code(int i) {
    std::string s(2, 'A');
    s[0] = static_cast<char>('A' + i / 26);
    s[1] = static_cast<char>('A' + i % 26);
    return s;
}

inline World gen_world(const WorldConfig& cfg) {
    cfg.validate();
    Rng rng(derive_seed(cfg.seed, 0xC0FFEE));
    const auto& bands = default_age_bands();

    std::vector<mrp::CensusCell> cells;
    mrp::Zipmap zipmap;
    int next_zip = 10000;
    for (int si = 0; si < cfg.states; ++si) {
        const std::string state = state_code(si);
        // Choose cells_per_state distinct combos out of the 4x4x4 space.
        std::vector<int> combo(64);
        for (int i = 0; i < 64; ++i) combo[static_cast<std::size_t>(i)] = i;
        for (int i = 63; i > 0; --i)
            std::swap(combo[static_cast<std::size_t>(i)],
                      combo[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(i + 1)))]);
        combo.resize(static_cast<std::size_t>(cfg.cells_per_state));
        std::sort(combo.begin(), combo.end());
        for (int c : combo) {
            mrp::CensusCell cell;
            cell.key.state = state;
            cell.key.edu_q = c / 16 + 1;
            cell.key.age_band = bands[static_cast<std::size_t>((c / 4) % 4)];
            cell.key.child_q = c % 4 + 1;
            cell.n_zip = 1.0 + static_cast<double>(rng.poisson(3.0));
            cell.mean_income = std::max(15000.0, rng.normal(52000.0, 13000.0));
            for (int z = 0; z < static_cast<int>(cell.n_zip); ++z) {
                char zip[16];
                std::snprintf(zip, sizeof(zip), "%05d", next_zip++ % 100000);
                zipmap[zip] = cell.key;
            }
            cells.push_back(std::move(cell));
        }
    }

    World world{cfg, mrp::CensusTable(std::move(cells)), std::move(zipmap), {}, {}, {}, {}, {}, 0.0, {}};
    const mrp::CensusTable& census = world.census;
    auto draw_effects = [&](std::size_t count, double sd) {
        std::vector<double> out(count);
        for (double& v : out) v = sd > 0 ? rng.normal(0.0, sd) : 0.0;
        return out;
    };
    world.alpha_state = draw_effects(census.states().size(), cfg.sd_state);
    world.alpha_edu = draw_effects(census.edu_levels().size(), cfg.sd_edu);
    world.alpha_age = draw_effects(census.age_bands().size(), cfg.sd_age);
    world.alpha_child = draw_effects(census.child_levels().size(), cfg.sd_child);
    world.alpha_eduage = draw_effects(census.eduage_levels().size(), cfg.sd_eduage);
    world.income_coef = cfg.income_coef;

    world.cell_eta0.resize(census.cells().size());
    for (std::size_t i = 0; i < census.cells().size(); ++i) {
        const mrp::CellKey& key = census.cells()[i].key;
        world.cell_eta0[i] = logit(cfg.tau_true) + cfg.income_coef * census.income_std(i) +
                             world.alpha_state[census.level_of_state(key.state)] +
                             world.alpha_edu[census.level_of_edu(key.edu_q)] +
                             world.alpha_age[census.level_of_age(key.age_band)] +
                             world.alpha_child[census.level_of_child(key.child_q)] +
                             world.alpha_eduage[census.level_of_eduage(key.edu_q, key.age_band)];
    }
    return world;
}

// Deterministic (noise-free) part of the weekly ILI curve.
inline double ili_closed_form(const WorldConfig& cfg, int week) {
    const double woy = static_cast<double>(week % 52);
    const double two_pi = 6.283185307179586;
    const double seasonal = 0.5 * cfg.amplitude *
                            (1.0 + std::cos(two_pi * (woy - static_cast<double>(cfg.peak_week)) / 52.0));
    double dist = std::abs(woy - static_cast<double>(cfg.peak_week));
    dist = std::min(dist, 52.0 - dist);
    const double bump = 0.75 * cfg.amplitude * std::exp(-dist * dist / (2.0 * 2.5 * 2.5));
    return std::max(0.0, cfg.base_level + seasonal + bump);
}

// Weekly rate curve: closed form plus AR(1) Gaussian noise with marginal sd
// noise_sd, clamped at zero.
inline ts::IliSeries gen_ili_curve(const WorldConfig& cfg) {
    cfg.validate();
    Rng rng(derive_seed(cfg.seed, 0x111));
    ts::IliSeries out;
    out.geo = "US";
    out.count_mode = false;
    const double innov_sd = cfg.noise_sd * std::sqrt(1.0 - cfg.noise_rho * cfg.noise_rho);
    double u = cfg.noise_sd > 0 ? rng.normal(0.0, cfg.noise_sd) : 0.0;
    for (int w = 0; w < cfg.weeks; ++w) {
        if (w > 0) u = cfg.noise_sd > 0 ? cfg.noise_rho * u + rng.normal(0.0, innov_sd) : 0.0;
        out.week_starts.push_back(world_start_day() + 7 * static_cast<std::int64_t>(w));
        out.values.push_back(std::max(0.0, ili_closed_form(cfg, w) + u));
    }
    return out;
}

// Fixed template pools; texts are chosen so the shipped rule file reproduces
// the planted labels through the real normalization/labeling path.
inline const std::vector<std::string>& a1_text_pool() {
    static const std::vector<std::string> pool{
        "flu symptoms",
        "what are the symptoms of the flu?",
        "continued fever is a symptom of",
        "do I have the flu",
        "fever and cough remedy",
        "sore throat and fever",
        "flu how long contagious",
        "swollen glands fever",
    };
    return pool;
}

inline const std::vector<std::string>& a2_text_pool() {
    static const std::vector<std::string> pool{
        "spanish flu",
        "flu news today",
        "flu season forecast",
        "influenza pandemic history",
    };
    return pool;
}

inline const std::vector<std::string>& nonflu_text_pool() {
    static const std::vector<std::string> pool{
        "pizza near me",
        "weather tomorrow",
        "cheap flights to denver",
        "movie showtimes",
    };
    return pool;
}

// Rule file matching the template pools: news/research patterns first, then
// the symptom keywords.
inline std::string default_rules_text() {
    return "# flu query labeling rules: PATTERN<TAB>LABEL, first match wins\n"
           "spanish flu\tA2\n"
           "flu news\tA2\n"
           "flu season forecast\tA2\n"
           "influenza pandemic history\tA2\n"
           "flu\tA1\n"
           "fever\tA1\n"
           "influenza\tA1\n"
           "cough\tA1\n"
           "pneumonia\tA1\n"
           "sore throat\tA1\n"
           "swollen\tA1\n";
}

struct QueryStream {
    std::vector<tax::QueryRecord> queries;
    // Truth for oracle checks: per-week standardized ILI and the per-cell,
    // per-week A1 probability actually used for labeling.
    std::vector<double> std_ili;                  // [week]
    std::vector<std::vector<double>> cell_p;      // [week][cell]
};

// Flu-candidate queries per cell-day are Poisson; each one is A1 with
// probability inv_logit(eta0_cell + gamma * standardized ILI of its week).
// Unflagged noise queries are mixed in to exercise the labeling path.
inline QueryStream gen_query_stream(const WorldConfig& cfg, const World& world,
                                    const ts::IliSeries& ili) {
    if (static_cast<int>(ili.values.size()) < cfg.weeks)
        throw std::invalid_argument("gen_query_stream: ILI curve shorter than the world");
    Rng rng(derive_seed(cfg.seed, 0x222));
    QueryStream out;

    double mean = 0.0;
    for (int w = 0; w < cfg.weeks; ++w) mean += ili.values[static_cast<std::size_t>(w)];
    mean /= static_cast<double>(cfg.weeks);
    double var = 0.0;
    for (int w = 0; w < cfg.weeks; ++w) var += square(ili.values[static_cast<std::size_t>(w)] - mean);
    var /= static_cast<double>(cfg.weeks);
    const double sd = std::sqrt(var);
    out.std_ili.resize(static_cast<std::size_t>(cfg.weeks));
    for (int w = 0; w < cfg.weeks; ++w)
        out.std_ili[static_cast<std::size_t>(w)] = sd > 0 ? (ili.values[static_cast<std::size_t>(w)] - mean) / sd : 0.0;

    const std::size_t n_cells = world.census.cells().size();
    const double rate = cfg.queries_per_day / static_cast<double>(n_cells);
    out.cell_p.assign(static_cast<std::size_t>(cfg.weeks), std::vector<double>(n_cells, 0.0));

    // Zipcodes per cell, for round-robin assignment.
    std::vector<std::vector<std::string>> cell_zips(n_cells);
    for (const auto& [zip, key] : world.zipmap) {
        const auto idx = world.census.find(key);
        if (idx) cell_zips[*idx].push_back(zip);
    }

    const auto& a1_pool = a1_text_pool();
    const auto& a2_pool = a2_text_pool();
    const auto& non_pool = nonflu_text_pool();
    std::vector<std::size_t> zip_cursor(n_cells, 0);

    for (int w = 0; w < cfg.weeks; ++w) {
        for (std::size_t cell = 0; cell < n_cells; ++cell)
            out.cell_p[static_cast<std::size_t>(w)][cell] =
                inv_logit(world.cell_eta0[cell] + cfg.gamma * out.std_ili[static_cast<std::size_t>(w)]);
        for (int dow = 0; dow < 7; ++dow) {
            const std::int64_t day = world_start_day() + 7 * static_cast<std::int64_t>(w) + dow;
            for (std::size_t cell = 0; cell < n_cells; ++cell) {
                const std::int64_t n_flagged = rng.poisson(rate);
                const double p = out.cell_p[static_cast<std::size_t>(w)][cell];
                for (std::int64_t i = 0; i < n_flagged; ++i) {
                    tax::QueryRecord q;
                    q.timestamp = day * 86400 + static_cast<std::int64_t>(rng.below(86400));
                    q.zipcode = cell_zips[cell][zip_cursor[cell]++ % cell_zips[cell].size()];
                    const bool a1 = rng.bernoulli(p);
                    const auto& pool = a1 ? a1_pool : a2_pool;
                    q.raw_text = pool[static_cast<std::size_t>(rng.below(pool.size()))];
                    q.normalized_text = tax::normalize(q.raw_text);
                    q.label = a1 ? tax::Label::A1 : tax::Label::A2;
                    out.queries.push_back(std::move(q));
                }
                const std::int64_t n_noise = rng.poisson(rate * cfg.nonflu_share);
                for (std::int64_t i = 0; i < n_noise; ++i) {
                    tax::QueryRecord q;
                    q.timestamp = day * 86400 + static_cast<std::int64_t>(rng.below(86400));
                    q.zipcode = cell_zips[cell][zip_cursor[cell]++ % cell_zips[cell].size()];
                    q.raw_text = non_pool[static_cast<std::size_t>(rng.below(non_pool.size()))];
                    q.normalized_text = tax::normalize(q.raw_text);
                    q.label = tax::Label::NonIli;
                    out.queries.push_back(std::move(q));
                }
            }
        }
    }
    return out;
}

// True census-weighted A1 probability for a scope, at the given week.
inline double true_poststratified(const World& world, const QueryStream& stream, int week,
                                  const std::string& scope = "") {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < world.census.cells().size(); ++i) {
        const auto& cell = world.census.cells()[i];
        if (!scope.empty() && cell.key.state != scope) continue;
        num += cell.n_zip * stream.cell_p[static_cast<std::size_t>(week)][i];
        den += cell.n_zip;
    }
    return num / den;
}

// ---------------------------------------------------------------------------
// Case-control world

struct CaseControlTruth {
    Eigen::VectorXd beta;            // planted slopes, order = columns below
    double b0 = 0.0;                 // planted population intercept
    double population_rr = 0.0;      // exact RR of the household-ILI contrast at reference covariates
    double population_rd = 0.0;
    std::vector<std::string> columns;
};

struct CaseControlWorld {
    cc::CaseControlTable table;
    CaseControlTruth truth;
};

// Draws covariates from survey-like marginals, plants a logistic outcome
// model whose household-ILI effect hits the configured relative risk, and
// samples cases/controls on the outcome -- exactly the sampling scheme the
// rare-events intercept correction undoes.
inline CaseControlWorld gen_casecontrol(const WorldConfig& cfg, int n_cases, int n_controls) {
    if (n_cases < 1 || n_controls < 1)
        throw std::invalid_argument("gen_casecontrol: need at least one case and one control");
    cfg.validate();
    Rng rng(derive_seed(cfg.seed, 0x333));

    const std::vector<std::string> columns{"volume", "female", "parent",  "spouse",
                                           "age",    "hh_ili", "resp_ili"};
    const int k = static_cast<int>(columns.size());

    // Planted coefficients. Volume is scaled so the configured RR applies to
    // a third-vs-first-quartile volume gap; the optional father interaction
    // rides on parent * (1-female) * hh_ili.
    const double vol_mean = 5.688, vol_sd = 1.610;
    const double vol_iqr_gap = 1.349 * vol_sd; // q3 - q1 of a normal
    Eigen::VectorXd beta(k);
    beta << std::log(cfg.rr_volume) / vol_iqr_gap, // volume
        std::log(1.10),                            // female
        std::log(1.10),                            // parent
        std::log(1.05),                            // spouse
        std::log(1.03),                            // age (per group step)
        std::log(cfg.rr_hh_ili),                   // hh_ili
        0.0;                                       // resp_ili (effect carried by hh_ili)
    const bool father = cfg.rr_father > 0.0;
    const double beta_father = father ? std::log(cfg.rr_father) - std::log(cfg.rr_hh_ili) : 0.0;

    // Reference covariate means (analytic, matching the marginals below).
    Eigen::VectorXd xbar(k);
    xbar << vol_mean, 0.610, 0.315, 0.509, 4.610, 0.349, 0.245;
    const double b0 = logit(cfg.cc_tau) - beta.dot(xbar) - beta_father * 0.315 * 0.390 * 0.349;

    auto draw_row = [&](Eigen::VectorXd& x) {
        x.resize(k);
        x[0] = std::max(0.0, rng.normal(vol_mean, vol_sd));
        x[1] = rng.bernoulli(0.610) ? 1.0 : 0.0;
        x[2] = rng.bernoulli(0.315) ? 1.0 : 0.0;
        x[3] = rng.bernoulli(0.509) ? 1.0 : 0.0;
        x[4] = std::clamp(std::round(rng.normal(4.610, 1.434)), 1.0, 7.0);
        const bool resp = rng.bernoulli(0.245);
        // Household ILI includes the respondent; the residual household rate
        // is calibrated so the marginal stays 0.349.
        const bool hh = resp || rng.bernoulli(0.1377);
        x[5] = hh ? 1.0 : 0.0;
        x[6] = resp ? 1.0 : 0.0;
    };
    auto prob = [&](const Eigen::VectorXd& x) {
        double eta = b0 + beta.dot(x);
        if (father) eta += beta_father * x[2] * (1.0 - x[1]) * x[5];
        return inv_logit(eta);
    };

    // Candidate pool; cases are drawn proportional to p(x) (exact sampling
    // conditional on Y=1 for rare outcomes), controls by rejection on 1-p(x).
    const int pool_size = 20000;
    std::vector<Eigen::VectorXd> pool(static_cast<std::size_t>(pool_size));
    std::vector<double> cumw(static_cast<std::size_t>(pool_size));
    double acc = 0.0;
    for (int i = 0; i < pool_size; ++i) {
        draw_row(pool[static_cast<std::size_t>(i)]);
        acc += prob(pool[static_cast<std::size_t>(i)]);
        cumw[static_cast<std::size_t>(i)] = acc;
    }

    const int n = n_cases + n_controls;
    cc::CaseControlTable table;
    table.columns = columns;
    table.values.resize(n, k);
    table.y.resize(n);
    for (int i = 0; i < n_cases; ++i) {
        const double u = rng.uniform() * acc;
        const auto it = std::lower_bound(cumw.begin(), cumw.end(), u);
        table.values.row(i) = pool[static_cast<std::size_t>(it - cumw.begin())];
        table.y[i] = 1.0;
    }
    for (int i = 0; i < n_controls; ++i) {
        Eigen::VectorXd x;
        do {
            x = pool[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(pool_size)))];
        } while (rng.bernoulli(prob(x)));
        table.values.row(n_cases + i) = x;
        table.y[n_cases + i] = 0.0;
    }

    CaseControlWorld out{std::move(table), {}};
    out.truth.beta = beta;
    out.truth.b0 = b0;
    out.truth.columns = columns;
    Eigen::VectorXd x1 = xbar, x0 = xbar;
    x1[5] = 1.0;
    x0[5] = 0.0;
    const double p1 = inv_logit(b0 + beta.dot(x1) + (father ? beta_father * x1[2] * (1 - x1[1]) : 0.0));
    const double p0 = inv_logit(b0 + beta.dot(x0));
    out.truth.population_rr = p1 / p0;
    out.truth.population_rd = p1 - p0;
    return out;
}

} // namespace flutrack::synth
