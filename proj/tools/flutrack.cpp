// flutrack: demographically re-weighted flu-search signals and seasonal
// forecasting over them. Subcommands wire the library stages together:
//   synth       generate a synthetic world (queries, census, ILI, survey)
//   label       normalize and label a query stream; emit the A1 panel
//   expand      rank unlabeled queries by embedding similarity to A1 seeds
//   casecontrol fit the behavioral model, correct the intercept, report RR/RD
//   mrp         rolling-window MRP estimates poststratified by census cells
//   backtest    rolling-origin forecasts for the model families
//   report      recompute metrics and comparison plots from forecasts.csv
//
// Every command is deterministic given its config and seed, writes outputs
// atomically, and exits 0 on success, 1 on validation errors, 2 on runtime
// errors.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "flutrack/backtest.hpp"
#include "flutrack/casecontrol.hpp"
#include "flutrack/config.hpp"
#include "flutrack/embedding.hpp"
#include "flutrack/metrics.hpp"
#include "flutrack/mrp.hpp"
#include "flutrack/parallel.hpp"
#include "flutrack/schemas.hpp"
#include "flutrack/svg.hpp"
#include "flutrack/synth.hpp"
#include "flutrack/taxonomy.hpp"

namespace fs = std::filesystem;
using flutrack::config_error;
using json = nlohmann::ordered_json;

namespace {

std::string g_cmd = "flutrack";

void log_line(const char* level, const std::string& msg) {
    std::fprintf(stderr, "level=%s cmd=%s msg=\"%s\"\n", level, g_cmd.c_str(), msg.c_str());
}

void log_info(const std::string& msg) { log_line("info", msg); }
void log_warn(const std::string& msg) { log_line("warn", msg); }

struct GlobalArgs {
    std::string config_path;
    std::string out_override;
    std::int64_t seed_override = -1;
    int jobs = 0; // 0 = available parallelism
};

struct Context {
    flutrack::io::Config cfg;
    std::string out_dir;
    std::uint64_t seed = 42;
    unsigned jobs = 1;
};

Context make_context(const GlobalArgs& args, bool needs_config) {
    Context ctx;
    if (!args.config_path.empty())
        ctx.cfg = flutrack::io::Config::load(args.config_path);
    else if (needs_config)
        throw config_error("--config is required for this command");
    ctx.seed = static_cast<std::uint64_t>(
        args.seed_override >= 0 ? args.seed_override : ctx.cfg.get_int("seed", 42));
    ctx.out_dir = !args.out_override.empty() ? args.out_override : ctx.cfg.get_string("out", "out");
    ctx.jobs = args.jobs > 0 ? static_cast<unsigned>(args.jobs) : flutrack::default_jobs();
    return ctx;
}

void finish_config(Context& ctx) {
    ctx.cfg.check();
    for (const auto& k : ctx.cfg.unused_keys()) log_warn("unused config key: " + k);
    fs::create_directories(ctx.out_dir);
}

std::string out_path(const Context& ctx, const std::string& name) {
    return (fs::path(ctx.out_dir) / name).string();
}

// ---------------------------------------------------------------------------

flutrack::synth::WorldConfig world_from_config(Context& ctx) {
    flutrack::synth::WorldConfig w;
    w.seed = ctx.seed;
    w.states = static_cast<int>(ctx.cfg.get_int("synth_states", w.states));
    w.cells_per_state = static_cast<int>(ctx.cfg.get_int("synth_cells_per_state", w.cells_per_state));
    w.sd_state = ctx.cfg.get_double("synth_sd_state", w.sd_state);
    w.sd_edu = ctx.cfg.get_double("synth_sd_edu", w.sd_edu);
    w.sd_age = ctx.cfg.get_double("synth_sd_age", w.sd_age);
    w.sd_child = ctx.cfg.get_double("synth_sd_child", w.sd_child);
    w.sd_eduage = ctx.cfg.get_double("synth_sd_eduage", w.sd_eduage);
    w.income_coef = ctx.cfg.get_double("synth_income_coef", w.income_coef);
    w.tau_true = ctx.cfg.get_double("synth_tau", w.tau_true);
    w.rr_hh_ili = ctx.cfg.get_double("synth_rr_hh_ili", w.rr_hh_ili);
    w.rr_volume = ctx.cfg.get_double("synth_rr_volume", w.rr_volume);
    w.rr_father = ctx.cfg.get_double("synth_rr_father", w.rr_father);
    w.cc_tau = ctx.cfg.get_double("synth_cc_tau", w.cc_tau);
    w.gamma = ctx.cfg.get_double("synth_gamma", w.gamma);
    w.peak_week = static_cast<int>(ctx.cfg.get_int("synth_peak_week", w.peak_week));
    w.amplitude = ctx.cfg.get_double("synth_amplitude", w.amplitude);
    w.noise_sd = ctx.cfg.get_double("synth_noise_sd", w.noise_sd);
    w.noise_rho = ctx.cfg.get_double("synth_noise_rho", w.noise_rho);
    w.base_level = ctx.cfg.get_double("synth_base_level", w.base_level);
    w.weeks = static_cast<int>(ctx.cfg.get_int("synth_weeks", w.weeks));
    w.queries_per_day = ctx.cfg.get_double("synth_queries_per_day", w.queries_per_day);
    w.nonflu_share = ctx.cfg.get_double("synth_nonflu_share", w.nonflu_share);
    return w;
}

int cmd_synth(const GlobalArgs& args) {
    using namespace flutrack;
    Context ctx = make_context(args, false);
    const synth::WorldConfig wc = world_from_config(ctx);
    const int n_cases = static_cast<int>(ctx.cfg.get_int("synth_cases", 260));
    const int n_controls = static_cast<int>(ctx.cfg.get_int("synth_controls", 390));
    const double state_count_scale = ctx.cfg.get_double("synth_state_count_scale", 30.0);
    const bool emit_state_counts = ctx.cfg.get_int("synth_state_counts", 1) != 0;
    finish_config(ctx);

    const synth::World world = synth::gen_world(wc);
    const ts::IliSeries ili = synth::gen_ili_curve(wc);
    const synth::QueryStream stream = synth::gen_query_stream(wc, world, ili);
    const synth::CaseControlWorld ccw = synth::gen_casecontrol(wc, n_cases, n_controls);
    log_info("world: " + std::to_string(world.census.cells().size()) + " cells, " +
             std::to_string(stream.queries.size()) + " queries, " + std::to_string(wc.weeks) +
             " weeks");

    std::vector<ts::IliSeries> ili_out{ili};
    if (emit_state_counts) {
        Rng rng(derive_seed(wc.seed, 0x515));
        for (const auto& state : world.census.states()) {
            ts::IliSeries s;
            s.geo = state;
            s.count_mode = true;
            const double level = state_count_scale * (0.5 + rng.uniform());
            for (int w = 0; w < wc.weeks; ++w) {
                s.week_starts.push_back(ili.week_starts[static_cast<std::size_t>(w)]);
                s.values.push_back(static_cast<double>(
                    rng.poisson(level * std::max(0.05, ili.values[static_cast<std::size_t>(w)]))));
            }
            ili_out.push_back(std::move(s));
        }
    }

    // Truth series for diagnostics and oracle tests.
    std::string truth = "date,scope,truth\n";
    for (int w = 0; w < wc.weeks; ++w) {
        for (int dow = 0; dow < 7; ++dow) {
            const std::int64_t day = synth::world_start_day() + 7 * static_cast<std::int64_t>(w) + dow;
            csv_append_row(truth, {format_date(day), "national",
                                   format_double(synth::true_poststratified(world, stream, w))});
            for (const auto& state : world.census.states())
                csv_append_row(truth, {format_date(day), state,
                                       format_double(synth::true_poststratified(world, stream, w, state))});
        }
    }

    io::atomic_write(out_path(ctx, "queries.csv"), io::write_queries(stream.queries));
    io::atomic_write(out_path(ctx, "cells.csv"), io::write_cells(world.census));
    io::atomic_write(out_path(ctx, "zipmap.csv"), io::write_zipmap(world.zipmap));
    io::atomic_write(out_path(ctx, "ili.csv"), io::write_ili(ili_out));
    io::atomic_write(out_path(ctx, "rules.tsv"), synth::default_rules_text());
    io::atomic_write(out_path(ctx, "casecontrol.csv"), io::write_casecontrol(ccw.table));
    io::atomic_write(out_path(ctx, "truth_daily.csv"), truth);
    log_info("wrote queries.csv cells.csv zipmap.csv ili.csv rules.tsv casecontrol.csv truth_daily.csv");
    return 0;
}

// ---------------------------------------------------------------------------

std::vector<flutrack::tax::QueryRecord> load_and_label(Context& ctx) {
    using namespace flutrack;
    const std::string queries_path = ctx.cfg.require_path("queries");
    const std::string rules_path = ctx.cfg.require_path("rules");
    const std::string overrides_path = ctx.cfg.optional_path("labels");
    ctx.cfg.check();
    std::vector<tax::QueryRecord> queries = io::read_queries(queries_path);
    const tax::KeywordRules rules = tax::load_rules(rules_path);
    const tax::LabelOverrides overrides =
        overrides_path.empty() ? tax::LabelOverrides{} : tax::load_overrides(overrides_path);
    for (auto& q : queries) q.label = tax::assign_label(q.normalized_text, rules, overrides);
    return queries;
}

int cmd_label(const GlobalArgs& args) {
    using namespace flutrack;
    Context ctx = make_context(args, true);
    std::vector<tax::QueryRecord> queries = load_and_label(ctx);
    finish_config(ctx);
    std::size_t flagged = 0, a1 = 0;
    for (const auto& q : queries) {
        flagged += tax::is_flagged(q.label);
        a1 += q.label == tax::Label::A1;
    }
    log_info("labeled " + std::to_string(queries.size()) + " queries: " + std::to_string(flagged) +
             " flu candidates, " + std::to_string(a1) + " A1");
    io::atomic_write(out_path(ctx, "labeled_queries.csv"), io::write_labeled_queries(queries));
    io::atomic_write(out_path(ctx, "a1_panel.csv"), io::write_a1_panel(io::build_a1_panel(queries)));
    return 0;
}

int cmd_expand(const GlobalArgs& args) {
    using namespace flutrack;
    Context ctx = make_context(args, true);
    std::vector<tax::QueryRecord> queries = load_and_label(ctx);
    const std::string emb_path = ctx.cfg.optional_path("embeddings");
    const std::size_t k = static_cast<std::size_t>(ctx.cfg.get_int("expand_k", 50));
    emb::TrainOptions topt;
    topt.dim = static_cast<int>(ctx.cfg.get_int("emb_dim", topt.dim));
    topt.window = static_cast<int>(ctx.cfg.get_int("emb_window", topt.window));
    topt.epochs = static_cast<int>(ctx.cfg.get_int("emb_epochs", topt.epochs));
    topt.min_count = static_cast<int>(ctx.cfg.get_int("emb_min_count", topt.min_count));
    topt.seed = ctx.seed;
    finish_config(ctx);

    std::set<std::string> seeds, candidates;
    std::vector<std::string> corpus;
    for (const auto& q : queries) {
        corpus.push_back(q.normalized_text);
        if (q.label == tax::Label::A1) seeds.insert(q.normalized_text);
        else candidates.insert(q.normalized_text);
    }
    if (seeds.empty()) throw numeric_error("expand: no A1-labeled seed queries");

    emb::EmbeddingModel model;
    if (!emb_path.empty()) {
        model = emb::load_embeddings(emb_path);
        log_info("loaded embeddings: " + std::to_string(model.vocab_size()) + " tokens");
    } else {
        model = emb::train_embeddings(corpus, topt);
        io::atomic_write(out_path(ctx, "embeddings.txt"), emb::save_embeddings(model));
        log_info("trained embeddings on " + std::to_string(corpus.size()) + " queries, vocab " +
                 std::to_string(model.vocab_size()));
    }

    const emb::Expansion expansion =
        emb::expand_seed(std::vector<std::string>(seeds.begin(), seeds.end()),
                         std::vector<std::string>(candidates.begin(), candidates.end()), model, k);
    if (expansion.all_candidates_zero)
        log_warn("every candidate embedded to the zero vector; nothing to rank");
    std::string out = "normalized_text,similarity\n";
    for (const auto& [text, sim] : expansion.ranked)
        csv_append_row(out, {text, format_double(sim)});
    io::atomic_write(out_path(ctx, "expansion.csv"), out);
    log_info("ranked " + std::to_string(expansion.ranked.size()) + " expansion candidates");
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_casecontrol(const GlobalArgs& args) {
    using namespace flutrack;
    Context ctx = make_context(args, true);
    const std::string cc_path = ctx.cfg.require_path("casecontrol");
    const std::string formula_path = ctx.cfg.optional_path("formula");
    const std::string contrasts_path = ctx.cfg.optional_path("contrasts");
    const double tau = ctx.cfg.get_double("tau", 1.2e-5);
    const int n_draws = static_cast<int>(ctx.cfg.get_int("n_draws", 10000));
    if (!(tau > 0.0 && tau < 1.0)) ctx.cfg.add_problem("tau must lie in (0, 1)");
    finish_config(ctx);

    const cc::CaseControlTable table = io::read_casecontrol(cc_path);
    const cc::ModelFormula formula =
        formula_path.empty() ? cc::default_formula(table) : cc::load_formula(formula_path);
    std::vector<cc::ContrastSpec> contrasts;
    if (!contrasts_path.empty()) {
        contrasts = cc::load_contrasts(contrasts_path);
    } else {
        const std::string var =
            std::find(table.columns.begin(), table.columns.end(), "hh_ili") != table.columns.end()
                ? "hh_ili"
                : table.columns.front();
        contrasts.push_back(cc::ContrastSpec{var, {{var, 1.0}}, {{var, 0.0}}});
        log_info("no contrasts file; defaulting to " + var + "=1 vs " + var + "=0");
    }

    const cc::FittedLogit fitted = cc::fit_logit(table, formula);
    const cc::FittedLogit corrected = cc::correct_intercept(fitted, tau);
    log_info("fit converged in " + std::to_string(fitted.fit.iterations) + " iterations, ybar=" +
             format_double(fitted.fit.ybar));

    json report;
    report["n"] = table.y.size();
    report["ybar"] = fitted.fit.ybar;
    report["tau"] = tau;
    report["iterations"] = fitted.fit.iterations;
    report["final_grad_norm"] = fitted.fit.final_grad_norm;
    report["loglik"] = fitted.fit.loglik;
    json coefs, corrected_coefs;
    for (std::size_t i = 0; i < fitted.fit.names.size(); ++i) {
        coefs[fitted.fit.names[i]] = fitted.fit.beta[static_cast<Eigen::Index>(i)];
        corrected_coefs[fitted.fit.names[i]] = corrected.fit.beta[static_cast<Eigen::Index>(i)];
    }
    report["coefficients"] = coefs;
    report["corrected_coefficients"] = corrected_coefs;
    json cov = json::array();
    for (Eigen::Index i = 0; i < fitted.fit.covariance.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < fitted.fit.covariance.cols(); ++j)
            row.push_back(fitted.fit.covariance(i, j));
        cov.push_back(row);
    }
    report["covariance"] = cov;

    json contrast_rows = json::array();
    for (std::size_t ci = 0; ci < contrasts.size(); ++ci) {
        const auto& spec = contrasts[ci];
        const Eigen::VectorXd x1 = cc::term_vector(table, formula, spec.x1);
        const Eigen::VectorXd x0 = cc::term_vector(table, formula, spec.x0);
        const cc::RiskContrast rc =
            cc::risk_contrast(corrected, x1, x0, n_draws, derive_seed(ctx.seed, ci));
        json row;
        row["name"] = spec.name;
        row["rr"] = rc.rr;
        row["rr_ci"] = {rc.rr_lo, rc.rr_hi};
        row["rd"] = rc.rd;
        row["rd_ci"] = {rc.rd_lo, rc.rd_hi};
        json x1j, x0j;
        for (std::size_t t = 0; t < formula.terms.size(); ++t) {
            x1j[formula.terms[t].name()] = x1[static_cast<Eigen::Index>(t)];
            x0j[formula.terms[t].name()] = x0[static_cast<Eigen::Index>(t)];
        }
        row["x1"] = x1j;
        row["x0"] = x0j;
        contrast_rows.push_back(row);
        log_info("contrast " + spec.name + ": RR=" + format_double(rc.rr) + " [" +
                 format_double(rc.rr_lo) + ", " + format_double(rc.rr_hi) + "]");
    }
    report["contrasts"] = contrast_rows;

    io::atomic_write(out_path(ctx, "casecontrol_report.json"), report.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_mrp(const GlobalArgs& args) {
    using namespace flutrack;
    Context ctx = make_context(args, true);
    std::vector<tax::QueryRecord> queries = load_and_label(ctx);
    const std::string cells_path = ctx.cfg.optional_path("cells");
    const std::string census_path = ctx.cfg.optional_path("census");
    const std::string zipmap_path = ctx.cfg.optional_path("zipmap");
    const int window_days = static_cast<int>(ctx.cfg.get_int("window_days", 3));
    if (cells_path.empty() && census_path.empty())
        ctx.cfg.add_problem("need either 'cells' (pre-binned) or 'census' (raw zipcode rows)");
    if (!cells_path.empty() && zipmap_path.empty())
        ctx.cfg.add_problem("'cells' requires a 'zipmap' file");
    finish_config(ctx);

    std::optional<mrp::CensusTable> census;
    mrp::Zipmap zipmap;
    if (!cells_path.empty()) {
        census.emplace(io::read_cells(cells_path));
        zipmap = io::read_zipmap(zipmap_path);
    } else {
        io::BinnedCensus binned = io::bin_census(io::read_raw_census(census_path));
        census.emplace(std::move(binned.census));
        zipmap = std::move(binned.zipmap);
        log_info("binned raw census into " + std::to_string(census->cells().size()) + " cells");
    }

    const mrp::DailySignal sig = mrp::mrp_signal(queries, *census, zipmap, window_days, ctx.jobs);
    if (sig.dropped_unmapped > 0)
        log_warn("dropped " + std::to_string(sig.dropped_unmapped) + " queries in unmapped zipcodes");
    log_info("mrp signal over " + std::to_string(sig.days.size()) + " days, " +
             std::to_string(sig.scopes.size()) + " scopes");
    io::atomic_write(out_path(ctx, "mrp_signal.csv"), io::write_mrp_signal(sig));
    return 0;
}

// ---------------------------------------------------------------------------

void write_reports(const Context& ctx, const std::vector<flutrack::eval::ForecastRow>& rows) {
    using namespace flutrack;
    eval::CompareOptions copt;
    // season filtering knobs reuse the loaded config when present
    const std::vector<eval::MetricRow> metrics = eval::compare_report(rows, copt);
    io::atomic_write(out_path(ctx, "metrics.csv"), io::write_metrics(metrics));
    for (const auto& m : metrics)
        if (m.winner)
            log_info("best rmse " + m.geo + " h=" + std::to_string(m.horizon) + ": " + m.model +
                     " (" + format_double(m.rmse) + (m.tie ? ", tie" : "") + ")");

    // One chart per (geo, horizon): actuals plus each family's forecasts.
    std::set<std::pair<std::string, int>> keys;
    for (const auto& r : rows) keys.insert({r.geo, r.horizon});
    for (const auto& [geo, horizon] : keys) {
        std::map<std::string, eval::ChartSeries> by_model;
        eval::ChartSeries actual;
        actual.name = "actual";
        std::set<std::int64_t> seen;
        for (const auto& r : rows) {
            if (r.geo != geo || r.horizon != horizon) continue;
            const std::int64_t target = r.origin_week + 7 * r.horizon;
            auto& s = by_model[r.model];
            s.name = r.model;
            s.x.push_back(target);
            s.y.push_back(r.forecast);
            if (seen.insert(target).second) {
                actual.x.push_back(target);
                actual.y.push_back(r.actual);
            }
        }
        std::vector<eval::ChartSeries> series{actual};
        for (auto& [name, s] : by_model) series.push_back(std::move(s));
        for (auto& s : series) {
            std::vector<std::size_t> idx(s.x.size());
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
            std::sort(idx.begin(), idx.end(),
                      [&](std::size_t a, std::size_t b) { return s.x[a] < s.x[b]; });
            eval::ChartSeries sorted;
            sorted.name = s.name;
            for (std::size_t i : idx) {
                sorted.x.push_back(s.x[i]);
                sorted.y.push_back(s.y[i]);
            }
            s = std::move(sorted);
        }
        const std::string title = geo + " forecasts, horizon " + std::to_string(horizon) + "w";
        io::atomic_write(out_path(ctx, "compare_" + geo + "_h" + std::to_string(horizon) + ".svg"),
                         eval::render_line_chart(title, series));
    }
}

int cmd_backtest(const GlobalArgs& args) {
    using namespace flutrack;
    Context ctx = make_context(args, true);
    const std::string ili_path = ctx.cfg.require_path("ili");
    const std::vector<std::string> model_names =
        ctx.cfg.get_string_list("models", {"sarima_hist", "sarima_mrp"});
    std::vector<ts::ModelFamily> families;
    bool needs_mrp = false, needs_panel = false;
    for (const auto& name : model_names) {
        ts::ModelFamily f;
        if (!ts::parse_family(name, f)) {
            ctx.cfg.add_problem("unknown model family '" + name + "'");
            continue;
        }
        families.push_back(f);
        needs_mrp |= f == ts::ModelFamily::SarimaMrp;
        needs_panel |= f == ts::ModelFamily::SarimaA1 || f == ts::ModelFamily::LassoA1;
    }

    ts::BacktestConfig bt;
    bt.train_weeks = static_cast<int>(ctx.cfg.get_int("train_years", 3)) * 52;
    bt.horizons = ctx.cfg.get_int_list("horizons", {1, 2});
    for (int h : bt.horizons)
        if (h != 1 && h != 2) ctx.cfg.add_problem("horizons must be within {1,2}");
    bt.grid.p = ctx.cfg.get_int_list("sarima_p", {0, 1, 2});
    bt.grid.d = ctx.cfg.get_int_list("sarima_d", {0, 1});
    bt.grid.q = ctx.cfg.get_int_list("sarima_q", {0, 1, 2});
    bt.grid.P = ctx.cfg.get_int_list("sarima_P", {0, 1});
    bt.grid.D = ctx.cfg.get_int_list("sarima_D", {0, 1});
    bt.grid.Q = ctx.cfg.get_int_list("sarima_Q", {0, 1});
    bt.grid.s = static_cast<int>(ctx.cfg.get_int("sarima_s", 52));
    bt.lasso_p = static_cast<int>(ctx.cfg.get_int("lasso_p", 52));
    bt.lambda_ladder_size = static_cast<int>(ctx.cfg.get_int("lasso_ladder", 12));
    bt.lambda_min_ratio = ctx.cfg.get_double("lasso_min_ratio", 1e-4);
    bt.sarima_restarts = static_cast<int>(ctx.cfg.get_int("sarima_restarts", 2));
    bt.seed = ctx.seed;
    bt.jobs = ctx.jobs;
    const std::string predict_start = ctx.cfg.get_string("predict_start");
    const std::string predict_end = ctx.cfg.get_string("predict_end");
    if (!predict_start.empty()) bt.origin_min = parse_date(predict_start);
    if (!predict_end.empty()) bt.origin_max = parse_date(predict_end);

    const std::string mrp_path = needs_mrp ? ctx.cfg.require_path("mrp_signal") : "";
    const std::string panel_path = needs_panel ? ctx.cfg.require_path("a1_panel") : "";
    finish_config(ctx);
    if (families.empty()) throw config_error("no valid model families configured");

    const std::vector<ts::IliSeries> targets = io::read_ili(ili_path);
    io::MrpSignalFile mrp_file;
    if (needs_mrp) mrp_file = io::read_mrp_signal(mrp_path);
    ts::A1Panel panel;
    if (needs_panel) panel = io::read_a1_panel(panel_path);

    std::vector<eval::ForecastRow> all_rows;
    for (const auto& target : targets) {
        // National targets use the national MRP scope; states use their own.
        ts::ExogSignal exog;
        if (needs_mrp) {
            const std::string scope = target.geo == "US" ? "national" : target.geo;
            const auto it = mrp_file.by_scope.find(scope);
            if (it == mrp_file.by_scope.end())
                throw config_error("mrp signal has no scope '" + scope + "'");
            // Daily signal -> weekly means on the target's week grid.
            std::vector<std::int64_t> days;
            std::vector<double> values;
            for (const auto& [day, v] : it->second) {
                days.push_back(day);
                values.push_back(v);
            }
            std::map<std::int64_t, double> weekly;
            for (const auto& p : mrp::weekly_aggregate(days, values))
                if (!is_missing(p.value)) weekly[p.week_start] = p.value;
            exog = ts::align_exog(target, weekly);
        }
        ts::A1Panel aligned;
        if (needs_panel) aligned = io::align_panel(panel, target.week_starts);

        for (const ts::ModelFamily family : families) {
            log_info("backtesting " + std::string(ts::family_name(family)) + " on " + target.geo);
            std::vector<eval::ForecastRow> rows =
                ts::rolling_backtest(target, needs_mrp ? &exog : nullptr,
                                     needs_panel ? &aligned : nullptr, family, bt);
            all_rows.insert(all_rows.end(), rows.begin(), rows.end());
        }
    }

    io::atomic_write(out_path(ctx, "forecasts.csv"), io::write_forecasts(all_rows));
    write_reports(ctx, all_rows);
    return 0;
}

int cmd_report(const GlobalArgs& args) {
    using namespace flutrack;
    Context ctx = make_context(args, true);
    const std::string forecasts_path = ctx.cfg.require_path("forecasts");
    finish_config(ctx);
    const std::vector<eval::ForecastRow> rows = io::read_forecasts(forecasts_path);
    write_reports(ctx, rows);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"flu-search signal estimation and forecasting pipeline"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    GlobalArgs args;
    app.add_option("--config", args.config_path, "path to key = value config file");
    app.add_option("--seed", args.seed_override, "override the config seed");
    app.add_option("--jobs", args.jobs, "worker threads (default: available parallelism)");
    app.add_option("--out", args.out_override, "override the output directory");

    struct Sub {
        const char* name;
        const char* desc;
        int (*run)(const GlobalArgs&);
    };
    const Sub subs[] = {
        {"synth", "generate a synthetic world", cmd_synth},
        {"label", "label a query stream and build the A1 panel", cmd_label},
        {"expand", "embedding-based expansion of the A1 seed set", cmd_expand},
        {"casecontrol", "behavioral model fit and risk contrasts", cmd_casecontrol},
        {"mrp", "rolling-window MRP signal", cmd_mrp},
        {"backtest", "rolling-origin forecast backtests", cmd_backtest},
        {"report", "metrics and plots from an existing forecast table", cmd_report},
    };
    std::map<std::string, int (*)(const GlobalArgs&)> dispatch;
    for (const auto& sub : subs) {
        app.add_subcommand(sub.name, sub.desc);
        dispatch[sub.name] = sub.run;
    }

    CLI11_PARSE(app, argc, argv);

    const std::string sub_name = app.get_subcommands().front()->get_name();
    g_cmd = sub_name;
    try {
        return dispatch[sub_name](args);
    } catch (const flutrack::config_error& e) {
        log_line("error", e.what());
        return 1;
    } catch (const std::invalid_argument& e) {
        log_line("error", e.what());
        return 1;
    } catch (const std::exception& e) {
        log_line("error", e.what());
        return 2;
    }
}
