#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>
#include <fstream>
#include <sstream>
#include <string>

#include "flutrack/common.hpp"

namespace fs = std::filesystem;

namespace {

const char* cli_path() { return FLUTRACK_CLI_PATH; }

struct RunResult {
    int exit_code = -1;
    std::string stderr_text;
};

RunResult run_cli(const std::string& args, const fs::path& dir) {
    const fs::path errfile = dir / "stderr.txt";
    const std::string cmd =
        std::string(cli_path()) + " " + args + " 2>" + errfile.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WEXITSTATUS(status);
    std::ifstream in(errfile);
    std::ostringstream ss;
    ss << in.rdbuf();
    r.stderr_text = ss.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("flutrack_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// A deliberately small world so the end-to-end chain stays quick.
std::string small_world_config(const fs::path& dir) {
    std::ostringstream cfg;
    cfg << "seed = 11\n"
        << "out = " << (dir / "out").string() << "\n"
        << "synth_states = 3\n"
        << "synth_cells_per_state = 5\n"
        << "synth_weeks = 160\n"
        << "synth_queries_per_day = 120\n"
        << "synth_state_counts = 0\n";
    return cfg.str();
}

std::string pipeline_keys(const fs::path& out_dir) {
    std::ostringstream cfg;
    cfg << "queries = " << (out_dir / "queries.csv").string() << "\n"
        << "rules = " << (out_dir / "rules.tsv").string() << "\n"
        << "cells = " << (out_dir / "cells.csv").string() << "\n"
        << "zipmap = " << (out_dir / "zipmap.csv").string() << "\n"
        << "ili = " << (out_dir / "ili.csv").string() << "\n"
        << "casecontrol = " << (out_dir / "casecontrol.csv").string() << "\n"
        << "mrp_signal = " << (out_dir / "mrp_signal.csv").string() << "\n"
        << "a1_panel = " << (out_dir / "a1_panel.csv").string() << "\n"
        << "models = sarima_hist,sarima_mrp,lasso_hist\n"
        << "sarima_p = 0,1\n"
        << "sarima_d = 0,1\n"
        << "sarima_q = 0,1\n"
        << "sarima_P = 0,1\n"
        << "sarima_D = 0\n"
        << "sarima_Q = 0\n"
        << "sarima_restarts = 1\n"
        << "lasso_ladder = 10\n";
    return cfg.str();
}

} // namespace

TEST_CASE("cli end to end: synth, label, mrp, casecontrol, backtest, report") {
    const fs::path dir = fresh_dir("e2e");
    const fs::path out = dir / "out";
    const fs::path cfg_path = dir / "config.txt";
    write_file(cfg_path, small_world_config(dir) + pipeline_keys(out));

    RunResult r = run_cli("synth --config " + cfg_path.string(), dir);
    INFO(r.stderr_text);
    REQUIRE(r.exit_code == 0);
    for (const char* name : {"queries.csv", "cells.csv", "zipmap.csv", "ili.csv", "rules.tsv",
                             "casecontrol.csv", "truth_daily.csv"})
        REQUIRE(fs::exists(out / name));

    r = run_cli("label --config " + cfg_path.string(), dir);
    INFO(r.stderr_text);
    REQUIRE(r.exit_code == 0);
    REQUIRE(fs::exists(out / "labeled_queries.csv"));
    REQUIRE(fs::exists(out / "a1_panel.csv"));

    r = run_cli("mrp --config " + cfg_path.string(), dir);
    INFO(r.stderr_text);
    REQUIRE(r.exit_code == 0);
    REQUIRE(fs::exists(out / "mrp_signal.csv"));

    r = run_cli("casecontrol --config " + cfg_path.string(), dir);
    INFO(r.stderr_text);
    REQUIRE(r.exit_code == 0);
    const std::string report = slurp(out / "casecontrol_report.json");
    REQUIRE(report.find("\"contrasts\"") != std::string::npos);
    REQUIRE(report.find("hh_ili") != std::string::npos);

    r = run_cli("backtest --config " + cfg_path.string(), dir);
    INFO(r.stderr_text);
    REQUIRE(r.exit_code == 0);
    REQUIRE(fs::exists(out / "forecasts.csv"));
    REQUIRE(fs::exists(out / "metrics.csv"));
    REQUIRE(fs::exists(out / "compare_US_h1.svg"));
    REQUIRE(fs::exists(out / "compare_US_h2.svg"));

    // report regenerates metrics from forecasts.csv alone
    const std::string metrics_before = slurp(out / "metrics.csv");
    write_file(dir / "report_cfg.txt",
               "forecasts = " + (out / "forecasts.csv").string() + "\nout = " + out.string() + "\n");
    r = run_cli("report --config " + (dir / "report_cfg.txt").string(), dir);
    INFO(r.stderr_text);
    REQUIRE(r.exit_code == 0);
    REQUIRE(slurp(out / "metrics.csv") == metrics_before);

    // no partial temp files survive
    for (const auto& entry : fs::directory_iterator(out))
        REQUIRE(entry.path().extension() != ".tmp");
}

TEST_CASE("cli expand ranks candidates for review") {
    const fs::path dir = fresh_dir("expand");
    const fs::path out = dir / "out";
    const fs::path cfg_path = dir / "config.txt";
    write_file(cfg_path, small_world_config(dir) + pipeline_keys(out) +
                             "expand_k = 5\nemb_epochs = 2\nemb_dim = 16\n");
    REQUIRE(run_cli("synth --config " + cfg_path.string(), dir).exit_code == 0);
    const RunResult r = run_cli("expand --config " + cfg_path.string(), dir);
    INFO(r.stderr_text);
    REQUIRE(r.exit_code == 0);
    REQUIRE(fs::exists(out / "expansion.csv"));
    REQUIRE(fs::exists(out / "embeddings.txt"));
    const std::string expansion = slurp(out / "expansion.csv");
    REQUIRE(expansion.rfind("normalized_text,similarity\n", 0) == 0);
}

TEST_CASE("cli validation failures exit 1 with helpful messages") {
    const fs::path dir = fresh_dir("validation");

    SECTION("missing config keys are listed together") {
        write_file(dir / "cfg.txt", "seed = 1\n");
        const RunResult r = run_cli("mrp --config " + (dir / "cfg.txt").string(), dir);
        REQUIRE(r.exit_code == 1);
        REQUIRE(r.stderr_text.find("queries") != std::string::npos);
        REQUIRE(r.stderr_text.find("rules") != std::string::npos);
    }
    SECTION("malformed query rows name the line") {
        const fs::path out = dir / "out";
        fs::create_directories(out);
        write_file(dir / "queries.csv", "timestamp,zipcode,raw_text\n100,12345,ok\nnotanumber,99999,bad\n");
        write_file(dir / "rules.tsv", "flu\tA1\n");
        write_file(dir / "cfg.txt", "queries = " + (dir / "queries.csv").string() +
                                        "\nrules = " + (dir / "rules.tsv").string() +
                                        "\nout = " + out.string() + "\n");
        const RunResult r = run_cli("label --config " + (dir / "cfg.txt").string(), dir);
        REQUIRE(r.exit_code == 1);
        REQUIRE(r.stderr_text.find(":3") != std::string::npos); // line number of the bad row
    }
    SECTION("unknown model families are rejected") {
        write_file(dir / "cfg.txt", "ili = /nonexistent.csv\nmodels = sarima_quantum\n");
        const RunResult r = run_cli("backtest --config " + (dir / "cfg.txt").string(), dir);
        REQUIRE(r.exit_code == 1);
        REQUIRE(r.stderr_text.find("sarima_quantum") != std::string::npos);
    }
    SECTION("a missing subcommand is a usage error") {
        const RunResult r = run_cli("", dir);
        REQUIRE(r.exit_code != 0);
    }
}

TEST_CASE("cli reruns are byte-identical") {
    const fs::path dir = fresh_dir("determinism");
    const fs::path cfg_path = dir / "config.txt";
    const fs::path out1 = dir / "out1";
    const fs::path out2 = dir / "out2";
    write_file(cfg_path, small_world_config(dir));

    REQUIRE(run_cli("synth --config " + cfg_path.string() + " --out " + out1.string(), dir).exit_code == 0);
    REQUIRE(run_cli("synth --config " + cfg_path.string() + " --out " + out2.string(), dir).exit_code == 0);
    for (const auto& entry : fs::directory_iterator(out1)) {
        const fs::path other = out2 / entry.path().filename();
        REQUIRE(fs::exists(other));
        REQUIRE(slurp(entry.path()) == slurp(other));
    }
}
