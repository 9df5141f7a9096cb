// Command-line front end for the rebound-diagnosis pipeline. Stages run in
// the order windows -> fit-all -> learn -> predict -> evaluate/backtest;
// each verb reads its inputs from --out and fails fast when upstream
// artifacts are missing.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rebound/errors.hpp"
#include "rebound/pipeline.hpp"

namespace {

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    int jobs = 1;
};

rebound::PipelineConfig load_config(const GlobalOptions& g) {
    rebound::PipelineConfig cfg = rebound::PipelineConfig::load(g.config_path);
    if (g.seed) cfg.optimizer.seed = *g.seed;
    if (g.out_dir) cfg.out_dir = *g.out_dir;
    cfg.validate();
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"LPPL negative-bubble rebound diagnosis pipeline"};
    app.require_subcommand(1);

    GlobalOptions g;
    app.add_option("--config", g.config_path, "pipeline config file (key = value sections)")
        ->required();
    app.add_option("--seed", g.seed, "override [optimizer] seed");
    app.add_option("--out", g.out_dir, "override [output] out_dir");
    app.add_option("--jobs", g.jobs, "worker threads for fit-all")->default_val(1);

    auto* windows = app.add_subcommand("windows", "generate the sliding fitting windows");
    auto* fit_all = app.add_subcommand("fit-all", "calibrate every window (resumes from cache)");
    auto* learn = app.add_subcommand("learn", "informative parameters, features, learning alarm");
    auto* predict = app.add_subcommand("predict", "walk-forward rebound alarm index");
    auto* evaluate = app.add_subcommand("evaluate", "error diagrams and Bayesian probabilities");
    auto* backtest = app.add_subcommand("backtest", "trading strategies and significance tests");
    auto* report = app.add_subcommand("report", "aggregate summary of all artifacts");

    CLI11_PARSE(app, argc, argv);

    try {
        const rebound::PipelineConfig cfg = load_config(g);
        if (windows->parsed()) rebound::cmd_windows(cfg);
        if (fit_all->parsed()) rebound::cmd_fit_all(cfg, g.jobs);
        if (learn->parsed()) rebound::cmd_learn(cfg);
        if (predict->parsed()) rebound::cmd_predict(cfg);
        if (evaluate->parsed()) rebound::cmd_evaluate(cfg);
        if (backtest->parsed()) rebound::cmd_backtest(cfg);
        if (report->parsed()) rebound::cmd_report(cfg);
        return 0;
    } catch (const rebound::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
