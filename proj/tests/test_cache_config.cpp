#include <doctest.h>

#include <filesystem>

#include "rebound/config.hpp"
#include "rebound/csv.hpp"
#include "rebound/errors.hpp"
#include "rebound/fit_cache.hpp"
#include "rebound/pipeline.hpp"
#include "test_helpers.hpp"

using namespace rebound;
using namespace testutil;

TEST_CASE("fit cache round-trips doubles exactly") {
    const std::string dir = make_temp_dir("cache");
    const std::string path = dir + "/fits.csv";

    LpplFit fit;
    fit.window = {make_day(1990, 1, 1), make_day(1991, 1, 1)};
    fit.params = {1.0 / 3.0, -0.123456789012345678, 0.05, 0.4999999999999999, 2.0 * M_PI,
                  1e-17, 7305.000000001};
    fit.residual_q = 0.0123456789012345678;
    fit.b = -0.9876543210987654321;
    fit.n_obs = 253;

    FitCache cache;
    const FitCache::Key key{0xdeadbeefcafef00dull, fit.window.t1, fit.window.t2};
    cache.append(path, key, {fit});
    cache.append(path, {key.config_hash, key.t1, key.t2 + 50}, {std::nullopt});

    const FitCache back = FitCache::load(path);
    REQUIRE(back.size() == 2);
    const auto* entry = back.find(key);
    REQUIRE(entry != nullptr);
    REQUIRE(entry->fit.has_value());
    const LpplFit& f = *entry->fit;
    CHECK(f.params.A == fit.params.A);
    CHECK(f.params.B == fit.params.B);
    CHECK(f.params.C == fit.params.C);
    CHECK(f.params.m == fit.params.m);
    CHECK(f.params.omega == fit.params.omega);
    CHECK(f.params.phi == fit.params.phi);
    CHECK(f.params.tc == fit.params.tc);
    CHECK(f.residual_q == fit.residual_q);
    CHECK(f.b == fit.b);
    CHECK(f.n_obs == 253);
    const auto* failed = back.find({key.config_hash, key.t1, key.t2 + 50});
    REQUIRE(failed != nullptr);
    CHECK(!failed->fit.has_value());

    // collect_fits skips failures and keeps window order
    const auto fits = collect_fits(back, key.config_hash);
    REQUIRE(fits.size() == 1);
    CHECK(fits[0].window == fit.window);
    // fits under a different hash are invisible
    CHECK(collect_fits(back, 1).empty());
}

TEST_CASE("config hash separates optimizer settings") {
    WindowRules r;
    OptimizerConfig a, b;
    b.seed = a.seed + 1;
    CHECK(fit_config_hash(r, a, 0.375) != fit_config_hash(r, b, 0.375));
    CHECK(fit_config_hash(r, a, 0.375) != fit_config_hash(r, a, 0.5));
    WindowRules r2 = r;
    r2.dt_min = 120;
    CHECK(fit_config_hash(r, a, 0.375) != fit_config_hash(r2, a, 0.375));
    CHECK(fit_config_hash(r, a, 0.375) == fit_config_hash(r, a, 0.375));
}

TEST_CASE("config file parsing") {
    const std::string dir = make_temp_dir("config");
    const std::string path = dir + "/pipeline.conf";
    write_text(path, R"(# example
[data]
price_csv = prices.csv
riskfree_csv = rf.csv

[windows]
dt1_step = 100
dt2_step = 100
dt_min = 130
dt_max = 900

[optimizer]
tabu_iterations = 30
seed = 777
tc_range_factor = 0.25

[rebound]
half_width = 365
proximity_days = 12

[pattern]
qualifications = 5:100, 10:200

[prediction]
learning_cutoff = 1980-06-15
prediction_end = 1999-12-31
step = 25

[evaluation]
bayes_start = 1990-01-01

[trading]
strategies = 0.3:5:7, 0.6:20:10
mc_runs = 250
transaction_cost_bp = 5

[output]
out_dir = results
)");
    const PipelineConfig cfg = PipelineConfig::load(path);
    CHECK(cfg.price_csv == "prices.csv");
    CHECK(cfg.riskfree_csv == "rf.csv");
    CHECK(cfg.window_rules.dt1_step == 100);
    CHECK(cfg.window_rules.dt_min == 130);
    CHECK(cfg.window_rules.dt_max == 900);
    CHECK(cfg.optimizer.tabu_iterations == 30);
    CHECK(cfg.optimizer.seed == 777);
    CHECK(cfg.tc_range_factor == 0.25);
    CHECK(cfg.rebound_half_width == 365);
    CHECK(cfg.proximity_days == 12.0);
    REQUIRE(cfg.qualifications.size() == 2);
    CHECK(cfg.qualifications[0].alpha == 5);
    CHECK(cfg.qualifications[1].beta == 200);
    CHECK(cfg.learning_cutoff == make_day(1980, 6, 15));
    CHECK(cfg.prediction_end == make_day(1999, 12, 31));
    CHECK(cfg.prediction_step == 25);
    CHECK(cfg.bayes_start == make_day(1990, 1, 1));
    REQUIRE(cfg.strategies.size() == 2);
    CHECK(cfg.strategies[0].threshold == 0.3);
    CHECK(cfg.strategies[1].offset == 20);
    CHECK(cfg.mc_runs == 250);
    CHECK(cfg.transaction_cost_bp == 5.0);
    CHECK(cfg.out_dir == "results");
}

TEST_CASE("config rejects unknown keys and bad windows") {
    const std::string dir = make_temp_dir("badconfig");
    write_text(dir + "/bad1.conf", "[data]\nprice_csv = p.csv\n[windows]\ntypo_key = 3\n");
    CHECK_THROWS_AS(PipelineConfig::load(dir + "/bad1.conf"), ParseError);
    write_text(dir + "/bad2.conf", "[data]\nprice_csv = p.csv\n[windows]\ndt_min = 90\n");
    CHECK_THROWS_AS(PipelineConfig::load(dir + "/bad2.conf"), ValidationError);
    write_text(dir + "/bad3.conf", "[windows]\ndt_min = 200\n");
    CHECK_THROWS_AS(PipelineConfig::load(dir + "/bad3.conf"), ValidationError); // no price_csv
}

namespace {

// a small but complete world: planted bubbles, risk-free quotes, config
struct MiniWorld {
    std::string dir;
    PipelineConfig cfg;
};

MiniWorld build_mini_world(const std::string& name, std::uint64_t seed) {
    MiniWorld w;
    w.dir = make_temp_dir(name);
    const Day first = make_day(1990, 1, 1);
    const BubbleWorld world = make_bubble_world(first, 1500, {420, 900, 1300}, seed);
    write_text(w.dir + "/prices.csv", price_series_to_csv(world.prices));
    write_text(w.dir + "/rf.csv", "date,rate\n1990-01-01,4.0\n");

    PipelineConfig cfg;
    cfg.price_csv = w.dir + "/prices.csv";
    cfg.riskfree_csv = w.dir + "/rf.csv";
    cfg.window_rules = {100, 100, 110, 700};
    cfg.optimizer.tabu_iterations = 12;
    cfg.optimizer.tabu_neighbors = 6;
    cfg.optimizer.restarts = 2;
    cfg.optimizer.lm_max_iterations = 40;
    cfg.optimizer.seed = 4242;
    cfg.rebound_half_width = 150;
    cfg.proximity_days = 15.0;
    cfg.qualifications = {{2, 120}};
    cfg.learning_cutoff = first + 1050;
    cfg.prediction_step = 50;
    cfg.bayes_start = first + 1200;
    cfg.strategies = {{0.2, 5, 5}};
    cfg.mc_runs = 40;
    cfg.out_dir = w.dir + "/out";
    cfg.validate();
    w.cfg = cfg;
    return w;
}

std::vector<std::string> artifact_names(const PipelineConfig& cfg) {
    std::vector<std::string> names{"windows.csv", "fits.csv", "rebounds.csv",
                                   "informative_params.csv"};
    for (const auto& q : cfg.qualifications) {
        const std::string tag = qualification_tag(q);
        names.push_back("features_" + tag + ".csv");
        names.push_back("alarm_learning_" + tag + ".csv");
        names.push_back("alarm_prediction_" + tag + ".csv");
        names.push_back("prediction_audit_" + tag + ".csv");
        names.push_back("error_diagram_learning_" + tag + ".csv");
        names.push_back("error_diagram_prediction_" + tag + ".csv");
        names.push_back("bayes_" + tag + ".csv");
        names.push_back("trades_" + tag + "_s1.csv");
        names.push_back("report_" + tag + "_s1.json");
    }
    names.push_back("report.json");
    return names;
}

void run_all_stages(const PipelineConfig& cfg, int jobs) {
    cmd_windows(cfg);
    cmd_fit_all(cfg, jobs);
    cmd_learn(cfg);
    cmd_predict(cfg);
    cmd_evaluate(cfg);
    cmd_backtest(cfg);
    cmd_report(cfg);
}

} // namespace

TEST_CASE("pipeline stages fail fast when run out of order") {
    MiniWorld w = build_mini_world("order", 5);
    CHECK_THROWS_AS(cmd_fit_all(w.cfg, 1), StateError);   // windows missing
    CHECK_THROWS_AS(cmd_learn(w.cfg), StateError);        // fits missing
    CHECK_THROWS_AS(cmd_predict(w.cfg), StateError);
    CHECK_THROWS_AS(cmd_evaluate(w.cfg), StateError);
    CHECK_THROWS_AS(cmd_backtest(w.cfg), StateError);
}

TEST_CASE("mini pipeline: determinism across reruns and worker counts") {
    MiniWorld a = build_mini_world("det_a", 5);
    MiniWorld b = build_mini_world("det_b", 5);

    run_all_stages(a.cfg, 1);
    run_all_stages(b.cfg, 4);

    for (const std::string& name : artifact_names(a.cfg)) {
        INFO("artifact ", name);
        REQUIRE(csv::file_exists(out_path(a.cfg, name)));
        REQUIRE(csv::file_exists(out_path(b.cfg, name)));
        CHECK(csv::read_file(out_path(a.cfg, name)) == csv::read_file(out_path(b.cfg, name)));
    }

    // warm rerun rewrites identical bytes and refits nothing
    const std::string fits_before = csv::read_file(out_path(a.cfg, "fits.csv"));
    const StageSummary again = cmd_fit_all(a.cfg, 2);
    CHECK(again.text.find("(0 new") != std::string::npos);
    CHECK(csv::read_file(out_path(a.cfg, "fits.csv")) == fits_before);
    cmd_learn(a.cfg);
    cmd_predict(a.cfg);
    cmd_evaluate(a.cfg);
    cmd_backtest(a.cfg);
    cmd_report(a.cfg);
    for (const std::string& name : artifact_names(a.cfg)) {
        INFO("artifact ", name);
        CHECK(csv::read_file(out_path(a.cfg, name)) == csv::read_file(out_path(b.cfg, name)));
    }
}
