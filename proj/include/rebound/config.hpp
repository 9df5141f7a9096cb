#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rebound/optimizer.hpp"
#include "rebound/pattern.hpp"
#include "rebound/trading.hpp"

namespace rebound {

// Everything a pipeline run needs, read from a flat key=value file with
// [section] headers. Every constant of the method is a key here with its
// standard default, so sensitivity studies need no recompilation.
struct PipelineConfig {
    // [data]
    std::string price_csv;
    std::string riskfree_csv; // optional; required only by `backtest`

    // [windows]
    WindowRules window_rules;
    std::optional<Day> t1_anchor; // default: first data date

    // [optimizer]
    OptimizerConfig optimizer;
    double tc_range_factor = 0.375;

    // [rebound]
    int rebound_half_width = 200;
    double proximity_days = 10.0; // D

    // [pattern]
    double ks_threshold = 0.05;
    int kde_grid = 512;
    std::vector<FeatureQualification> qualifications{{10, 200}};
    double omega_filter_max = 20.0; // diagnostic report only; learning never filters

    // [prediction]
    Day learning_cutoff = 0;           // default set to 1975-01-01 in the ctor
    std::optional<Day> prediction_end; // default: last data date
    int prediction_step = 50;

    // [evaluation]
    int alarm_duration = 41;
    int alarm_center_offset = 0;
    int rebound_width = 21; // D_rw
    int bayes_neighborhood = 20;
    std::optional<Day> bayes_start; // default: 1985-01-01 clipped into the span
    int bayes_step = 1;

    // [trading]
    std::vector<StrategyParams> strategies{{0.2, 10, 10}, {0.7, 30, 10}};
    int mc_runs = 1000;
    double transaction_cost_bp = 0.0;

    // [output]
    std::string out_dir = "out";

    PipelineConfig();

    static PipelineConfig load(const std::string& path);
    void validate() const;
};

} // namespace rebound
