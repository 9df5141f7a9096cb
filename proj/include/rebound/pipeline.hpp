#pragma once

#include <string>

#include "rebound/config.hpp"

namespace rebound {

// Stage runners behind the CLI verbs. Each is a pure function of
// (inputs, config, seed): rerunning with unchanged inputs rewrites the same
// bytes. Stages fail fast with StateError when an upstream artifact is
// missing.
//
// Artifacts under cfg.out_dir:
//   windows.csv                                  (windows)
//   fits.csv                                     (fit-all; append-only cache)
//   rebounds.csv                                 (learn)
//   informative_params.csv                       (learn)
//   features_q{a}_{b}.csv                        (learn, per qualification)
//   alarm_learning_q{a}_{b}.csv                  (learn, per qualification)
//   alarm_prediction_q{a}_{b}.csv                (predict, per qualification)
//   prediction_audit_q{a}_{b}.csv                (predict, per qualification)
//   error_diagram_{learning,prediction}_q{a}_{b}.csv   (evaluate)
//   bayes_q{a}_{b}.csv                           (evaluate)
//   trades_q{a}_{b}_s{i}.csv, report_q{a}_{b}_s{i}.json (backtest)
//   report.json                                  (report)

struct StageSummary {
    std::string text; // human-readable stage outcome, already printed
};

StageSummary cmd_windows(const PipelineConfig& cfg);
StageSummary cmd_fit_all(const PipelineConfig& cfg, int jobs = 1);
StageSummary cmd_learn(const PipelineConfig& cfg);
StageSummary cmd_predict(const PipelineConfig& cfg);
StageSummary cmd_evaluate(const PipelineConfig& cfg);
StageSummary cmd_backtest(const PipelineConfig& cfg);
StageSummary cmd_report(const PipelineConfig& cfg);

// Helpers shared with the tests.
std::string qualification_tag(const FeatureQualification& q);
std::string out_path(const PipelineConfig& cfg, const std::string& name);

} // namespace rebound
