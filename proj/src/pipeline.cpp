#include "rebound/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <thread>

#include <json.hpp>

#include "rebound/csv.hpp"
#include "rebound/errors.hpp"
#include "rebound/evaluation.hpp"
#include "rebound/fit_cache.hpp"

namespace rebound {

namespace {

namespace fs = std::filesystem;

void ensure_out_dir(const PipelineConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + cfg.out_dir + ": " + ec.message());
}

std::string require(const PipelineConfig& cfg, const std::string& name,
                    const std::string& producer) {
    const std::string path = out_path(cfg, name);
    if (!csv::file_exists(path))
        throw StateError("missing " + path + "; run `rebound " + producer + "` first");
    return path;
}

PriceSeries load_prices(const PipelineConfig& cfg) {
    if (!csv::file_exists(cfg.price_csv))
        throw IoError("price data not found: " + cfg.price_csv);
    return load_price_csv(cfg.price_csv);
}

Day prediction_end(const PipelineConfig& cfg, const PriceSeries& prices) {
    return cfg.prediction_end.value_or(prices.last_day());
}

struct FitsBundle {
    std::vector<LpplFit> fits;
    std::uint64_t config_hash;
};

FitsBundle load_fits(const PipelineConfig& cfg) {
    const std::string path = require(cfg, "fits.csv", "fit-all");
    FitsBundle out;
    out.config_hash = fit_config_hash(cfg.window_rules, cfg.optimizer, cfg.tc_range_factor);
    out.fits = collect_fits(FitCache::load(path), out.config_hash);
    if (out.fits.empty())
        throw StateError("fit cache has no fits for this configuration; rerun `rebound fit-all`");
    return out;
}

std::string summary_done(const std::string& text) {
    std::cout << text << "\n";
    return text;
}

} // namespace

std::string qualification_tag(const FeatureQualification& q) {
    return "q" + std::to_string(q.alpha) + "_" + std::to_string(q.beta);
}

std::string out_path(const PipelineConfig& cfg, const std::string& name) {
    return (fs::path(cfg.out_dir) / name).string();
}

StageSummary cmd_windows(const PipelineConfig& cfg) {
    ensure_out_dir(cfg);
    const PriceSeries prices = load_prices(cfg);
    const Day anchor = cfg.t1_anchor.value_or(prices.first_day());
    const auto windows = generate_windows(anchor, prices.last_day(), cfg.window_rules);
    csv::write_file(out_path(cfg, "windows.csv"), windows_to_csv(windows));
    return {summary_done("windows: " + std::to_string(windows.size()) + " windows (" +
                         format_date(anchor) + ".." + format_date(prices.last_day()) + ")")};
}

StageSummary cmd_fit_all(const PipelineConfig& cfg, int jobs) {
    ensure_out_dir(cfg);
    if (jobs < 1) jobs = 1;
    const PriceSeries prices = load_prices(cfg);
    const PriceSeries logp = log_prices(prices);
    const auto windows = windows_from_csv(csv::read_file(require(cfg, "windows.csv", "windows")));
    const std::string cache_path = out_path(cfg, "fits.csv");
    FitCache cache = FitCache::load(cache_path);
    const std::uint64_t hash =
        fit_config_hash(cfg.window_rules, cfg.optimizer, cfg.tc_range_factor);

    // pending windows, each with a seed derived from (master seed, window index)
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < windows.size(); ++i)
        if (!cache.contains({hash, windows[i].t1, windows[i].t2})) pending.push_back(i);

    std::vector<FitCache::Entry> results(pending.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t slot = next.fetch_add(1);
            if (slot >= pending.size()) break;
            const WindowSpec w = windows[pending[slot]];
            OptimizerConfig oc = cfg.optimizer;
            oc.seed = mix_seed(cfg.optimizer.seed, pending[slot]);
            FitCache::Entry entry;
            try {
                const PriceSeries slice = slice_window(logp, w);
                entry.fit = fit_window(slice, w, SearchBounds::for_window(w, cfg.tc_range_factor),
                                       oc);
            } catch (const Error&) {
                entry.fit.reset(); // failed window: logged, excluded downstream
            }
            results[slot] = std::move(entry);
        }
    };
    if (!pending.empty()) {
        std::vector<std::thread> pool;
        const int n_threads =
            std::clamp<int>(jobs, 1, static_cast<int>(pending.size()));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    // single-threaded append in window order keeps the cache deterministic
    for (std::size_t slot = 0; slot < pending.size(); ++slot) {
        const WindowSpec w = windows[pending[slot]];
        cache.append(cache_path, {hash, w.t1, w.t2}, results[slot]);
    }

    std::size_t negative = 0, failed = 0, omega_hi = 0;
    std::size_t total = 0;
    for (const auto& w : windows) {
        const auto* e = cache.find({hash, w.t1, w.t2});
        if (!e) continue;
        ++total;
        if (!e->fit) {
            ++failed;
            continue;
        }
        if (classify_fit(*e->fit) == BubbleClass::NegativeBubble) ++negative;
        if (e->fit->params.omega > cfg.omega_filter_max) ++omega_hi;
    }
    return {summary_done("fit-all: " + std::to_string(total) + " windows (" +
                         std::to_string(pending.size()) + " new, " + std::to_string(failed) +
                         " failed), " + std::to_string(negative) + " negative-bubble fits, " +
                         std::to_string(omega_hi) + " with omega > " +
                         csv::format_double(cfg.omega_filter_max) + " (diagnostic)")};
}

StageSummary cmd_learn(const PipelineConfig& cfg) {
    ensure_out_dir(cfg);
    const PriceSeries prices = load_prices(cfg);
    const FitsBundle bundle = load_fits(cfg);

    const ReboundSet rebounds = detect_rebounds(prices, cfg.rebound_half_width);
    csv::write_file(out_path(cfg, "rebounds.csv"), rebounds_to_csv(rebounds));

    const std::vector<LpplFit> learning = learning_subset(bundle.fits, cfg.learning_cutoff);
    if (learning.empty())
        throw StateError("no fits fall before the learning cutoff " +
                         format_date(cfg.learning_cutoff));

    bool any_class_I = false;
    for (const auto& f : learning)
        if (assign_class(f, rebounds, cfg.proximity_days) == ClassLabel::ClassI) {
            any_class_I = true;
            break;
        }
    if (!any_class_I)
        throw StateError("no rebounds in learning period: every learning fit is Class II");

    const auto ips = find_informative_params(learning, rebounds, cfg.proximity_days,
                                             cfg.ks_threshold, cfg.kde_grid);
    csv::write_file(out_path(cfg, "informative_params.csv"), informative_params_to_csv(ips));

    // daily learning scan from the earliest learning t_c up to the cutoff
    double min_tc = std::numeric_limits<double>::infinity();
    for (const auto& f : learning) min_tc = std::min(min_tc, f.params.tc);
    const Day scan_first = static_cast<Day>(std::floor(min_tc));
    const Day scan_last = cfg.learning_cutoff - 1;
    const auto questionnaires =
        scan_questionnaires(learning, ips, cfg.proximity_days, scan_first, scan_last);
    const TraitBags bags = build_trait_bags(questionnaires, rebounds, cfg.proximity_days);

    std::string counts;
    for (const auto& q : cfg.qualifications) {
        const FeatureSet features = extract_features(bags, q);
        const std::string tag = qualification_tag(q);
        csv::write_file(out_path(cfg, "features_" + tag + ".csv"), features_to_csv(features));
        const AlarmSeries learn_alarm = learning_alarm_series(questionnaires, features);
        csv::write_file(out_path(cfg, "alarm_learning_" + tag + ".csv"),
                        alarm_series_to_csv(learn_alarm));
        counts += " " + tag + ":" + std::to_string(features.class_I.size()) + "/" +
                  std::to_string(features.class_II.size());
    }
    return {summary_done("learn: " + std::to_string(learning.size()) + " learning fits, " +
                         std::to_string(rebounds.size()) + " rebounds, " +
                         std::to_string(ips.size()) +
                         " informative params, features I/II per qualification:" + counts)};
}

StageSummary cmd_predict(const PipelineConfig& cfg) {
    ensure_out_dir(cfg);
    const PriceSeries prices = load_prices(cfg);
    const FitsBundle bundle = load_fits(cfg);
    require(cfg, "informative_params.csv", "learn");
    const auto ips =
        informative_params_from_csv(csv::read_file(out_path(cfg, "informative_params.csv")));

    const Day t_end = prediction_end(cfg, prices);
    std::string blocks;
    for (const auto& q : cfg.qualifications) {
        const std::string tag = qualification_tag(q);
        const std::string feat_path = require(cfg, "features_" + tag + ".csv", "learn");
        const FeatureSet features = features_from_csv(csv::read_file(feat_path));
        std::vector<PredictionAudit> audit;
        const AlarmSeries alarm =
            predict_series(bundle.fits, ips, features, cfg.learning_cutoff, t_end,
                           cfg.prediction_step, cfg.proximity_days, &audit);
        csv::write_file(out_path(cfg, "alarm_prediction_" + tag + ".csv"),
                        alarm_series_to_csv(alarm));
        std::string audit_csv = "grid_date,max_t2_used\n";
        for (const auto& a : audit) {
            audit_csv += format_date(a.grid_day);
            audit_csv += ',';
            if (a.any_fit_used) audit_csv += format_date(a.max_t2_used);
            audit_csv += '\n';
        }
        csv::write_file(out_path(cfg, "prediction_audit_" + tag + ".csv"), audit_csv);
        blocks = std::to_string(audit.size());
    }
    return {summary_done("predict: " + blocks + " grid blocks, " +
                         format_date(cfg.learning_cutoff) + ".." + format_date(t_end))};
}

StageSummary cmd_evaluate(const PipelineConfig& cfg) {
    ensure_out_dir(cfg);
    const PriceSeries prices = load_prices(cfg);
    const ReboundSet rebounds =
        rebounds_from_csv(csv::read_file(require(cfg, "rebounds.csv", "learn")));

    std::string note;
    for (const auto& q : cfg.qualifications) {
        const std::string tag = qualification_tag(q);
        const AlarmSeries pred = alarm_series_from_csv(
            csv::read_file(require(cfg, "alarm_prediction_" + tag + ".csv", "predict")));
        const AlarmSeries learn = alarm_series_from_csv(
            csv::read_file(require(cfg, "alarm_learning_" + tag + ".csv", "learn")));

        ReboundSet pred_reb;
        pred_reb.half_width = rebounds.half_width;
        for (Day d : rebounds.dates)
            if (pred.covers(d)) pred_reb.dates.push_back(d);
        if (pred_reb.empty())
            std::cerr << "warning: no rebounds inside the prediction period; empty diagram\n";

        const auto diagram_pred =
            error_diagram(pred, pred_reb, cfg.alarm_duration, cfg.alarm_center_offset);
        csv::write_file(out_path(cfg, "error_diagram_prediction_" + tag + ".csv"),
                        error_diagram_to_csv(diagram_pred));

        ReboundSet learn_reb;
        learn_reb.half_width = rebounds.half_width;
        for (Day d : rebounds.dates)
            if (learn.covers(d)) learn_reb.dates.push_back(d);
        const auto diagram_learn =
            error_diagram(learn, learn_reb, cfg.alarm_duration, cfg.alarm_center_offset);
        csv::write_file(out_path(cfg, "error_diagram_learning_" + tag + ".csv"),
                        error_diagram_to_csv(diagram_learn));

        const Day default_start = std::max<Day>(make_day(1985, 1, 1), pred.first);
        const Day bayes_first = cfg.bayes_start.value_or(default_start);
        const auto rows = bayes_scan(pred, prices, cfg.rebound_half_width, bayes_first,
                                     pred.last_day(), cfg.bayes_step, cfg.rebound_width,
                                     cfg.bayes_neighborhood);
        csv::write_file(out_path(cfg, "bayes_" + tag + ".csv"), bayes_rows_to_csv(rows));
        note = std::to_string(diagram_pred.size()) + " prediction diagram points, " +
               std::to_string(rows.size()) + " bayes rows";
    }
    return {summary_done("evaluate: " + note)};
}

StageSummary cmd_backtest(const PipelineConfig& cfg) {
    ensure_out_dir(cfg);
    const PriceSeries prices = load_prices(cfg);
    if (cfg.riskfree_csv.empty())
        throw ValidationError(
            "backtest needs excess returns: set data.riskfree_csv in the config");
    if (!csv::file_exists(cfg.riskfree_csv))
        throw IoError("risk-free data not found: " + cfg.riskfree_csv);
    const RiskFreeSeries rf = load_riskfree_csv(cfg.riskfree_csv);

    std::string note;
    for (const auto& q : cfg.qualifications) {
        const std::string tag = qualification_tag(q);
        const AlarmSeries pred = alarm_series_from_csv(
            csv::read_file(require(cfg, "alarm_prediction_" + tag + ".csv", "predict")));
        for (std::size_t s = 0; s < cfg.strategies.size(); ++s) {
            const StrategyParams& params = cfg.strategies[s];
            const auto intervals = generate_trades(pred, params);
            const auto trades = price_trades(intervals, prices, rf, cfg.transaction_cost_bp);
            StrategyReport report = score_trades(
                trades, params, static_cast<std::int64_t>(pred.size()));
            if (!trades.empty()) {
                const auto baseline = random_trade_baseline(
                    prices, rf, pred.first, pred.last_day(),
                    static_cast<int>(std::lround(report.avg_trade_duration)));
                report.sharpe_random_baseline = baseline.sharpe;
                report.bias_random_baseline = baseline.bias;
                const auto pv = random_strategy_pvalue(
                    report, prices, rf, pred.first, pred.last_day(), cfg.mc_runs,
                    mix_seed(cfg.optimizer.seed, 0xB7E57 + s), cfg.transaction_cost_bp);
                report.p_value_excess = pv.p_excess;
                report.p_value_sharpe = pv.p_sharpe;
                report.p_value_bias = pv.p_bias;
            }
            const std::string stem = tag + "_s" + std::to_string(s + 1);
            csv::write_file(out_path(cfg, "trades_" + stem + ".csv"),
                            trades_to_csv(report.trades));
            csv::write_file(out_path(cfg, "report_" + stem + ".json"), report_to_json(report));
            note += (note.empty() ? "" : ", ") + stem + ": " +
                    std::to_string(report.trades.size()) + " trades";
        }
    }
    return {summary_done("backtest: " + note)};
}

StageSummary cmd_report(const PipelineConfig& cfg) {
    ensure_out_dir(cfg);
    nlohmann::ordered_json j;

    if (csv::file_exists(out_path(cfg, "windows.csv")))
        j["windows"] =
            windows_from_csv(csv::read_file(out_path(cfg, "windows.csv"))).size();
    if (csv::file_exists(out_path(cfg, "fits.csv"))) {
        const FitsBundle bundle = load_fits(cfg);
        std::size_t negative = 0;
        for (const auto& f : bundle.fits)
            if (classify_fit(f) == BubbleClass::NegativeBubble) ++negative;
        j["fits"] = bundle.fits.size();
        j["negative_bubble_fits"] = negative;
        j["learning_fits"] = learning_subset(bundle.fits, cfg.learning_cutoff).size();
    }
    if (csv::file_exists(out_path(cfg, "rebounds.csv"))) {
        const auto reb = rebounds_from_csv(csv::read_file(out_path(cfg, "rebounds.csv")));
        j["rebounds"] = reb.dates.size();
        j["rebound_half_width"] = reb.half_width;
    }
    if (csv::file_exists(out_path(cfg, "informative_params.csv")))
        j["informative_params"] =
            informative_params_from_csv(
                csv::read_file(out_path(cfg, "informative_params.csv")))
                .size();
    for (const auto& q : cfg.qualifications) {
        const std::string tag = qualification_tag(q);
        if (!csv::file_exists(out_path(cfg, "features_" + tag + ".csv"))) continue;
        const FeatureSet f =
            features_from_csv(csv::read_file(out_path(cfg, "features_" + tag + ".csv")));
        j["features"][tag]["class_I"] = f.class_I.size();
        j["features"][tag]["class_II"] = f.class_II.size();
        for (std::size_t s = 0; s < cfg.strategies.size(); ++s) {
            const std::string stem = tag + "_s" + std::to_string(s + 1);
            const std::string rp = out_path(cfg, "report_" + stem + ".json");
            if (csv::file_exists(rp))
                j["strategies"][stem] = nlohmann::ordered_json::parse(csv::read_file(rp));
        }
    }
    const std::string text = j.dump(2) + "\n";
    csv::write_file(out_path(cfg, "report.json"), text);
    std::cout << text;
    return {"report written to " + out_path(cfg, "report.json")};
}

} // namespace rebound
