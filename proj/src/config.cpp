#include "rebound/config.hpp"

#include <sstream>

#include "rebound/csv.hpp"
#include "rebound/errors.hpp"

namespace rebound {

PipelineConfig::PipelineConfig() { learning_cutoff = make_day(1975, 1, 1); }

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    size_t e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

int to_int(const std::string& v, const std::string& key) {
    try {
        size_t pos = 0;
        const int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ParseError("config: key '" + key + "' expects an integer, got '" + v + "'");
    }
}

std::vector<FeatureQualification> parse_qualifications(const std::string& v) {
    // "10:200,20:1000"
    std::vector<FeatureQualification> out;
    std::istringstream in(v);
    std::string part;
    while (std::getline(in, part, ',')) {
        part = trim(part);
        if (part.empty()) continue;
        const auto colon = part.find(':');
        if (colon == std::string::npos)
            throw ParseError("config: qualification '" + part + "' expects alpha:beta");
        out.push_back({to_int(trim(part.substr(0, colon)), "qualifications"),
                       to_int(trim(part.substr(colon + 1)), "qualifications")});
    }
    if (out.empty()) throw ParseError("config: qualifications list is empty");
    return out;
}

std::vector<StrategyParams> parse_strategies(const std::string& v) {
    // "0.2:10:10,0.7:30:10" as Th:Os:Hp
    std::vector<StrategyParams> out;
    std::istringstream in(v);
    std::string part;
    while (std::getline(in, part, ',')) {
        part = trim(part);
        if (part.empty()) continue;
        std::istringstream fields(part);
        std::string th, os, hp;
        if (!std::getline(fields, th, ':') || !std::getline(fields, os, ':') ||
            !std::getline(fields, hp, ':'))
            throw ParseError("config: strategy '" + part + "' expects Th:Os:Hp");
        StrategyParams p;
        p.threshold = csv::parse_double(trim(th), "config strategies");
        p.offset = to_int(trim(os), "strategies");
        p.holding = to_int(trim(hp), "strategies");
        out.push_back(p);
    }
    if (out.empty()) throw ParseError("config: strategies list is empty");
    return out;
}

} // namespace

PipelineConfig PipelineConfig::load(const std::string& path) {
    PipelineConfig cfg;
    const std::string content = csv::read_file(path);
    std::istringstream in(content);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = t.substr(1, t.size() - 2);
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        const std::string qual = section + "." + key;

        if (qual == "data.price_csv") cfg.price_csv = value;
        else if (qual == "data.riskfree_csv") cfg.riskfree_csv = value;
        else if (qual == "windows.dt1_step") cfg.window_rules.dt1_step = to_int(value, qual);
        else if (qual == "windows.dt2_step") cfg.window_rules.dt2_step = to_int(value, qual);
        else if (qual == "windows.dt_min") cfg.window_rules.dt_min = to_int(value, qual);
        else if (qual == "windows.dt_max") cfg.window_rules.dt_max = to_int(value, qual);
        else if (qual == "windows.t1_anchor") cfg.t1_anchor = parse_date(value);
        else if (qual == "optimizer.tabu_iterations")
            cfg.optimizer.tabu_iterations = to_int(value, qual);
        else if (qual == "optimizer.tabu_neighbors")
            cfg.optimizer.tabu_neighbors = to_int(value, qual);
        else if (qual == "optimizer.tabu_list_size")
            cfg.optimizer.tabu_list_size = to_int(value, qual);
        else if (qual == "optimizer.lm_max_iterations")
            cfg.optimizer.lm_max_iterations = to_int(value, qual);
        else if (qual == "optimizer.lm_tolerance")
            cfg.optimizer.lm_tolerance = csv::parse_double(value, qual);
        else if (qual == "optimizer.seed")
            cfg.optimizer.seed = std::stoull(value);
        else if (qual == "optimizer.restarts") cfg.optimizer.restarts = to_int(value, qual);
        else if (qual == "optimizer.tc_range_factor")
            cfg.tc_range_factor = csv::parse_double(value, qual);
        else if (qual == "rebound.half_width") cfg.rebound_half_width = to_int(value, qual);
        else if (qual == "rebound.proximity_days")
            cfg.proximity_days = csv::parse_double(value, qual);
        else if (qual == "pattern.ks_threshold")
            cfg.ks_threshold = csv::parse_double(value, qual);
        else if (qual == "pattern.kde_grid") cfg.kde_grid = to_int(value, qual);
        else if (qual == "pattern.qualifications")
            cfg.qualifications = parse_qualifications(value);
        else if (qual == "pattern.omega_filter_max")
            cfg.omega_filter_max = csv::parse_double(value, qual);
        else if (qual == "prediction.learning_cutoff") cfg.learning_cutoff = parse_date(value);
        else if (qual == "prediction.prediction_end") cfg.prediction_end = parse_date(value);
        else if (qual == "prediction.step") cfg.prediction_step = to_int(value, qual);
        else if (qual == "evaluation.alarm_duration") cfg.alarm_duration = to_int(value, qual);
        else if (qual == "evaluation.alarm_center_offset")
            cfg.alarm_center_offset = to_int(value, qual);
        else if (qual == "evaluation.rebound_width") cfg.rebound_width = to_int(value, qual);
        else if (qual == "evaluation.bayes_neighborhood")
            cfg.bayes_neighborhood = to_int(value, qual);
        else if (qual == "evaluation.bayes_start") cfg.bayes_start = parse_date(value);
        else if (qual == "evaluation.bayes_step") cfg.bayes_step = to_int(value, qual);
        else if (qual == "trading.strategies") cfg.strategies = parse_strategies(value);
        else if (qual == "trading.mc_runs") cfg.mc_runs = to_int(value, qual);
        else if (qual == "trading.transaction_cost_bp")
            cfg.transaction_cost_bp = csv::parse_double(value, qual);
        else if (qual == "output.out_dir") cfg.out_dir = value;
        else
            throw ParseError(path + ":" + std::to_string(line_no) + ": unknown key '" + qual +
                             "'");
    }
    cfg.validate();
    return cfg;
}

void PipelineConfig::validate() const {
    if (price_csv.empty())
        throw ValidationError("config: data.price_csv is required");
    window_rules.validate();
    if (window_rules.dt_min < 100 || window_rules.dt_max > 100 * kNumGroups + 100)
        throw ValidationError(
            "config: window lengths must stay inside [100, 1500] so every fit has a group");
    optimizer.validate();
    if (!(tc_range_factor > 0.0))
        throw ValidationError("config: tc_range_factor must be positive");
    if (rebound_half_width < 1)
        throw ValidationError("config: rebound.half_width must be >= 1");
    if (proximity_days < 0.0)
        throw ValidationError("config: rebound.proximity_days must be >= 0");
    if (!(ks_threshold >= 0.0 && ks_threshold < 1.0))
        throw ValidationError("config: ks_threshold must lie in [0, 1)");
    if (kde_grid < 8) throw ValidationError("config: kde_grid too small");
    if (prediction_step < 1)
        throw ValidationError("config: prediction.step must be >= 1");
    if (alarm_duration < 1 || alarm_duration % 2 == 0)
        throw ValidationError("config: alarm_duration must be odd");
    if (rebound_width < 1) throw ValidationError("config: rebound_width must be >= 1");
    if (bayes_neighborhood < 0)
        throw ValidationError("config: bayes_neighborhood must be >= 0");
    if (bayes_step < 1) throw ValidationError("config: bayes_step must be >= 1");
    if (mc_runs < 1) throw ValidationError("config: mc_runs must be >= 1");
    if (transaction_cost_bp < 0.0)
        throw ValidationError("config: transaction_cost_bp must be >= 0");
    for (const auto& s : strategies) s.validate();
    for (const auto& q : qualifications)
        if (q.alpha < 0 || q.beta < 1)
            throw ValidationError("config: qualification needs alpha >= 0 and beta >= 1");
    if (out_dir.empty()) throw ValidationError("config: output.out_dir is required");
}

} // namespace rebound
