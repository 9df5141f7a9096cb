#include "rebound/trading.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "rebound/csv.hpp"
#include "rebound/errors.hpp"
#include "rebound/optimizer.hpp"

namespace rebound {

double RiskFreeSeries::rate_at(Day d) const {
    if (days.empty()) throw ValidationError("risk-free series is empty");
    auto it = std::upper_bound(days.begin(), days.end(), d);
    if (it == days.begin()) return annual_rate.front(); // before first quote
    return annual_rate[static_cast<std::size_t>(it - days.begin() - 1)];
}

RiskFreeSeries load_riskfree_csv(const std::string& path) {
    const std::string content = csv::read_file(path);
    RiskFreeSeries out;
    std::istringstream in(content);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r" || line[0] == '#') continue;
        auto fields = csv::split_line(line);
        if (fields.size() != 2)
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected 2 fields");
        if (line_no == 1 && !fields[0].empty() && !std::isdigit((unsigned char)fields[0][0]))
            continue;
        out.days.push_back(parse_date(fields[0]));
        out.annual_rate.push_back(
            csv::parse_double(fields[1], path + ":" + std::to_string(line_no)) / 100.0);
    }
    if (!std::is_sorted(out.days.begin(), out.days.end()))
        throw ValidationError(path + ": risk-free dates must be ascending");
    if (out.days.empty()) throw ValidationError(path + ": no risk-free rows");
    return out;
}

RiskFreeSeries flat_riskfree(double annual_rate) {
    RiskFreeSeries out;
    out.days.push_back(0);
    out.annual_rate.push_back(annual_rate);
    return out;
}

void StrategyParams::validate() const {
    if (threshold < 0.0 || threshold > 1.0)
        throw ValidationError("strategy: threshold must lie in [0, 1]");
    if (offset < 0 || holding < 0)
        throw ValidationError("strategy: offset and holding must be >= 0");
}

std::vector<TradeInterval> generate_trades(const AlarmSeries& alarms,
                                           const StrategyParams& params) {
    params.validate();
    std::vector<TradeInterval> out;
    const auto n = static_cast<std::int64_t>(alarms.size());
    std::int64_t i = 0;
    while (i < n) {
        // trigger: first day the index exceeds Th
        while (i < n && !(alarms.ri[static_cast<std::size_t>(i)] > params.threshold)) ++i;
        if (i >= n) break;
        const Day trigger = alarms.day_at(static_cast<std::size_t>(i));
        const Day entry = trigger + params.offset;

        // exit: first run of Hp consecutive at-or-below days; the position
        // closes Hp days after the run began
        Day exit = alarms.last_day(); // open position closes at the series end
        std::int64_t j = i + 1;
        std::int64_t below_start = -1;
        for (; j < n; ++j) {
            if (alarms.ri[static_cast<std::size_t>(j)] > params.threshold) {
                below_start = -1;
                continue;
            }
            if (below_start < 0) below_start = j;
            if (j - below_start + 1 >= params.holding) {
                exit = alarms.day_at(static_cast<std::size_t>(below_start)) + params.holding;
                break;
            }
        }
        if (exit > alarms.last_day()) exit = alarms.last_day();
        if (exit > entry) out.push_back({entry, exit});

        // resume strictly after the exit; a later trigger then implies a
        // later entry, so positions never overlap
        i = std::max<std::int64_t>(i + 1, (exit + 1) - alarms.first);
    }
    return out;
}

namespace {

double price_at_or_after(const PriceSeries& prices, Day d, Day* actual) {
    const Eigen::Index idx = prices.lower_bound(d);
    if (idx >= prices.size()) {
        *actual = prices.last_day();
        return prices.values[prices.size() - 1];
    }
    *actual = prices.days[static_cast<std::size_t>(idx)];
    return prices.values[idx];
}

double riskfree_log_cost(const RiskFreeSeries& rf, Day entry, Day exit) {
    double acc = 0.0;
    for (Day d = entry; d < exit; ++d) acc += rf.rate_at(d) / 365.0;
    return acc;
}

std::vector<double> excess_returns(const std::vector<Trade>& trades) {
    std::vector<double> r(trades.size());
    for (std::size_t i = 0; i < trades.size(); ++i) r[i] = trades[i].excess_log_return;
    return r;
}

double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

} // namespace

std::vector<Trade> price_trades(const std::vector<TradeInterval>& intervals,
                                const PriceSeries& prices, const RiskFreeSeries& rf,
                                double cost_bp) {
    if (prices.log_scale)
        throw ValidationError("price_trades: expects linear-scale prices");
    if (cost_bp < 0.0)
        throw ValidationError("price_trades: negative transaction cost");
    std::vector<Trade> out;
    for (const auto& iv : intervals) {
        if (iv.entry < prices.first_day() || iv.entry > prices.last_day())
            throw ValidationError("trade entry " + format_date(iv.entry) +
                                  " outside price coverage");
        Trade t;
        const double p_in = price_at_or_after(prices, iv.entry, &t.entry_date);
        const double p_out = price_at_or_after(prices, iv.exit, &t.exit_date);
        if (t.exit_date <= t.entry_date) continue;
        t.log_return = std::log(p_out / p_in) - 2.0 * cost_bp * 1e-4;
        t.duration_days = t.exit_date - t.entry_date;
        t.excess_log_return = t.log_return - riskfree_log_cost(rf, t.entry_date, t.exit_date);
        out.push_back(t);
    }
    return out;
}

StrategyReport score_trades(const std::vector<Trade>& trades, const StrategyParams& params,
                            std::int64_t period_days) {
    if (period_days < 1)
        throw ValidationError("score_trades: period must span at least one day");
    StrategyReport rep;
    rep.params = params;
    rep.trades = trades;
    rep.period_days = period_days;
    int positive = 0;
    for (const auto& t : trades) {
        rep.cumulative_log_return += t.log_return;
        rep.cumulative_excess_log_return += t.excess_log_return;
        rep.total_holding_days += t.duration_days;
        if (t.log_return > 0.0) ++positive;
    }
    if (!trades.empty()) {
        const auto n = static_cast<double>(trades.size());
        rep.success_rate = positive / n;
        rep.avg_return_per_trade = rep.cumulative_log_return / n;
        rep.avg_trade_duration = static_cast<double>(rep.total_holding_days) / n;
    }
    rep.invested_fraction =
        static_cast<double>(rep.total_holding_days) / static_cast<double>(period_days);
    try {
        rep.sharpe_per_trade = sharpe_per_trade(trades);
    } catch (const Error&) {
    }
    if (!trades.empty()) rep.bias_ratio = bias_ratio(trades);
    return rep;
}

double sharpe_per_trade(const std::vector<Trade>& trades) {
    if (trades.size() < 2)
        throw UndefinedSharpeError("sharpe: needs >= 2 trades");
    double mean_excess = 0.0;
    std::vector<double> returns(trades.size());
    for (std::size_t i = 0; i < trades.size(); ++i) {
        mean_excess += trades[i].excess_log_return;
        returns[i] = trades[i].log_return;
    }
    mean_excess /= static_cast<double>(trades.size());
    const double sigma = sample_std(returns);
    if (!(sigma > 0.0))
        throw UndefinedSharpeError("sharpe: zero return dispersion");
    return mean_excess / sigma;
}

double bias_ratio(const std::vector<Trade>& trades) {
    if (trades.empty())
        throw ValidationError("bias_ratio: needs >= 1 trade");
    const std::vector<double> r = excess_returns(trades);
    const double sigma = sample_std(r);
    int pos = 0, neg = 0;
    for (double x : r) {
        if (x >= 0.0 && x <= sigma) ++pos;
        if (x >= -sigma && x < 0.0) ++neg;
    }
    return static_cast<double>(pos) / (1.0 + static_cast<double>(neg));
}

std::vector<TradeInterval> sample_random_intervals(Day period_first, Day period_last,
                                                   int n_trades, std::int64_t total_days,
                                                   std::uint64_t seed) {
    const std::int64_t span = period_last - period_first;
    if (n_trades < 1 || total_days < n_trades || total_days > span)
        throw ValidationError("random intervals: infeasible constraint (trades=" +
                              std::to_string(n_trades) + ", days=" + std::to_string(total_days) +
                              ", span=" + std::to_string(span) + ")");
    std::mt19937_64 rng(seed);

    // durations: uniform composition of total_days into n_trades parts >= 1
    std::vector<std::int64_t> cuts;
    if (n_trades > 1) {
        std::uniform_int_distribution<std::int64_t> cut(1, total_days - 1);
        std::unordered_set<std::int64_t> seen;
        while (static_cast<int>(cuts.size()) < n_trades - 1) {
            const std::int64_t c = cut(rng);
            if (seen.insert(c).second) cuts.push_back(c);
        }
        std::sort(cuts.begin(), cuts.end());
    }
    std::vector<std::int64_t> durations;
    std::int64_t prev = 0;
    for (std::int64_t c : cuts) {
        durations.push_back(c - prev);
        prev = c;
    }
    durations.push_back(total_days - prev);

    // gaps: weak composition of the free days into n_trades + 1 parts
    const std::int64_t free_days = span - total_days;
    std::vector<std::int64_t> gap_cuts(static_cast<std::size_t>(n_trades));
    std::uniform_int_distribution<std::int64_t> gap(0, free_days);
    for (auto& g : gap_cuts) g = gap(rng);
    std::sort(gap_cuts.begin(), gap_cuts.end());

    std::vector<TradeInterval> out;
    out.reserve(static_cast<std::size_t>(n_trades));
    Day cursor = period_first;
    std::int64_t prev_gap = 0;
    for (int k = 0; k < n_trades; ++k) {
        cursor += static_cast<Day>(gap_cuts[static_cast<std::size_t>(k)] - prev_gap);
        prev_gap = gap_cuts[static_cast<std::size_t>(k)];
        const Day entry = cursor;
        cursor += static_cast<Day>(durations[static_cast<std::size_t>(k)]);
        out.push_back({entry, cursor});
    }
    return out;
}

RandomStrategyPValues random_strategy_pvalue(const StrategyReport& report,
                                             const PriceSeries& prices, const RiskFreeSeries& rf,
                                             Day period_first, Day period_last, int runs,
                                             std::uint64_t seed, double cost_bp) {
    if (report.trades.empty())
        throw ValidationError("random_strategy_pvalue: reference strategy has no trades");
    const int n_trades = static_cast<int>(report.trades.size());
    const std::int64_t total = report.total_holding_days;

    const double ref_excess = report.cumulative_excess_log_return;
    const double ref_sharpe = report.sharpe_per_trade.value_or(
        -std::numeric_limits<double>::infinity());
    const double ref_bias =
        report.bias_ratio.value_or(-std::numeric_limits<double>::infinity());

    int ge_excess = 0, ge_sharpe = 0, ge_bias = 0;
    for (int run = 0; run < runs; ++run) {
        const auto intervals = sample_random_intervals(period_first, period_last, n_trades, total,
                                                       mix_seed(seed, run));
        const auto trades = price_trades(intervals, prices, rf, cost_bp);
        double cum_excess = 0.0;
        for (const auto& t : trades) cum_excess += t.excess_log_return;
        if (cum_excess >= ref_excess) ++ge_excess;
        try {
            if (sharpe_per_trade(trades) >= ref_sharpe) ++ge_sharpe;
        } catch (const UndefinedSharpeError&) {
        }
        if (!trades.empty() && bias_ratio(trades) >= ref_bias) ++ge_bias;
    }
    RandomStrategyPValues out;
    out.runs = runs;
    out.p_excess = static_cast<double>(ge_excess) / runs;
    out.p_sharpe = static_cast<double>(ge_sharpe) / runs;
    out.p_bias = static_cast<double>(ge_bias) / runs;
    return out;
}

RandomTradeBaseline random_trade_baseline(const PriceSeries& prices, const RiskFreeSeries& rf,
                                          Day period_first, Day period_last, int duration_days) {
    RandomTradeBaseline out;
    if (duration_days < 1) return out;
    std::vector<TradeInterval> all;
    for (Day d = period_first; d + duration_days <= period_last; ++d)
        all.push_back({d, d + duration_days});
    const auto trades = price_trades(all, prices, rf);
    if (trades.size() < 2) return out;
    try {
        out.sharpe = sharpe_per_trade(trades);
    } catch (const UndefinedSharpeError&) {
    }
    out.bias = bias_ratio(trades);
    return out;
}

std::string trades_to_csv(const std::vector<Trade>& trades) {
    std::string out = "entry,exit,log_return,excess_log_return,duration_days\n";
    for (const auto& t : trades) {
        out += format_date(t.entry_date);
        out += ',';
        out += format_date(t.exit_date);
        out += ',';
        out += csv::format_double(t.log_return);
        out += ',';
        out += csv::format_double(t.excess_log_return);
        out += ',';
        out += std::to_string(t.duration_days);
        out += '\n';
    }
    return out;
}

std::string report_to_json(const StrategyReport& report) {
    nlohmann::ordered_json j;
    j["threshold"] = report.params.threshold;
    j["offset_days"] = report.params.offset;
    j["holding_period_days"] = report.params.holding;
    j["number_of_trades"] = report.trades.size();
    j["success_rate"] = report.success_rate;
    j["total_holding_days"] = report.total_holding_days;
    j["period_days"] = report.period_days;
    j["invested_fraction"] = report.invested_fraction;
    j["cumulative_log_return"] = report.cumulative_log_return;
    j["cumulative_excess_log_return"] = report.cumulative_excess_log_return;
    j["average_return_per_trade"] = report.avg_return_per_trade;
    j["average_trade_duration_days"] = report.avg_trade_duration;
    auto opt = [](const std::optional<double>& v) {
        return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    };
    j["sharpe_ratio_per_trade"] = opt(report.sharpe_per_trade);
    j["bias_ratio"] = opt(report.bias_ratio);
    j["sharpe_ratio_random_trades"] = opt(report.sharpe_random_baseline);
    j["bias_ratio_random_trades"] = opt(report.bias_random_baseline);
    j["p_value_cumulative_excess_return"] = opt(report.p_value_excess);
    j["p_value_sharpe_ratio"] = opt(report.p_value_sharpe);
    j["p_value_bias_ratio"] = opt(report.p_value_bias);
    return j.dump(2) + "\n";
}

} // namespace rebound
