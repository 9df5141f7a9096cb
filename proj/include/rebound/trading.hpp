#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rebound/pattern.hpp"

namespace rebound {

// Annualized risk-free quotes (decimal rates); missing dates take the most
// recent prior value.
struct RiskFreeSeries {
    std::vector<Day> days;
    std::vector<double> annual_rate;

    double rate_at(Day d) const;
};

// CSV input `date,annual_rate_percent`.
RiskFreeSeries load_riskfree_csv(const std::string& path);
RiskFreeSeries flat_riskfree(double annual_rate);

struct StrategyParams {
    double threshold = 0.2; // Th
    int offset = 10;        // Os, days from trigger to entry
    int holding = 10;       // Hp, days the index must stay below Th to exit

    void validate() const;
};

// Entry/exit dates before pricing, calendar days.
struct TradeInterval {
    Day entry;
    Day exit;
};

struct Trade {
    Day entry_date; // priced trading days (close to close)
    Day exit_date;
    double log_return = 0.0;
    double excess_log_return = 0.0;
    int duration_days = 0;
};

// Entry Os days after the index first exceeds Th; exit once the index has
// stayed at or below Th for Hp consecutive days (measured from the day it
// dropped). Re-entry requires a day strictly after the previous exit, so
// positions never overlap. An open position at the end of the series closes
// on the last day.
std::vector<TradeInterval> generate_trades(const AlarmSeries& alarms,
                                           const StrategyParams& params);

// Prices an interval at the first trading day at or after each endpoint
// (falling back to the last trading day past the series end). Degenerate
// intervals (priced exit <= priced entry) are dropped. `cost_bp` charges a
// round trip of 2 x cost_bp basis points against the log return.
std::vector<Trade> price_trades(const std::vector<TradeInterval>& intervals,
                                const PriceSeries& prices, const RiskFreeSeries& rf,
                                double cost_bp = 0.0);

struct StrategyReport {
    StrategyParams params;
    std::vector<Trade> trades;
    double cumulative_log_return = 0.0;
    double cumulative_excess_log_return = 0.0;
    double success_rate = 0.0;
    std::int64_t total_holding_days = 0;
    std::int64_t period_days = 0;
    double invested_fraction = 0.0;
    double avg_return_per_trade = 0.0;
    double avg_trade_duration = 0.0;
    std::optional<double> sharpe_per_trade;
    std::optional<double> bias_ratio;
    // all-feasible-start-day baselines at the strategy's average duration
    std::optional<double> sharpe_random_baseline;
    std::optional<double> bias_random_baseline;
    std::optional<double> p_value_excess;
    std::optional<double> p_value_sharpe;
    std::optional<double> p_value_bias;
};

StrategyReport score_trades(const std::vector<Trade>& trades, const StrategyParams& params,
                            std::int64_t period_days);

// S = E[R - Rf] / sigma, mean per-trade excess over the standard deviation of
// per-trade log returns. Throws UndefinedSharpeError for < 2 trades or zero
// dispersion.
double sharpe_per_trade(const std::vector<Trade>& trades);

// BR = #{r in [0, sigma]} / (1 + #{r in [-sigma, 0)}), r the per-trade excess
// returns, sigma their sample standard deviation.
double bias_ratio(const std::vector<Trade>& trades);

struct RandomStrategyPValues {
    double p_excess = 1.0;
    double p_sharpe = 1.0;
    double p_bias = 1.0;
    int runs = 0;
};

// Random strategies with the reference strategy's trade count and total
// holding days: durations drawn as a uniform composition, intervals placed
// uniformly without overlap inside [period_first, period_last]. p-values are
// the fraction of random strategies at least as good as the reference.
RandomStrategyPValues random_strategy_pvalue(const StrategyReport& report,
                                             const PriceSeries& prices, const RiskFreeSeries& rf,
                                             Day period_first, Day period_last, int runs,
                                             std::uint64_t seed, double cost_bp = 0.0);

// One draw of the constrained random strategy (exposed for the constraint
// audit in the tests).
std::vector<TradeInterval> sample_random_intervals(Day period_first, Day period_last,
                                                   int n_trades, std::int64_t total_days,
                                                   std::uint64_t seed);

// Sharpe and bias ratio over the universe of single trades with the given
// duration, entered on every feasible day of the period.
struct RandomTradeBaseline {
    std::optional<double> sharpe;
    std::optional<double> bias;
};
RandomTradeBaseline random_trade_baseline(const PriceSeries& prices, const RiskFreeSeries& rf,
                                          Day period_first, Day period_last, int duration_days);

std::string trades_to_csv(const std::vector<Trade>& trades);
std::string report_to_json(const StrategyReport& report);

} // namespace rebound
