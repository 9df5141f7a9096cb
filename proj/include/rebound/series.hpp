#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "rebound/dates.hpp"

namespace rebound {

// Dated sequence of adjusted close prices (or their logs), the single source
// of market data. Dates strictly increasing, prices strictly positive on the
// linear scale. Weekends/holidays are simply absent rows; nothing is
// interpolated.
struct PriceSeries {
    std::vector<Day> days;
    Eigen::VectorXd values;
    bool log_scale = false;

    Eigen::Index size() const { return values.size(); }
    bool empty() const { return values.size() == 0; }
    Day first_day() const { return days.front(); }
    Day last_day() const { return days.back(); }
    Day span_days() const { return last_day() - first_day(); }

    // Observation times as fractional days since 1970-01-01, the time
    // variable used for fitting (t_c bounds live in the same units).
    Eigen::VectorXd times() const;

    // Index of the first entry with day >= d (== size() if none).
    Eigen::Index lower_bound(Day d) const;
};

// Validates invariants and throws ValidationError on violation.
PriceSeries make_price_series(std::vector<Day> days, Eigen::VectorXd values,
                              bool log_scale = false);

// CSV input: two columns `date,price`, ISO-8601 dates, '.' decimal separator,
// optional header row. Malformed rows are reported with their line number.
PriceSeries load_price_csv(const std::string& path);

std::string price_series_to_csv(const PriceSeries& series);

// Elementwise natural log; dates unchanged.
PriceSeries log_prices(const PriceSeries& series);

} // namespace rebound
