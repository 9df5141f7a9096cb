#pragma once

#include <string>
#include <vector>

#include "rebound/series.hpp"

namespace rebound {

// Days whose price is the minimum over the centered window
// [d - half_width, d + half_width] (calendar days over trading-day samples).
// Days whose window would poke past either series end are excluded, so the
// first and last half_width days can never be labeled.
struct ReboundSet {
    std::vector<Day> dates;
    int half_width = 200;

    bool empty() const { return dates.empty(); }
    std::size_t size() const { return dates.size(); }
};

// Equal minima keep the earliest date (first touch of the bottom).
ReboundSet detect_rebounds(const PriceSeries& series, int half_width);

// True iff some rebound date lies within D days of tc (inclusive bound).
bool is_near(double tc, const ReboundSet& rebounds, double D);

std::string rebounds_to_csv(const ReboundSet& set);
ReboundSet rebounds_from_csv(const std::string& content);

} // namespace rebound
