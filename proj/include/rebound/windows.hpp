#pragma once

#include <string>
#include <vector>

#include "rebound/series.hpp"

namespace rebound {

// Fitting sub-window [t1, t2], endpoints in calendar days.
struct WindowSpec {
    Day t1;
    Day t2;

    int length() const { return t2 - t1; }
    friend bool operator==(const WindowSpec&, const WindowSpec&) = default;
    friend auto operator<=>(const WindowSpec&, const WindowSpec&) = default;
};

// Calendar rules for the sliding window grid: t1 steps forward from the
// series start, t2 steps backward from the series end, window length
// constrained to [dt_min, dt_max].
struct WindowRules {
    int dt1_step = 50;
    int dt2_step = 50;
    int dt_min = 110;
    int dt_max = 1500;

    void validate() const;
};

// Every (t1, t2) with t1 on the forward grid, t2 on the backward grid and
// dt_min <= t2 - t1 <= dt_max, ordered by ascending t1 then ascending t2.
// A span shorter than dt_min yields an empty list.
std::vector<WindowSpec> generate_windows(Day first, Day last, const WindowRules& rules);
std::vector<WindowSpec> generate_windows(const PriceSeries& series, const WindowRules& rules);

// Entries of `series` with t1 <= date <= t2. Throws ValidationError when the
// window contains no trading day.
PriceSeries slice_window(const PriceSeries& series, const WindowSpec& w);

std::string windows_to_csv(const std::vector<WindowSpec>& windows);
std::vector<WindowSpec> windows_from_csv(const std::string& content);

} // namespace rebound
