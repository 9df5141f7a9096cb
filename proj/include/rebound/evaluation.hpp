#pragma once

#include <string>
#include <vector>

#include "rebound/pattern.hpp"

namespace rebound {

// One point of a Molchan-style error diagram: fraction of days under alarm
// versus fraction of rebounds missed, at the threshold where one more
// rebound first became predicted. Points are ordered by decreasing
// threshold.
struct ErrorDiagramPoint {
    double threshold = 0.0;
    double alarm_fraction = 0.0;
    double miss_fraction = 0.0;
};

// Threshold sweep down the distinct index values. Each day whose index
// reaches the threshold opens an alarm window of `alarm_duration` days
// centered on it (shifted by `center_offset`); overlapping windows merge and
// merged days count once. A rebound is predicted when it falls inside an
// open window.
std::vector<ErrorDiagramPoint> error_diagram(const AlarmSeries& alarms,
                                             const ReboundSet& rebounds,
                                             int alarm_duration = 41, int center_offset = 0);

std::string error_diagram_to_csv(const std::vector<ErrorDiagramPoint>& points);

struct BayesEstimate {
    double lv = 0.0;         // threshold: highest index over the lookback window
    double p_ri = 0.0;       // P(RI >= Lv)
    double prior = 0.0;      // P(rebound)
    double likelihood = 0.0; // P(RI >= Lv | rebound)
    double posterior = 0.0;  // P(rebound | RI >= Lv)
    int n_rebounds = 0;
};

// Bayesian rebound probability at evaluation day d, using only the alarm
// index history and prices up to d. Lv is the highest index over the
// `lookback` days ending at d; the prior counts `rebound_width` days per
// known rebound; the likelihood asks whether the index within
// +-`neighborhood` days of each rebound ever reached Lv.
// Throws UndefinedPosteriorError when no history day reaches Lv.
BayesEstimate bayes_posterior(const AlarmSeries& alarms, const PriceSeries& prices,
                              int rebound_half_width, Day d, int rebound_width = 21,
                              int neighborhood = 20, int lookback = 50);

struct BayesRow {
    Day date;
    BayesEstimate estimate;
};

// bayes_posterior for every `step`-th day of [first_eval, last_eval];
// rebounds are detected incrementally (a day is a rebound as of d once its
// full +-half_width window fits inside the data seen so far, which matches
// re-running the detector on each prefix).
std::vector<BayesRow> bayes_scan(const AlarmSeries& alarms, const PriceSeries& prices,
                                 int rebound_half_width, Day first_eval, Day last_eval,
                                 int step = 1, int rebound_width = 21, int neighborhood = 20,
                                 int lookback = 50);

std::string bayes_rows_to_csv(const std::vector<BayesRow>& rows);

} // namespace rebound
