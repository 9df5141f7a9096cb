#include "rebound/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "rebound/csv.hpp"
#include "rebound/errors.hpp"

namespace rebound {

std::vector<ErrorDiagramPoint> error_diagram(const AlarmSeries& alarms,
                                             const ReboundSet& rebounds, int alarm_duration,
                                             int center_offset) {
    if (alarm_duration < 1 || alarm_duration % 2 == 0)
        throw ValidationError("error_diagram: alarm_duration must be odd and positive");
    const int reach = alarm_duration / 2;
    const auto n = static_cast<std::int64_t>(alarms.size());
    std::vector<ErrorDiagramPoint> points;
    if (n == 0) return points;

    // rebounds inside the alarm period only
    std::vector<std::int64_t> reb;
    for (Day d : rebounds.dates)
        if (alarms.covers(d)) reb.push_back(d - alarms.first);
    std::sort(reb.begin(), reb.end());
    const auto n_reb = static_cast<std::int64_t>(reb.size());
    if (n_reb == 0) return points;

    // days sorted by decreasing index value, stable in time
    std::vector<std::int64_t> order(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
        const double ra = alarms.ri[static_cast<std::size_t>(a)];
        const double rb = alarms.ri[static_cast<std::size_t>(b)];
        if (ra != rb) return ra > rb;
        return a < b;
    });

    std::vector<char> alarmed(static_cast<std::size_t>(n), 0);
    std::vector<char> predicted(reb.size(), 0);
    std::int64_t alarmed_days = 0;
    std::int64_t predicted_count = 0;

    std::size_t pos = 0;
    while (pos < order.size() && predicted_count < n_reb) {
        const double threshold = alarms.ri[static_cast<std::size_t>(order[pos])];
        const std::int64_t predicted_before = predicted_count;
        // activate every day at this threshold value
        while (pos < order.size() &&
               alarms.ri[static_cast<std::size_t>(order[pos])] == threshold) {
            const std::int64_t d = order[pos];
            ++pos;
            const std::int64_t lo = std::max<std::int64_t>(0, d - reach + center_offset);
            const std::int64_t hi = std::min<std::int64_t>(n - 1, d + reach + center_offset);
            for (std::int64_t j = lo; j <= hi; ++j) {
                if (!alarmed[static_cast<std::size_t>(j)]) {
                    alarmed[static_cast<std::size_t>(j)] = 1;
                    ++alarmed_days;
                }
            }
            // a rebound within reach of the triggering day becomes predicted
            auto it = std::lower_bound(reb.begin(), reb.end(), d - reach + center_offset);
            for (; it != reb.end() && *it <= d + reach + center_offset; ++it) {
                const auto ri = static_cast<std::size_t>(it - reb.begin());
                if (!predicted[ri]) {
                    predicted[ri] = 1;
                    ++predicted_count;
                }
            }
        }
        if (predicted_count > predicted_before) {
            points.push_back({threshold,
                              static_cast<double>(alarmed_days) / static_cast<double>(n),
                              static_cast<double>(n_reb - predicted_count) /
                                  static_cast<double>(n_reb)});
        }
    }
    return points;
}

std::string error_diagram_to_csv(const std::vector<ErrorDiagramPoint>& points) {
    std::string out = "threshold,alarm_fraction,miss_fraction\n";
    for (const auto& p : points) {
        out += csv::format_double(p.threshold);
        out += ',';
        out += csv::format_double(p.alarm_fraction);
        out += ',';
        out += csv::format_double(p.miss_fraction);
        out += '\n';
    }
    return out;
}

namespace {

// rebounds fully confirmed by data up to `d` (their +-hw window closed);
// the cut runs on the last trading day at or before d, matching what the
// detector sees on the price prefix
std::vector<Day> rebounds_as_of(const ReboundSet& full, const PriceSeries& prices, Day d) {
    std::vector<Day> out;
    const Eigen::Index hi = prices.lower_bound(d + 1);
    if (hi == 0) return out;
    const Day last_traded = prices.days[static_cast<std::size_t>(hi - 1)];
    for (Day r : full.dates)
        if (r + full.half_width <= last_traded) out.push_back(r);
    return out;
}

BayesEstimate bayes_at(const AlarmSeries& alarms, const std::vector<Day>& rebounds, Day d,
                       int rebound_width, int neighborhood, int lookback) {
    BayesEstimate est;
    if (!alarms.covers(d))
        throw ValidationError("bayes: evaluation day outside the alarm history");

    const std::size_t d_idx = static_cast<std::size_t>(d - alarms.first);

    double lv = 0.0;
    for (std::size_t i = d_idx + 1 >= static_cast<std::size_t>(lookback)
                             ? d_idx + 1 - static_cast<std::size_t>(lookback)
                             : 0;
         i <= d_idx; ++i)
        lv = std::max(lv, alarms.ri[i]);
    est.lv = lv;

    const auto d_total = static_cast<double>(d_idx + 1);
    std::int64_t d_lv = 0;
    for (std::size_t i = 0; i <= d_idx; ++i)
        if (alarms.ri[i] >= lv) ++d_lv;
    est.p_ri = static_cast<double>(d_lv) / d_total;

    std::vector<Day> usable;
    for (Day r : rebounds)
        if (r >= alarms.first && r <= d) usable.push_back(r);
    est.n_rebounds = static_cast<int>(usable.size());

    est.prior = static_cast<double>(rebound_width) * static_cast<double>(usable.size()) / d_total;

    std::int64_t n0 = 0;
    for (Day r : usable) {
        double sup = 0.0;
        for (Day t = r - neighborhood; t <= r + neighborhood; ++t) {
            if (t < alarms.first || t > d) continue;
            sup = std::max(sup, alarms.at_day(t));
        }
        if (sup >= lv) ++n0;
    }
    est.likelihood = usable.empty() ? 0.0 : static_cast<double>(n0) / est.n_rebounds;

    if (!(est.p_ri > 0.0))
        throw UndefinedPosteriorError("bayes: no history day reaches Lv");
    est.posterior = est.prior * est.likelihood / est.p_ri;
    return est;
}

} // namespace

BayesEstimate bayes_posterior(const AlarmSeries& alarms, const PriceSeries& prices,
                              int rebound_half_width, Day d, int rebound_width, int neighborhood,
                              int lookback) {
    // truncate prices to the evaluation day; the detector sees only the past
    PriceSeries past;
    const Eigen::Index hi = prices.lower_bound(d + 1);
    if (hi == 0) throw ValidationError("bayes: no prices before evaluation day");
    past.days.assign(prices.days.begin(), prices.days.begin() + hi);
    past.values = prices.values.head(hi);
    past.log_scale = prices.log_scale;
    const ReboundSet reb = detect_rebounds(past, rebound_half_width);
    return bayes_at(alarms, reb.dates, d, rebound_width, neighborhood, lookback);
}

std::vector<BayesRow> bayes_scan(const AlarmSeries& alarms, const PriceSeries& prices,
                                 int rebound_half_width, Day first_eval, Day last_eval, int step,
                                 int rebound_width, int neighborhood, int lookback) {
    if (step < 1) throw ValidationError("bayes_scan: step must be >= 1");
    const ReboundSet full = detect_rebounds(prices, rebound_half_width);
    std::vector<BayesRow> rows;
    for (Day d = first_eval; d <= last_eval; d += step) {
        if (!alarms.covers(d)) continue;
        const std::vector<Day> reb = rebounds_as_of(full, prices, d);
        try {
            rows.push_back({d, bayes_at(alarms, reb, d, rebound_width, neighborhood, lookback)});
        } catch (const UndefinedPosteriorError&) {
            continue; // skip days with an empty admissible history
        }
    }
    return rows;
}

std::string bayes_rows_to_csv(const std::vector<BayesRow>& rows) {
    std::string out = "date,lv,prior,likelihood,evidence,posterior\n";
    for (const auto& row : rows) {
        out += format_date(row.date);
        out += ',';
        out += csv::format_double(row.estimate.lv);
        out += ',';
        out += csv::format_double(row.estimate.prior);
        out += ',';
        out += csv::format_double(row.estimate.likelihood);
        out += ',';
        out += csv::format_double(row.estimate.p_ri);
        out += ',';
        out += csv::format_double(row.estimate.posterior);
        out += '\n';
    }
    return out;
}

} // namespace rebound
