#include "rebound/windows.hpp"

#include <algorithm>
#include <sstream>

#include "rebound/csv.hpp"
#include "rebound/errors.hpp"

namespace rebound {

void WindowRules::validate() const {
    if (dt1_step <= 0 || dt2_step <= 0 || dt_min <= 0 || dt_max <= 0)
        throw ValidationError("window rules: steps and length bounds must be positive");
    if (dt_min >= dt_max)
        throw ValidationError("window rules: dt_min must be smaller than dt_max");
}

std::vector<WindowSpec> generate_windows(Day first, Day last, const WindowRules& rules) {
    rules.validate();
    std::vector<WindowSpec> out;
    if (last - first < rules.dt_min) return out;
    for (Day t1 = first; t1 <= last; t1 += rules.dt1_step) {
        // t2 grid is anchored at `last`; lowest admissible grid point >= t1 + dt_min.
        for (Day t2 = last; t2 >= t1 + rules.dt_min; t2 -= rules.dt2_step) {
            const int dt = t2 - t1;
            if (dt > rules.dt_max) continue;
            out.push_back({t1, t2});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<WindowSpec> generate_windows(const PriceSeries& series, const WindowRules& rules) {
    if (series.empty()) return {};
    return generate_windows(series.first_day(), series.last_day(), rules);
}

PriceSeries slice_window(const PriceSeries& series, const WindowSpec& w) {
    const Eigen::Index lo = series.lower_bound(w.t1);
    Eigen::Index hi = series.lower_bound(w.t2 + 1);
    if (lo >= hi)
        throw ValidationError("slice_window: window " + format_date(w.t1) + ".." +
                              format_date(w.t2) + " contains no trading days");
    PriceSeries out;
    out.days.assign(series.days.begin() + lo, series.days.begin() + hi);
    out.values = series.values.segment(lo, hi - lo);
    out.log_scale = series.log_scale;
    return out;
}

std::string windows_to_csv(const std::vector<WindowSpec>& windows) {
    std::string out = "t1,t2\n";
    for (const auto& w : windows) {
        out += format_date(w.t1);
        out += ',';
        out += format_date(w.t2);
        out += '\n';
    }
    return out;
}

std::vector<WindowSpec> windows_from_csv(const std::string& content) {
    std::vector<WindowSpec> out;
    std::istringstream in(content);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r" || line[0] == '#') continue;
        auto fields = csv::split_line(line);
        if (line_no == 1 && fields.size() >= 1 && fields[0] == "t1") continue;
        if (fields.size() != 2)
            throw ParseError("windows csv line " + std::to_string(line_no) +
                             ": expected 2 fields");
        out.push_back({parse_date(fields[0]), parse_date(fields[1])});
    }
    return out;
}

} // namespace rebound
