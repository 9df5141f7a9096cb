#include "rebound/rebound_detect.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rebound/csv.hpp"
#include "rebound/errors.hpp"

namespace rebound {

ReboundSet detect_rebounds(const PriceSeries& series, int half_width) {
    if (half_width < 1)
        throw ValidationError("detect_rebounds: half_width must be >= 1");
    ReboundSet out;
    out.half_width = half_width;
    if (series.empty() || series.span_days() <= 2 * half_width) return out;

    const auto n = series.size();
    Eigen::Index lo = 0, hi = 0; // window [day-hw, day+hw] as index range [lo, hi)
    for (Eigen::Index i = 0; i < n; ++i) {
        const Day d = series.days[i];
        if (d - half_width < series.first_day() || d + half_width > series.last_day()) continue;
        while (series.days[lo] < d - half_width) ++lo;
        while (hi < n && series.days[hi] <= d + half_width) ++hi;
        const double p = series.values[i];
        bool is_min = true;
        for (Eigen::Index j = lo; j < hi; ++j) {
            if (j == i) continue;
            const double q = series.values[j];
            // strict minimum; an equal price on an earlier day disqualifies d
            if (q < p || (q == p && j < i)) {
                is_min = false;
                break;
            }
        }
        if (is_min) out.dates.push_back(d);
    }
    return out;
}

bool is_near(double tc, const ReboundSet& rebounds, double D) {
    for (Day d : rebounds.dates)
        if (std::abs(tc - static_cast<double>(d)) <= D) return true;
    return false;
}

std::string rebounds_to_csv(const ReboundSet& set) {
    std::string out = "# half_width=" + std::to_string(set.half_width) + "\ndate\n";
    for (Day d : set.dates) {
        out += format_date(d);
        out += '\n';
    }
    return out;
}

ReboundSet rebounds_from_csv(const std::string& content) {
    ReboundSet set;
    std::istringstream in(content);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        if (line.rfind("# half_width=", 0) == 0) {
            set.half_width = std::stoi(line.substr(13));
            continue;
        }
        if (line[0] == '#' || line.rfind("date", 0) == 0) continue;
        auto fields = csv::split_line(line);
        set.dates.push_back(parse_date(fields[0]));
    }
    std::sort(set.dates.begin(), set.dates.end());
    return set;
}

} // namespace rebound
