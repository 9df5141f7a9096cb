#include "rebound/series.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "rebound/csv.hpp"
#include "rebound/errors.hpp"

namespace rebound {

Eigen::VectorXd PriceSeries::times() const {
    Eigen::VectorXd t(size());
    for (Eigen::Index i = 0; i < size(); ++i) t[i] = static_cast<double>(days[i]);
    return t;
}

Eigen::Index PriceSeries::lower_bound(Day d) const {
    return std::lower_bound(days.begin(), days.end(), d) - days.begin();
}

PriceSeries make_price_series(std::vector<Day> days, Eigen::VectorXd values, bool log_scale) {
    if (static_cast<Eigen::Index>(days.size()) != values.size())
        throw ValidationError("price series: date/value length mismatch");
    for (size_t i = 1; i < days.size(); ++i) {
        if (days[i] == days[i - 1])
            throw ValidationError("price series: duplicate date " + format_date(days[i]));
        if (days[i] < days[i - 1])
            throw ValidationError("price series: dates not increasing at " + format_date(days[i]));
    }
    if (!log_scale) {
        for (Eigen::Index i = 0; i < values.size(); ++i)
            if (!(values[i] > 0.0))
                throw ValidationError("price series: non-positive price " +
                                      csv::format_double(values[i]) + " on " +
                                      format_date(days[i]));
    }
    PriceSeries s;
    s.days = std::move(days);
    s.values = std::move(values);
    s.log_scale = log_scale;
    return s;
}

PriceSeries load_price_csv(const std::string& path) {
    const std::string content = csv::read_file(path);
    std::vector<Day> days;
    std::vector<double> prices;
    std::istringstream in(content);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r" || line[0] == '#') continue;
        auto fields = csv::split_line(line);
        if (fields.size() != 2)
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected 2 fields, got " +
                             std::to_string(fields.size()));
        // Optional header: first row whose date column does not start with a digit.
        if (line_no == 1 && !fields[0].empty() &&
            !std::isdigit(static_cast<unsigned char>(fields[0][0])))
            continue;
        Day d;
        try {
            d = parse_date(fields[0]);
        } catch (const ParseError& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        const double p =
            csv::parse_double(fields[1], path + ":" + std::to_string(line_no));
        days.push_back(d);
        prices.push_back(p);
    }
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(prices.data(), prices.size());
    std::vector<std::pair<Day, double>> rows(days.size());
    for (size_t i = 0; i < days.size(); ++i) rows[i] = {days[i], v[i]};
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (size_t i = 0; i < rows.size(); ++i) {
        days[i] = rows[i].first;
        v[i] = rows[i].second;
    }
    return make_price_series(std::move(days), std::move(v), false);
}

std::string price_series_to_csv(const PriceSeries& series) {
    std::string out = "date,price\n";
    for (Eigen::Index i = 0; i < series.size(); ++i) {
        out += format_date(series.days[i]);
        out += ',';
        out += csv::format_double(series.values[i]);
        out += '\n';
    }
    return out;
}

PriceSeries log_prices(const PriceSeries& series) {
    if (series.log_scale)
        throw ValidationError("log_prices: series is already on the log scale");
    PriceSeries out;
    out.days = series.days;
    out.values = series.values.array().log().matrix();
    out.log_scale = true;
    return out;
}

} // namespace rebound
