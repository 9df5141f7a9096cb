#include "rebound/dates.hpp"

#include <cctype>
#include <charconv>

#include "rebound/errors.hpp"

namespace rebound {

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static constexpr int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return lengths[m - 1];
}

} // namespace

// Proleptic Gregorian day count (era-based), exact for all int32 days.
Day make_day(int year, int month, int day) {
    if (month < 1 || month > 12)
        throw ValidationError("month out of range: " + std::to_string(month));
    if (day < 1 || day > days_in_month(year, month))
        throw ValidationError("day of month out of range: " + std::to_string(day));
    const int y = year - (month <= 2);
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<Day>(era * 146097 + static_cast<int>(doe) - 719468);
}

CivilDate civil_from_day(Day d) {
    int z = d + 719468;
    const int era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int y = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned day = doy - (153 * mp + 2) / 5 + 1;
    const unsigned month = mp + (mp < 10 ? 3 : -9);
    return CivilDate{y + (month <= 2), static_cast<int>(month), static_cast<int>(day)};
}

Day parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        throw ParseError("expected ISO date YYYY-MM-DD, got '" + std::string(text) + "'");
    auto parse_int = [&](std::string_view part) {
        int value = 0;
        for (char c : part) {
            if (!std::isdigit(static_cast<unsigned char>(c)))
                throw ParseError("expected ISO date YYYY-MM-DD, got '" + std::string(text) + "'");
            value = value * 10 + (c - '0');
        }
        return value;
    };
    const int y = parse_int(text.substr(0, 4));
    const int m = parse_int(text.substr(5, 2));
    const int d = parse_int(text.substr(8, 2));
    try {
        return make_day(y, m, d);
    } catch (const ValidationError& e) {
        throw ParseError("invalid date '" + std::string(text) + "': " + e.what());
    }
}

std::string format_date(Day d) {
    const CivilDate c = civil_from_day(d);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", c.year, c.month, c.day);
    return buf;
}

} // namespace rebound
