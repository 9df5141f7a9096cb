#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace rebound {

// Calendar day measured in days since 1970-01-01 (negative before that).
// All window arithmetic in the pipeline runs on calendar days.
using Day = std::int32_t;

struct CivilDate {
    int year;
    int month; // 1..12
    int day;   // 1..31
};

Day make_day(int year, int month, int day);
CivilDate civil_from_day(Day d);

// Parses strict ISO-8601 "YYYY-MM-DD". Throws ParseError otherwise.
Day parse_date(std::string_view text);
std::string format_date(Day d);

} // namespace rebound
