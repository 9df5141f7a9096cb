#include <doctest.h>

#include "rebound/dates.hpp"
#include "rebound/errors.hpp"

using namespace rebound;

TEST_CASE("epoch and known dates") {
    CHECK(make_day(1970, 1, 1) == 0);
    CHECK(make_day(1970, 1, 2) == 1);
    CHECK(make_day(1969, 12, 31) == -1);
    CHECK(make_day(1950, 1, 3) == -7303);
    CHECK(make_day(2009, 6, 3) == 14398);
    CHECK(make_day(2000, 2, 29) == 11016); // leap century
}

TEST_CASE("civil round trip") {
    for (Day d = -30000; d <= 30000; d += 13) {
        const CivilDate c = civil_from_day(d);
        CHECK(make_day(c.year, c.month, c.day) == d);
    }
}

TEST_CASE("parse and format") {
    CHECK(parse_date("1975-01-01") == make_day(1975, 1, 1));
    CHECK(format_date(make_day(1975, 1, 1)) == "1975-01-01");
    for (Day d : {-7303, 0, 14398, 14447})
        CHECK(parse_date(format_date(d)) == d);

    CHECK_THROWS_AS(parse_date("1975/01/01"), ParseError);
    CHECK_THROWS_AS(parse_date("1975-1-1"), ParseError);
    CHECK_THROWS_AS(parse_date("1975-13-01"), ParseError);
    CHECK_THROWS_AS(parse_date("1975-02-30"), ParseError);
    CHECK_THROWS_AS(parse_date("not-a-date"), ParseError);
}
