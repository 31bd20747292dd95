#include <doctest.h>

#include <random>

#include "nearnote/time.hpp"

using namespace nearnote;

TEST_CASE("renders the log sample timestamp") {
    // 2013-07-25 11:02:57 UTC
    CHECK(render_datetime(1374750177000) == "25/07/2013 11:02:57.000");
    CHECK(render_datetime(1374750184000) == "25/07/2013 11:03:04.000");
}

TEST_CASE("parses what it renders") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<TimestampMs> dist(0, 4'102'444'800'000ll);  // ..2100
    for (int i = 0; i < 1000; ++i) {
        const TimestampMs t = dist(rng);
        const auto back = parse_datetime(render_datetime(t));
        REQUIRE(back.has_value());
        CHECK(*back == t);
    }
}

TEST_CASE("civil conversion round trips across epoch boundaries") {
    for (TimestampMs t : {-1ll, 0ll, 86'399'999ll, 86'400'000ll, 1374750177123ll}) {
        CHECK(ms_from_civil(civil_from_ms(t)) == t);
    }
    const CivilTime just_before = civil_from_ms(-1);
    CHECK(just_before.year == 1969);
    CHECK(just_before.month == 12);
    CHECK(just_before.day == 31);
    CHECK(just_before.millis == 999);
}

TEST_CASE("rejects impossible dates and times") {
    CHECK(!parse_datetime("32/01/2013", "10:00:00.000").has_value());
    CHECK(!parse_datetime("29/02/2013", "10:00:00.000").has_value());  // not a leap year
    CHECK(parse_datetime("29/02/2012", "10:00:00.000").has_value());
    CHECK(!parse_datetime("25/13/2013", "10:00:00.000").has_value());
    CHECK(!parse_datetime("25/07/2013", "24:00:00.000").has_value());
    CHECK(!parse_datetime("25/07/2013", "10:60:00.000").has_value());
    CHECK(parse_datetime("25/07/2013", "10:00:00").has_value());  // millis optional
    CHECK(!parse_datetime("2013-07-25", "10:00:00.000").has_value());
}
