#include "nearnote/time.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace nearnote {

namespace {

constexpr std::int64_t kMsPerDay = 86'400'000;

// Howard Hinnant's civil-days algorithms, valid far beyond any timestamp
// this system will see.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yr + (m <= 2));
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    return a / b - ((a % b != 0 && (a ^ b) < 0) ? 1 : 0);
}

bool parse_int(std::string_view s, int& out) {
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

CivilTime civil_from_ms(TimestampMs ms) {
    const std::int64_t days = floor_div(ms, kMsPerDay);
    std::int64_t rem = ms - days * kMsPerDay;
    CivilTime c;
    civil_from_days(days, c.year, c.month, c.day);
    c.hour = static_cast<int>(rem / 3'600'000);
    rem %= 3'600'000;
    c.minute = static_cast<int>(rem / 60'000);
    rem %= 60'000;
    c.second = static_cast<int>(rem / 1'000);
    c.millis = static_cast<int>(rem % 1'000);
    return c;
}

TimestampMs ms_from_civil(const CivilTime& c) {
    return days_from_civil(c.year, c.month, c.day) * kMsPerDay +
           c.hour * 3'600'000ll + c.minute * 60'000ll + c.second * 1'000ll + c.millis;
}

std::string render_datetime(TimestampMs ms) {
    const CivilTime c = civil_from_ms(ms);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%02d/%02d/%04d %02d:%02d:%02d.%03d", c.day,
                  c.month, c.year, c.hour, c.minute, c.second, c.millis);
    return buf;
}

std::optional<TimestampMs> parse_datetime(std::string_view date_token,
                                          std::string_view time_token) {
    // date: DD/MM/YYYY
    if (date_token.size() != 10 || date_token[2] != '/' || date_token[5] != '/') {
        return std::nullopt;
    }
    CivilTime c;
    if (!parse_int(date_token.substr(0, 2), c.day) ||
        !parse_int(date_token.substr(3, 2), c.month) ||
        !parse_int(date_token.substr(6, 4), c.year)) {
        return std::nullopt;
    }
    // time: HH:MM:SS.mmm (millis optional)
    if (time_token.size() < 8 || time_token[2] != ':' || time_token[5] != ':') {
        return std::nullopt;
    }
    if (!parse_int(time_token.substr(0, 2), c.hour) ||
        !parse_int(time_token.substr(3, 2), c.minute) ||
        !parse_int(time_token.substr(6, 2), c.second)) {
        return std::nullopt;
    }
    if (time_token.size() > 8) {
        if (time_token[8] != '.' || time_token.size() != 12) return std::nullopt;
        if (!parse_int(time_token.substr(9, 3), c.millis)) return std::nullopt;
    }
    if (c.month < 1 || c.month > 12 || c.day < 1 || c.day > 31 || c.hour > 23 ||
        c.minute > 59 || c.second > 59) {
        return std::nullopt;
    }
    // Reject days that do not exist in the given month.
    const TimestampMs ms = ms_from_civil(c);
    const CivilTime back = civil_from_ms(ms);
    if (back.day != c.day || back.month != c.month || back.year != c.year) {
        return std::nullopt;
    }
    return ms;
}

std::optional<TimestampMs> parse_datetime(std::string_view combined) {
    const auto space = combined.find(' ');
    if (space == std::string_view::npos) return std::nullopt;
    return parse_datetime(combined.substr(0, space), combined.substr(space + 1));
}

TimestampMs SystemClock::now() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

}  // namespace nearnote
