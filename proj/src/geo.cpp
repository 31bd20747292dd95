#include "nearnote/geo.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace nearnote {

namespace {

double deg2rad(double d) {
    return d * 3.14159265358979323846 / 180.0;
}

int significant_digits(std::string_view s) {
    int count = 0;
    bool seen_nonzero = false;
    for (char c : s) {
        if (c < '0' || c > '9') continue;
        if (c != '0') seen_nonzero = true;
        if (seen_nonzero) ++count;
    }
    return count;
}

}  // namespace

GeoPoint GeoPoint::checked(double lat, double lon) {
    if (!(lat >= -90.0 && lat <= 90.0) || !(lon >= -180.0 && lon <= 180.0)) {
        throw InvalidCoordinate("coordinate out of bounds: " + std::to_string(lat) +
                                ";" + std::to_string(lon));
    }
    return GeoPoint{lat, lon};
}

GeoPoint GeoPoint::clamped(double lat, double lon) {
    return GeoPoint{std::clamp(lat, -90.0, 90.0), std::clamp(lon, -180.0, 180.0)};
}

double geo_distance(const GeoPoint& a, const GeoPoint& b) {
    const double phi1 = deg2rad(a.lat);
    const double phi2 = deg2rad(b.lat);
    const double dphi = deg2rad(b.lat - a.lat);
    const double dlam = deg2rad(b.lon - a.lon);
    const double sp = std::sin(dphi / 2.0);
    const double sl = std::sin(dlam / 2.0);
    const double h = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

std::string render_coord(double value) {
    if (value == 0.0) {
        return "0.0000000";
    }
    // Smallest fixed precision that both round-trips the value and carries
    // at least 7 significant digits. The bound leaves room for 17
    // significant digits behind the leading zeros of small magnitudes.
    char buf[96];
    for (int prec = 0; prec <= 45; ++prec) {
        const auto res = std::to_chars(buf, buf + sizeof(buf), value,
                                       std::chars_format::fixed, prec);
        if (res.ec != std::errc{}) continue;
        const std::string_view s(buf, res.ptr - buf);
        if (significant_digits(s) < 7) continue;
        double back = 0.0;
        const auto pr = std::from_chars(s.data(), s.data() + s.size(), back);
        if (pr.ec == std::errc{} && back == value) {
            return std::string(s);
        }
    }
    const auto res =
        std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed, 45);
    return std::string(buf, res.ptr - buf);
}

std::optional<double> parse_coord(std::string_view token) {
    double v = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
        return std::nullopt;
    }
    return v;
}

}  // namespace nearnote
