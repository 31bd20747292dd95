#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "nearnote/errors.hpp"

namespace nearnote {

inline constexpr double kEarthRadiusM = 6'371'000.0;

struct GeoPoint {
    double lat = 0.0;  // decimal degrees, [-90, 90]
    double lon = 0.0;  // decimal degrees, [-180, 180]

    // Validating factory; use for anything parsed or user-supplied.
    static GeoPoint checked(double lat, double lon);
    // Clamps into bounds; use after arithmetic such as jitter.
    static GeoPoint clamped(double lat, double lon);

    auto operator<=>(const GeoPoint&) const = default;
};

// Great-circle distance in meters (haversine on a sphere of radius
// kEarthRadiusM). Symmetric, nonnegative, exactly 0 for coincident points.
double geo_distance(const GeoPoint& a, const GeoPoint& b);

// Fixed-notation rendering with at least 7 significant digits, never more
// digits than needed to round-trip the double exactly beyond that floor.
// Gives back the exact source text for coordinates parsed from the
// detection-log grammar.
std::string render_coord(double value);
std::optional<double> parse_coord(std::string_view token);

}  // namespace nearnote
