#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tpm {

/// Geographic coordinate in degrees. Latitude in [-90, 90], longitude in (-180, 180].
struct GeoCoord {
    double lat = 0.0;
    double lng = 0.0;

    friend bool operator==(const GeoCoord&, const GeoCoord&) = default;
};

struct GeoConstants {
    double earth_radius = 6371000.0; // meters, mean Earth radius
};

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Wraps a longitude into (-180, 180].
inline double normalize_lng(double lng) {
    double r = std::fmod(lng + 180.0, 360.0);
    if (r <= 0.0) r += 360.0;
    return r - 180.0;
}

inline bool is_valid_lat(double lat) { return std::isfinite(lat) && lat >= -90.0 && lat <= 90.0; }
inline bool is_valid_lng(double lng) { return std::isfinite(lng) && lng > -180.0 && lng <= 180.0; }
inline bool is_valid(const GeoCoord& c) { return is_valid_lat(c.lat) && is_valid_lng(c.lng); }

/// Builds a coordinate with the longitude normalized. Latitude is passed through.
inline GeoCoord make_coord(double lat, double lng) { return {lat, normalize_lng(lng)}; }

/// Great-circle distance in meters (haversine). The arcsin argument is clamped
/// to [0, 1] so rounding at identical or antipodal points cannot produce NaN.
inline double haversine_distance(const GeoCoord& a, const GeoCoord& b, const GeoConstants& c = {}) {
    const double lat_a = deg_to_rad(a.lat);
    const double lat_b = deg_to_rad(b.lat);
    const double s_lat = std::sin((lat_a - lat_b) / 2.0);
    const double s_lng = std::sin(deg_to_rad(a.lng - b.lng) / 2.0);
    const double dis1 = s_lat * s_lat;
    const double dis2 = s_lng * s_lng;
    const double h = std::clamp(dis1 + std::cos(lat_a) * std::cos(lat_b) * dis2, 0.0, 1.0);
    return 2.0 * c.earth_radius * std::asin(std::sqrt(h));
}

/// Moves `origin` by (east, north) meters in the local tangent plane.
/// Only meaningful for offsets that are small compared with the Earth radius.
inline GeoCoord offset_meters(const GeoCoord& origin, double east, double north, const GeoConstants& c = {}) {
    const double dlat = rad_to_deg(north / c.earth_radius);
    const double dlng = rad_to_deg(east / (c.earth_radius * std::cos(deg_to_rad(origin.lat))));
    return make_coord(std::clamp(origin.lat + dlat, -90.0, 90.0), origin.lng + dlng);
}

/// Linear interpolation in degree space; t in [0, 1].
inline GeoCoord lerp(const GeoCoord& a, const GeoCoord& b, double t) {
    return {a.lat + (b.lat - a.lat) * t, a.lng + (b.lng - a.lng) * t};
}

} // namespace tpm
