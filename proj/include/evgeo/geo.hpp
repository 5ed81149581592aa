#pragma once

#include <cmath>

#include "evgeo/errors.hpp"

namespace evgeo {

// Latitude/longitude in degrees, WGS84-agnostic (spherical model throughout).
struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;

    bool valid() const {
        return std::isfinite(lat) && std::isfinite(lon) && lat >= -90.0 && lat <= 90.0 &&
               lon >= -180.0 && lon <= 180.0;
    }
};

inline void check_geo_point(const GeoPoint& p, const char* where) {
    if (!p.valid()) {
        throw ValidationError(std::string(where) + ": coordinate out of range (lat=" +
                              std::to_string(p.lat) + ", lon=" + std::to_string(p.lon) + ")");
    }
}

}  // namespace evgeo
