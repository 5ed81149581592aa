#pragma once

#include <map>
#include <string>
#include <vector>

#include "evgeo/geo.hpp"

namespace evgeo {

inline constexpr double kEarthRadiusKm = 6371.0;

// Great-circle distance, standard haversine form:
// 2r asin(sqrt(sin^2(dphi/2) + cos(phi1) cos(phi2) sin^2(dlambda/2))).
double haversine(const GeoPoint& a, const GeoPoint& b, double radius_km = kEarthRadiusKm);

struct EvalReport {
    std::vector<std::pair<std::string, double>> per_event;  // (event id, error km), located only
    double mean_km = 0.0;
    double median_km = 0.0;   // lower median for even counts
    std::vector<std::pair<double, double>> acc;  // (threshold km, fraction)
    int n_events = 0;         // truth events, located or not
    int n_unlocatable = 0;
};

// Mean and lower-median error over events located AND present in the truth
// set. Throws EvalError when the id sets are disjoint or truths is empty.
EvalReport error_stats(const std::map<std::string, GeoPoint>& estimates,
                       const std::map<std::string, GeoPoint>& truths);

// Fraction of truth events located within d km. Unlocated events count
// against the denominator. Throws for d < 0.
double acc_at(const std::map<std::string, GeoPoint>& estimates,
              const std::map<std::string, GeoPoint>& truths, double threshold_km);

// error_stats plus acc_at for each threshold.
EvalReport evaluate(const std::map<std::string, GeoPoint>& estimates,
                    const std::map<std::string, GeoPoint>& truths,
                    const std::vector<double>& thresholds_km);

}  // namespace evgeo
