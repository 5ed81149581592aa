#include "evgeo/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "evgeo/errors.hpp"

namespace evgeo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

double haversine(const GeoPoint& a, const GeoPoint& b, double radius_km) {
    check_geo_point(a, "haversine");
    check_geo_point(b, "haversine");
    const double phi1 = a.lat * kDegToRad;
    const double phi2 = b.lat * kDegToRad;
    const double dphi = (b.lat - a.lat) * kDegToRad;
    const double dlam = (b.lon - a.lon) * kDegToRad;
    const double s1 = std::sin(dphi / 2.0);
    const double s2 = std::sin(dlam / 2.0);
    const double under = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    return 2.0 * radius_km * std::asin(std::min(1.0, std::sqrt(under)));
}

EvalReport error_stats(const std::map<std::string, GeoPoint>& estimates,
                       const std::map<std::string, GeoPoint>& truths) {
    if (truths.empty()) throw EvalError("no truth events to evaluate against");
    EvalReport report;
    report.n_events = static_cast<int>(truths.size());
    for (const auto& [id, truth] : truths) {
        const auto it = estimates.find(id);
        if (it == estimates.end()) {
            ++report.n_unlocatable;
            continue;
        }
        report.per_event.emplace_back(id, haversine(it->second, truth));
    }
    if (report.per_event.empty())
        throw EvalError("estimate and truth event ids are disjoint");

    std::vector<double> errors;
    errors.reserve(report.per_event.size());
    for (const auto& [id, e] : report.per_event) errors.push_back(e);
    std::sort(errors.begin(), errors.end());
    double sum = 0.0;
    for (double e : errors) sum += e;
    report.mean_km = sum / static_cast<double>(errors.size());
    report.median_km = errors[(errors.size() - 1) / 2];  // lower median
    return report;
}

double acc_at(const std::map<std::string, GeoPoint>& estimates,
              const std::map<std::string, GeoPoint>& truths, double threshold_km) {
    if (threshold_km < 0.0) throw EvalError("negative accuracy threshold");
    if (truths.empty()) throw EvalError("no truth events to evaluate against");
    int hits = 0;
    for (const auto& [id, truth] : truths) {
        const auto it = estimates.find(id);
        if (it != estimates.end() && haversine(it->second, truth) <= threshold_km) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(truths.size());
}

EvalReport evaluate(const std::map<std::string, GeoPoint>& estimates,
                    const std::map<std::string, GeoPoint>& truths,
                    const std::vector<double>& thresholds_km) {
    EvalReport report = error_stats(estimates, truths);
    for (double d : thresholds_km) report.acc.emplace_back(d, acc_at(estimates, truths, d));
    return report;
}

}  // namespace evgeo
