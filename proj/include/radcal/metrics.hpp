#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "radcal/common.hpp"
#include "radcal/error_model.hpp"
#include "radcal/geo_map.hpp"

namespace radcal {

/// A radar-frame detection together with the vehicle pose it was seen from.
struct Sighting {
    Pose2D pose;
    CartesianDetection detection;
};

struct Residual {
    std::string track_id;
    std::string target_id;
    double distance = 0.0;  // m
    double angular = 0.0;   // rad, absolute
};

struct EvaluationReport {
    double mde = 0.0;  // mean distance error, m
    double mae = 0.0;  // mean angular error, rad
    std::size_t n_matched = 0;
    std::size_t n_unmatched = 0;
    std::vector<Residual> residuals;
};

inline constexpr double kDefaultMatchGate = 2.0;

/// Projects every sighting through `radar_to_vehicle` and the vehicle pose,
/// matches it to the nearest map target within `gate` and averages the
/// Euclidean residual and the bearing residual (seen from the vehicle origin).
inline EvaluationReport evaluate(const TransformSE2& radar_to_vehicle, std::span<const Sighting> sightings,
                                 const TargetMap& targets, double gate = kDefaultMatchGate) {
    if (!(gate > 0.0)) throw Error("metrics", "match gate must be positive");
    EvaluationReport report;
    double sum_d = 0.0, sum_a = 0.0;
    for (const auto& s : sightings) {
        const Vec2 in_vehicle = radar_to_vehicle.apply(s.detection.position());
        const EnPoint world = vehicle_to_world(s.pose, in_vehicle);
        const Target* best = nullptr;
        double best_d = std::numeric_limits<double>::infinity();
        for (const auto& t : targets.targets()) {
            const double d = std::hypot(t.position.easting - world.easting, t.position.northing - world.northing);
            if (d < best_d) {
                best_d = d;
                best = &t;
            }
        }
        if (!best || best_d > gate) {
            ++report.n_unmatched;
            continue;
        }
        const Vec2 target_v = world_to_vehicle(s.pose, best->position);
        const double ang = std::abs(wrap_angle(std::atan2(in_vehicle.y(), in_vehicle.x()) -
                                               std::atan2(target_v.y(), target_v.x())));
        report.residuals.push_back({s.detection.track_id, best->id, best_d, ang});
        sum_d += best_d;
        sum_a += ang;
        ++report.n_matched;
    }
    if (report.n_matched == 0) throw Error("metrics", "no detection matched a target within the gate");
    report.mde = sum_d / static_cast<double>(report.n_matched);
    report.mae = sum_a / static_cast<double>(report.n_matched);
    return report;
}

}  // namespace radcal
