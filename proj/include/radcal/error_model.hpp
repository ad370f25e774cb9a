#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "radcal/common.hpp"
#include "radcal/geo_map.hpp"

namespace radcal {

struct AngleBand {
    double fov_half_angle;  // rad
    double accuracy;        // rad
};

/// Datasheet accuracy model of a radar model.
struct RadarSpec {
    std::string name;
    double range_accuracy_min = 0.0;             // m
    std::optional<double> range_accuracy_rel;    // fraction of range
    std::vector<AngleBand> angle_bands;          // increasing fov_half_angle
    double fov_limit = 0.0;                      // rad
    double range_limit = 0.0;                    // m

    void validate() const {
        if (angle_bands.empty()) throw Error("config", "radar '" + name + "' has no angle bands");
        for (std::size_t i = 0; i < angle_bands.size(); ++i) {
            if (!(angle_bands[i].accuracy > 0.0)) throw Error("config", "radar '" + name + "': non-positive angle accuracy");
            if (i > 0 && !(angle_bands[i].fov_half_angle > angle_bands[i - 1].fov_half_angle)) {
                throw Error("config", "radar '" + name + "': angle bands must be ordered by increasing FoV");
            }
        }
        if (!(range_accuracy_min > 0.0)) throw Error("config", "radar '" + name + "': non-positive range accuracy");
        if (!(range_limit > 0.0)) throw Error("config", "radar '" + name + "': range_limit must be positive");
        if (!(fov_limit > 0.0)) throw Error("config", "radar '" + name + "': fov_limit must be positive");
    }
};

/// Continental ARS-308 long-range radar.
inline RadarSpec ars308() {
    return {"ARS-308", 0.25, 0.015,
            {{deg2rad(8.5), deg2rad(0.1)}, {deg2rad(28.0), deg2rad(1.0)}},
            deg2rad(28.0), 200.0};
}

/// Continental SRR-208 short-range radar.
inline RadarSpec srr208() {
    return {"SRR-208", 0.2, std::nullopt,
            {{deg2rad(20.0), deg2rad(2.0)}, {deg2rad(60.0), deg2rad(4.0)}, {deg2rad(75.0), deg2rad(5.0)}},
            deg2rad(75.0), 50.0};
}

struct PolarDetection {
    double range = 0.0;
    double bearing = 0.0;
    double range_error = 0.0;
    double bearing_error = 0.0;
    double timestamp = 0.0;
    std::string track_id;
};

struct CartesianDetection {
    double x = 0.0;
    double y = 0.0;
    double x_error = 0.0;
    double y_error = 0.0;
    double timestamp = 0.0;
    std::string track_id;

    Vec2 position() const { return {x, y}; }
};

struct DirectionSample {
    double direction = 0.0;
    double direction_error = 0.0;
};

/// Position resolution of the vehicle bus; also the floor on Cartesian errors.
inline constexpr double kCanResolution = 0.1;

inline double range_accuracy(const RadarSpec& spec, double range) {
    if (spec.range_accuracy_rel) return std::max(spec.range_accuracy_min, *spec.range_accuracy_rel * range);
    return spec.range_accuracy_min;
}

/// Accuracy of the narrowest band containing |bearing| (bearing relative to boresight).
inline double angle_accuracy(const RadarSpec& spec, double bearing) {
    const double a = std::abs(bearing);
    for (const auto& band : spec.angle_bands) {
        if (a <= band.fov_half_angle) return band.accuracy;
    }
    throw Error("error_model", "bearing " + std::to_string(rad2deg(bearing)) + " deg is outside the specified FoV of " +
                                   spec.name);
}

/// First-order propagated Cartesian stds, without the bus-resolution floor.
inline Vec2 propagate_polar_errors(double range, double bearing, double range_error, double bearing_error) {
    const double c = std::cos(bearing), s = std::sin(bearing);
    const double ex = std::hypot(c * range_error, -range * s * bearing_error);
    const double ey = std::hypot(s * range_error, range * c * bearing_error);
    return {ex, ey};
}

inline CartesianDetection polar_to_cartesian(const PolarDetection& d) {
    if (!(d.range_error > 0.0) || !(d.bearing_error > 0.0)) {
        throw Error("error_model", "polar detection errors must be positive");
    }
    const Vec2 e = propagate_polar_errors(d.range, d.bearing, d.range_error, d.bearing_error);
    CartesianDetection c;
    c.x = d.range * std::cos(d.bearing);
    c.y = d.range * std::sin(d.bearing);
    c.x_error = std::max(kCanResolution, e.x());
    c.y_error = std::max(kCanResolution, e.y());
    c.timestamp = d.timestamp;
    c.track_id = d.track_id;
    return c;
}

/// Direction of the vector p_i -> p_j and its propagated uncertainty.
///
/// The partials are evaluated as -dy/r^2 and dx/r^2, which equal the
/// arctan-quotient forms wherever those are defined and stay finite on the
/// axes. Point errors are combined by plain sum.
inline DirectionSample direction_between(const CartesianDetection& pi, const CartesianDetection& pj) {
    const double dx = pj.x - pi.x;
    const double dy = pj.y - pi.y;
    const double r2 = dx * dx + dy * dy;
    if (r2 == 0.0) throw Error("error_model", "direction between coincident points is undefined");
    const double d_ddx = -dy / r2;
    const double d_ddy = dx / r2;
    const double e_dx = pi.x_error + pj.x_error;
    const double e_dy = pi.y_error + pj.y_error;
    return {std::atan2(dy, dx), std::hypot(d_ddx * e_dx, d_ddy * e_dy)};
}

/// Rebuilds a detection with datasheet errors from a logged radar-frame point.
///
/// `boresight` is the boresight direction expressed in the radar's reporting
/// frame. Bearings nudged past the FoV edge by bus quantization are clamped to
/// the edge for the band lookup.
inline CartesianDetection detection_from_point(const RadarSpec& spec, double boresight, double x, double y,
                                               double timestamp, std::string track_id) {
    PolarDetection p;
    p.range = std::hypot(x, y);
    p.bearing = std::atan2(y, x);
    const double rel = std::clamp(wrap_angle(p.bearing - boresight), -spec.fov_limit, spec.fov_limit);
    p.range_error = range_accuracy(spec, p.range);
    p.bearing_error = angle_accuracy(spec, rel);
    p.timestamp = timestamp;
    p.track_id = std::move(track_id);
    CartesianDetection c = polar_to_cartesian(p);
    c.x = x;  // keep the logged coordinates bit-exact
    c.y = y;
    return c;
}

}  // namespace radcal
