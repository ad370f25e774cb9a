#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "radcal/common.hpp"

namespace radcal {

using Vec2 = Eigen::Vector2d;

struct GeoPoint {
    double latitude = 0.0;   // degrees
    double longitude = 0.0;  // degrees
};

/// Flat world-frame coordinates in meters.
struct EnPoint {
    double easting = 0.0;
    double northing = 0.0;

    Vec2 vec() const { return {easting, northing}; }
    friend bool operator==(const EnPoint&, const EnPoint&) = default;
};

struct Target {
    std::string id;
    EnPoint position;
};

/// Surveyed calibration targets (pole axes) in the easting-northing frame.
class TargetMap {
public:
    TargetMap() = default;
    explicit TargetMap(std::vector<Target> targets) : targets_(std::move(targets)) {
        std::unordered_set<std::string> seen;
        for (const auto& t : targets_) {
            if (!seen.insert(t.id).second) {
                throw Error("map", "duplicate target id '" + t.id + "'");
            }
            if (!std::isfinite(t.position.easting) || !std::isfinite(t.position.northing)) {
                throw Error("map", "non-finite position for target '" + t.id + "'");
            }
        }
    }

    const std::vector<Target>& targets() const { return targets_; }
    std::size_t size() const { return targets_.size(); }
    bool empty() const { return targets_.empty(); }

private:
    std::vector<Target> targets_;
};

/// Vehicle pose in the world frame. Heading is kept in (-pi, pi].
struct Pose2D {
    double easting = 0.0;
    double northing = 0.0;
    double heading = 0.0;

    Pose2D() = default;
    Pose2D(double e, double n, double phi) : easting(e), northing(n), heading(wrap_angle(phi)) {}
};

/// Rigid 2-D transform p' = R(rotation) p + translation.
struct TransformSE2 {
    double rotation = 0.0;
    Vec2 translation = Vec2::Zero();

    static TransformSE2 identity() { return {}; }

    Vec2 apply(const Vec2& p) const {
        const double c = std::cos(rotation), s = std::sin(rotation);
        return {c * p.x() - s * p.y() + translation.x(), s * p.x() + c * p.y() + translation.y()};
    }

    /// Rotates a free vector (no translation).
    Vec2 rotate(const Vec2& v) const {
        const double c = std::cos(rotation), s = std::sin(rotation);
        return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
    }

    TransformSE2 inverse() const {
        TransformSE2 inv;
        inv.rotation = wrap_angle(-rotation);
        inv.translation = -inv.rotate(translation);
        return inv;
    }

    /// (*this) ∘ other: apply `other` first.
    TransformSE2 compose(const TransformSE2& other) const {
        return {wrap_angle(rotation + other.rotation), apply(other.translation)};
    }
};

inline Vec2 apply_transform(const TransformSE2& t, const Vec2& p) { return t.apply(p); }
inline TransformSE2 invert(const TransformSE2& t) { return t.inverse(); }

/// Vehicle-to-world transform built from the vehicle state (E, N, phi).
inline TransformSE2 pose_transform(const Pose2D& pose) {
    return {pose.heading, Vec2(pose.easting, pose.northing)};
}

/// Maps a world point into the vehicle frame (x forward, y left).
inline Vec2 world_to_vehicle(const Pose2D& pose, const EnPoint& w) {
    const double dx = w.easting - pose.easting;
    const double dy = w.northing - pose.northing;
    const double c = std::cos(pose.heading), s = std::sin(pose.heading);
    return {c * dx + s * dy, -s * dx + c * dy};
}

inline EnPoint vehicle_to_world(const Pose2D& pose, const Vec2& v) {
    const Vec2 w = pose_transform(pose).apply(v);
    return {w.x(), w.y()};
}

inline EnPoint centroid(std::span<const EnPoint> points) {
    if (points.empty()) throw Error("map", "centroid of an empty point set");
    double e = 0.0, n = 0.0;
    for (const auto& p : points) {
        e += p.easting;
        n += p.northing;
    }
    const auto count = static_cast<double>(points.size());
    return {e / count, n / count};
}

// ---------------------------------------------------------------------------
// Transverse Mercator (Krueger n-series, 6th order) on WGS-84, scale 1 on the
// reference meridian, false origin at the reference point.

namespace detail {

struct TmConstants {
    double e;            // first eccentricity
    double e2;
    double A;            // rectifying radius
    std::array<double, 6> alpha;
    std::array<double, 6> beta;
};

inline const TmConstants& wgs84_tm() {
    static const TmConstants k = [] {
        constexpr double a = 6378137.0;
        constexpr double f = 1.0 / 298.257223563;
        TmConstants c{};
        c.e2 = f * (2.0 - f);
        c.e = std::sqrt(c.e2);
        const double n = f / (2.0 - f);
        const double n2 = n * n, n3 = n2 * n, n4 = n3 * n, n5 = n4 * n, n6 = n5 * n;
        c.A = a / (1.0 + n) * (1.0 + n2 / 4.0 + n4 / 64.0 + n6 / 256.0);
        c.alpha = {
            n / 2 - 2 * n2 / 3 + 5 * n3 / 16 + 41 * n4 / 180 - 127 * n5 / 288 + 7891 * n6 / 37800,
            13 * n2 / 48 - 3 * n3 / 5 + 557 * n4 / 1440 + 281 * n5 / 630 - 1983433 * n6 / 1935360,
            61 * n3 / 240 - 103 * n4 / 140 + 15061 * n5 / 26880 + 167603 * n6 / 181440,
            49561 * n4 / 161280 - 179 * n5 / 168 + 6601661 * n6 / 7257600,
            34729 * n5 / 80640 - 3418889 * n6 / 1995840,
            212378941 * n6 / 319334400,
        };
        c.beta = {
            n / 2 - 2 * n2 / 3 + 37 * n3 / 96 - n4 / 360 - 81 * n5 / 512 + 96199 * n6 / 604800,
            n2 / 48 + n3 / 15 - 437 * n4 / 1440 + 46 * n5 / 105 - 1118711 * n6 / 3870720,
            17 * n3 / 480 - 37 * n4 / 840 - 209 * n5 / 4480 + 5569 * n6 / 90720,
            4397 * n4 / 161280 - 11 * n5 / 504 - 830251 * n6 / 7257600,
            4583 * n5 / 161280 - 108847 * n6 / 3991680,
            20648693 * n6 / 638668800,
        };
        return c;
    }();
    return k;
}

inline double delta_longitude_deg(double lon, double lon0) {
    double d = std::fmod(lon - lon0, 360.0);
    if (d > 180.0) d -= 360.0;
    if (d <= -180.0) d += 360.0;
    return d;
}

/// (easting, northing) relative to the equator on the meridian lon0.
inline Vec2 tm_forward(double lat_deg, double dlon_deg) {
    const auto& k = wgs84_tm();
    const double phi = deg2rad(lat_deg);
    const double lam = deg2rad(dlon_deg);
    const double tau = std::tan(phi);
    const double sigma = std::sinh(k.e * std::atanh(k.e * tau / std::sqrt(1.0 + tau * tau)));
    const double taup = tau * std::sqrt(1.0 + sigma * sigma) - sigma * std::sqrt(1.0 + tau * tau);
    const double xip = std::atan2(taup, std::cos(lam));
    const double etap = std::asinh(std::sin(lam) / std::sqrt(taup * taup + std::cos(lam) * std::cos(lam)));
    double xi = xip, eta = etap;
    for (int j = 1; j <= 6; ++j) {
        xi += k.alpha[j - 1] * std::sin(2 * j * xip) * std::cosh(2 * j * etap);
        eta += k.alpha[j - 1] * std::cos(2 * j * xip) * std::sinh(2 * j * etap);
    }
    return {k.A * eta, k.A * xi};
}

inline GeoPoint tm_inverse(double x, double y, double lon0_deg) {
    const auto& k = wgs84_tm();
    const double xi = y / k.A, eta = x / k.A;
    double xip = xi, etap = eta;
    for (int j = 1; j <= 6; ++j) {
        xip -= k.beta[j - 1] * std::sin(2 * j * xi) * std::cosh(2 * j * eta);
        etap -= k.beta[j - 1] * std::cos(2 * j * xi) * std::sinh(2 * j * eta);
    }
    const double taup = std::sin(xip) / std::sqrt(std::sinh(etap) * std::sinh(etap) + std::cos(xip) * std::cos(xip));
    const double lam = std::atan2(std::sinh(etap), std::cos(xip));

    // Newton iteration for tau given tau'.
    const double e2m = 1.0 - k.e2;
    double tau = taup / e2m;
    for (int it = 0; it < 8; ++it) {
        const double sig = std::sinh(k.e * std::atanh(k.e * tau / std::sqrt(1.0 + tau * tau)));
        const double taupi = tau * std::sqrt(1.0 + sig * sig) - sig * std::sqrt(1.0 + tau * tau);
        const double dtau = (taup - taupi) / std::sqrt(1.0 + taupi * taupi) * (1.0 + e2m * tau * tau) /
                            (e2m * std::sqrt(1.0 + tau * tau));
        tau += dtau;
        if (std::abs(dtau) < 1e-15 * std::max(1.0, std::abs(tau))) break;
    }
    GeoPoint g;
    g.latitude = rad2deg(std::atan(tau));
    g.longitude = lon0_deg + rad2deg(lam);
    if (g.longitude > 180.0) g.longitude -= 360.0;
    if (g.longitude <= -180.0) g.longitude += 360.0;
    return g;
}

}  // namespace detail

/// Half-width of the longitude band around the reference meridian in which
/// the projection is accepted.
inline constexpr double kMercatorZoneHalfWidthDeg = 4.0;

inline void validate_geo(const GeoPoint& p) {
    if (!(p.latitude >= -90.0 && p.latitude <= 90.0) || !(p.longitude > -180.0 && p.longitude <= 180.0)) {
        throw Error("map", "geodetic point out of range (lat " + std::to_string(p.latitude) + ", lon " +
                               std::to_string(p.longitude) + ")");
    }
}

/// Projects a geodetic point to a flat easting-northing frame centered on
/// `reference` (reference maps to (0, 0), reference meridian is the grid north).
inline EnPoint mercator_project(const GeoPoint& p, const GeoPoint& reference) {
    validate_geo(p);
    validate_geo(reference);
    const double dlon = detail::delta_longitude_deg(p.longitude, reference.longitude);
    if (std::abs(dlon) > kMercatorZoneHalfWidthDeg) {
        throw Error("map", "point is " + std::to_string(dlon) +
                               " deg of longitude from the reference meridian; the projection is only valid within +/-" +
                               std::to_string(kMercatorZoneHalfWidthDeg) + " deg");
    }
    const Vec2 xy = detail::tm_forward(p.latitude, dlon);
    const Vec2 origin = detail::tm_forward(reference.latitude, 0.0);
    return {xy.x() - origin.x(), xy.y() - origin.y()};
}

inline GeoPoint mercator_unproject(const EnPoint& en, const GeoPoint& reference) {
    validate_geo(reference);
    const Vec2 origin = detail::tm_forward(reference.latitude, 0.0);
    return detail::tm_inverse(en.easting + origin.x(), en.northing + origin.y(), reference.longitude);
}

}  // namespace radcal
