#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "radcal/common.hpp"
#include "radcal/ego_state.hpp"
#include "radcal/error_model.hpp"
#include "radcal/geo_map.hpp"

namespace radcal {

/// Straight road lined with two pole rows, with a ring of poles (roundabout)
/// past its far end. The road runs from `origin` along `heading`.
struct SiteConfig {
    EnPoint origin{440000.0, 4480000.0};
    double heading = 0.35;          // rad, road direction in the world frame
    double length = 300.0;          // m
    double pole_spacing = 25.0;     // m
    double row_offset = 9.0;        // m, lateral distance of each row from the centerline
    double lane_offset = -1.75;     // m, lateral position of the driven lane
    int roundabout_poles = 8;       // 0 disables the ring
    double roundabout_radius = 15.0;
    double roundabout_distance = 25.0;  // center beyond the road end
    double jitter = 0.4;            // m, half-width of the uniform scatter of every pole
    std::uint64_t layout_seed = 7;  // fixes the scatter independently of the run seed

    EnPoint at(double along, double lateral) const {
        const double c = std::cos(heading), s = std::sin(heading);
        return {origin.easting + along * c - lateral * s, origin.northing + along * s + lateral * c};
    }
};

namespace detail {

inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id)};
    return std::mt19937_64(seq);
}

}  // namespace detail

/// Pole rows on both sides of the road plus the roundabout ring. Poles are
/// scattered by up to `jitter` so that no two sit on a common 0.1 m lattice.
inline TargetMap make_site(const SiteConfig& site) {
    if (!(site.length > 0.0) || !(site.pole_spacing > 0.0) || site.jitter < 0.0) {
        throw Error("sim", "site needs positive length and pole spacing and a non-negative jitter");
    }
    auto rng = detail::stream(site.layout_seed, 3);
    std::uniform_real_distribution<double> scatter(-site.jitter, site.jitter);
    auto jittered = [&](double along, double lateral) {
        const double da = scatter(rng);
        const double dl = scatter(rng);
        return site.at(along + da, lateral + dl);
    };
    std::vector<Target> targets;
    const int n = static_cast<int>(std::floor(site.length / site.pole_spacing + 1e-9));
    char buf[32];
    for (int k = 0; k <= n; ++k) {
        std::snprintf(buf, sizeof buf, "L%03d", k);
        targets.push_back({buf, jittered(k * site.pole_spacing, site.row_offset)});
        std::snprintf(buf, sizeof buf, "R%03d", k);
        targets.push_back({buf, jittered(k * site.pole_spacing, -site.row_offset)});
    }
    for (int k = 0; k < site.roundabout_poles; ++k) {
        const double a = kTwoPi * k / site.roundabout_poles;
        std::snprintf(buf, sizeof buf, "A%02d", k);
        targets.push_back({buf, jittered(site.length + site.roundabout_distance + site.roundabout_radius * std::cos(a),
                                         site.roundabout_radius * std::sin(a))});
    }
    return TargetMap(std::move(targets));
}

/// A radar on the vehicle: its model, the direction of its boresight inside
/// its own reporting frame, and the true radar-to-vehicle transform.
struct RadarMount {
    std::string id;
    RadarSpec spec;
    double boresight = 0.0;
    TransformSE2 mount;
};

/// Default rig: forward long-range radar reporting in a frame turned by 90
/// degrees, and two rear-corner short-range radars looking sideways.
inline std::vector<RadarMount> default_mounts() {
    return {
        {"ARS", ars308(), -kPi / 2, {1.5708, Vec2(3.7, 0.0)}},
        {"SRR-L", srr208(), kPi / 2, {0.19, Vec2(-0.6, 0.85)}},
        {"SRR-R", srr208(), kPi / 2, {2.78, Vec2(-0.6, -0.85)}},
    };
}

struct EgoNoise {
    double sigma_e = 0.02;
    double sigma_n = 0.02;
    double sigma_v = 0.05;
    double sigma_yaw_rate = 0.002;
    double sigma_accel = 0.05;
};

struct Scenario {
    SiteConfig site;
    TargetMap target_map;
    std::vector<RadarMount> mounts;
    EgoNoise ego_noise;
    std::uint64_t seed = 1;
    bool zero_noise = false;
    double radar_rate = 15.0;  // Hz
    double ego_rate = 10.0;    // Hz

    static Scenario with_defaults(SiteConfig site = {}, std::uint64_t seed = 1) {
        Scenario s;
        s.site = site;
        s.target_map = make_site(site);
        s.mounts = default_mounts();
        s.seed = seed;
        return s;
    }
};

struct DetectionRow {
    double t = 0.0;
    std::string radar_id;
    std::string track_id;
    double x = 0.0;  // m, multiple of kCanResolution
    double y = 0.0;
};

using DetectionLog = std::vector<DetectionRow>;

/// Everything one simulated drive produces.
struct SimSequence {
    std::vector<EgoState> ego_truth;          // at ego ticks
    std::vector<EgoMeasurement> ego_log;      // noisy ego channels at ego ticks
    DetectionLog detections;
    std::vector<int> segment_of_tick;         // drive segment index per ego tick
};

/// Piecewise-constant control: acceleration and yaw rate held for `duration`.
struct DriveSegment {
    double duration = 0.0;
    double accel = 0.0;
    double yaw_rate = 0.0;
};

inline double quantize(double v) { return std::round(v / kCanResolution) * kCanResolution; }

/// Adds datasheet noise to a true polar return and attaches the 1-sigma values.
inline PolarDetection noise_model(const RadarSpec& spec, const PolarDetection& truth, std::mt19937_64& rng,
                                  bool zero_noise = false, double boresight = 0.0) {
    const double rel = wrap_angle(truth.bearing - boresight);
    if (std::abs(rel) > spec.fov_limit || truth.range > spec.range_limit || truth.range < 0.0) {
        throw Error("sim", "true detection lies outside the field of view of " + spec.name);
    }
    PolarDetection out = truth;
    out.range_error = range_accuracy(spec, truth.range);
    out.bearing_error = angle_accuracy(spec, rel);
    if (!zero_noise) {
        std::normal_distribution<double> unit(0.0, 1.0);
        out.range += out.range_error * unit(rng);
        out.bearing += out.bearing_error * unit(rng);
    }
    return out;
}

namespace detail {

inline constexpr double kMinRange = 0.5;  // m

inline void emit_frames(const Scenario& sc, const PoseTrack& truth, double t_end, std::mt19937_64& rng,
                        DetectionLog& log) {
    const auto n_frames = static_cast<long>(std::floor(t_end * sc.radar_rate + 1e-9));
    // last frame index at which each (radar, target) was visible, and its visit count
    std::map<std::pair<std::string, std::string>, std::pair<long, int>> visits;
    for (long f = 0; f <= n_frames; ++f) {
        const double t = static_cast<double>(f) / sc.radar_rate;
        const auto pose = truth.pose_at(t);
        if (!pose) continue;
        for (const auto& m : sc.mounts) {
            const TransformSE2 vehicle_to_radar = m.mount.inverse();
            for (const auto& tg : sc.target_map.targets()) {
                const Vec2 p = vehicle_to_radar.apply(world_to_vehicle(*pose, tg.position));
                PolarDetection truth_det;
                truth_det.range = p.norm();
                truth_det.bearing = std::atan2(p.y(), p.x());
                const double rel = wrap_angle(truth_det.bearing - m.boresight);
                if (truth_det.range > m.spec.range_limit || truth_det.range < kMinRange ||
                    std::abs(rel) > m.spec.fov_limit) {
                    continue;
                }
                auto& [last, count] = visits.try_emplace({m.id, tg.id}, -2, -1).first->second;
                if (last != f - 1) ++count;
                last = f;
                const PolarDetection noisy = noise_model(m.spec, truth_det, rng, sc.zero_noise, m.boresight);
                DetectionRow row;
                row.t = t;
                row.radar_id = m.id;
                row.track_id = count == 0 ? tg.id : tg.id + "#" + std::to_string(count);
                row.x = quantize(noisy.range * std::cos(noisy.bearing));
                row.y = quantize(noisy.range * std::sin(noisy.bearing));
                log.push_back(std::move(row));
            }
        }
    }
}

}  // namespace detail

/// Integrates a drive plan from `start` and renders ego measurements and
/// radar detections for every mount.
inline SimSequence generate_drive(const Scenario& sc, const Pose2D& start, double initial_speed,
                                  const std::vector<DriveSegment>& plan) {
    if (!(sc.ego_rate > 0.0) || !(sc.radar_rate > 0.0) || sc.radar_rate > 20.0) {
        throw Error("sim", "radar rate must be in (0, 20] Hz and ego rate positive");
    }
    const double dt = 1.0 / sc.ego_rate;
    SimSequence seq;
    EgoState s;
    s.x << start.easting, start.northing, start.heading, initial_speed, 0.0, 0.0;
    auto rng_ego = detail::stream(sc.seed, 1);
    auto rng_radar = detail::stream(sc.seed, 2);
    std::normal_distribution<double> unit(0.0, 1.0);

    auto record = [&](int segment) {
        seq.ego_truth.push_back(s);
        seq.segment_of_tick.push_back(segment);
        EgoMeasurement m;
        m.time = s.time;
        const auto& nz = sc.ego_noise;
        m.sigma_e = nz.sigma_e;
        m.sigma_n = nz.sigma_n;
        m.sigma_v = nz.sigma_v;
        m.sigma_yaw_rate = nz.sigma_yaw_rate;
        m.sigma_accel = nz.sigma_accel;
        const double k = sc.zero_noise ? 0.0 : 1.0;
        m.easting = s.easting() + k * nz.sigma_e * unit(rng_ego);
        m.northing = s.northing() + k * nz.sigma_n * unit(rng_ego);
        m.speed = s.speed() + k * nz.sigma_v * unit(rng_ego);
        m.yaw_rate = s.yaw_rate() + k * nz.sigma_yaw_rate * unit(rng_ego);
        m.acceleration = s.acceleration() + k * nz.sigma_accel * unit(rng_ego);
        seq.ego_log.push_back(m);
    };

    long tick = 0;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        const auto steps = static_cast<long>(std::llround(plan[i].duration / dt));
        s.x[EgoState::kAccel] = plan[i].accel;
        s.x[EgoState::kYawRate] = plan[i].yaw_rate;
        for (long k = 0; k < steps; ++k) {
            record(static_cast<int>(i));
            s.x = detail::ctra_step(s.x, dt);
            s.time = static_cast<double>(++tick) * dt;
        }
    }
    if (plan.empty()) throw Error("sim", "empty drive plan");
    // final state keeps the last segment's controls
    record(static_cast<int>(plan.size() - 1));

    const PoseTrack truth(seq.ego_truth);
    detail::emit_frames(sc, truth, seq.ego_truth.back().time, rng_radar, seq.detections);
    if (seq.detections.empty()) throw Error("sim", "no target is ever visible to any radar");
    return seq;
}

/// Constant-speed straight pass along the driven lane starting at the road origin.
inline SimSequence generate_moving_sequence(const Scenario& sc, double speed, double duration, double rate) {
    if (!(speed > 0.0)) throw Error("sim", "speed must be positive");
    if (!(duration > 0.0)) throw Error("sim", "duration must be positive");
    if (!(rate > 0.0) || rate > 20.0) throw Error("sim", "radar rate must be in (0, 20] Hz");
    Scenario s = sc;
    s.radar_rate = rate;
    const EnPoint p0 = sc.site.at(0.0, sc.site.lane_offset);
    return generate_drive(s, Pose2D(p0.easting, p0.northing, sc.site.heading), speed, {{duration, 0.0, 0.0}});
}

/// Parameters of the stop-and-go drive used to record static poses.
struct StaticPlan {
    double approach_speed = 5.0;   // m/s
    double approach_time = 16.0;   // s at constant speed before braking
    double brake = 1.0;            // m/s^2
    double hop_time = 1.5;         // s accelerating, then the same braking
    double dwell = 1.0;            // s standing at each pose
    double last_pose_gap = 23.0;   // m between the last pose and the road end
    double hop_yaw_rate = 0.01;    // rad/s held during a hop; sign pattern + + - - so poses differ in heading
};

/// Stop-and-go drive towards the road end, standing still at `n_poses` poses.
/// Returns the ego truth of each standing pose alongside the full sequence.
inline std::pair<std::vector<Pose2D>, SimSequence> generate_static_poses(const Scenario& sc, int n_poses,
                                                                         const StaticPlan& plan = {}) {
    if (n_poses < 1) throw Error("sim", "n_poses must be at least 1");
    const double brake_time = plan.approach_speed / plan.brake;
    const double approach_dist = plan.approach_speed * plan.approach_time + 0.5 * plan.approach_speed * brake_time;
    const double hop_dist = plan.brake * plan.hop_time * plan.hop_time;
    const double first_pose = sc.site.length - plan.last_pose_gap - hop_dist * (n_poses - 1);
    const EnPoint p0 = sc.site.at(first_pose - approach_dist, sc.site.lane_offset);

    std::vector<DriveSegment> segs;
    segs.push_back({plan.approach_time, 0.0, 0.0});
    segs.push_back({brake_time, -plan.brake, 0.0});
    std::vector<int> dwell_segments;
    for (int k = 0; k < n_poses; ++k) {
        dwell_segments.push_back(static_cast<int>(segs.size()));
        segs.push_back({plan.dwell, 0.0, 0.0});
        if (k + 1 < n_poses) {
            const double yaw = (k % 4 < 2 ? 1.0 : -1.0) * plan.hop_yaw_rate;
            segs.push_back({plan.hop_time, plan.brake, yaw});
            segs.push_back({plan.hop_time, -plan.brake, yaw});
        }
    }
    SimSequence seq = generate_drive(sc, Pose2D(p0.easting, p0.northing, sc.site.heading), plan.approach_speed, segs);
    std::vector<Pose2D> poses;
    for (int seg : dwell_segments) {
        for (std::size_t i = 0; i < seq.segment_of_tick.size(); ++i) {
            if (seq.segment_of_tick[i] == seg) {
                poses.push_back(state_to_pose(seq.ego_truth[i]));
                break;
            }
        }
    }
    return {std::move(poses), std::move(seq)};
}

}  // namespace radcal
