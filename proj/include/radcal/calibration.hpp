#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "radcal/config.hpp"
#include "radcal/ego_state.hpp"
#include "radcal/error_model.hpp"
#include "radcal/geo_map.hpp"
#include "radcal/metrics.hpp"
#include "radcal/rotation_calib.hpp"
#include "radcal/sim.hpp"
#include "radcal/translation_calib.hpp"

namespace radcal {

/// Logs consumed by the calibration pipeline. The static part may be empty,
/// in which case only the rotation is estimated.
struct CalibrationData {
    DetectionLog moving_detections;
    std::vector<EgoMeasurement> moving_ego;
    DetectionLog static_detections;
    std::vector<EgoMeasurement> static_ego;
    TargetMap map;
};

/// Result for one radar. `translation` is absent when that stage failed;
/// `translation_error` then says why.
struct ExtrinsicCalibration {
    std::string radar_id;
    RotationEstimate rotation;
    std::size_t n_trajectories = 0;
    std::optional<TranslationEstimate> translation;
    std::size_t n_sightings = 0;
    std::string translation_error;

    TransformSE2 radar_to_vehicle() const {
        return {rotation.theta_r, translation ? translation->t : Vec2::Zero()};
    }
};

/// Groups one radar's detections into time-ordered trajectories keyed by
/// track id, with datasheet errors attached.
inline std::vector<Trajectory> build_trajectories(const DetectionLog& log, const std::string& radar_id,
                                                  const RadarSpec& spec, double boresight) {
    std::map<std::string, Trajectory> by_track;
    for (const auto& d : log) {
        if (d.radar_id != radar_id) continue;
        auto& traj = by_track[d.track_id];
        traj.track_id = d.track_id;
        traj.points.push_back(detection_from_point(spec, boresight, d.x, d.y, d.t, d.track_id));
    }
    std::vector<Trajectory> out;
    for (auto& [id, traj] : by_track) {
        auto& p = traj.points;
        std::stable_sort(p.begin(), p.end(), [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
        p.erase(std::unique(p.begin(), p.end(), [](const auto& a, const auto& b) { return a.timestamp == b.timestamp; }),
                p.end());
        if (p.size() >= 2) out.push_back(std::move(traj));
    }
    return out;
}

struct StaticSpan {
    double t_begin = 0.0;
    double t_end = 0.0;
    Pose2D pose;
};

/// Maximal runs of filtered states with |v| below `speed_max`, lasting at
/// least `min_duration`; the pose is the mean over the run.
inline std::vector<StaticSpan> find_static_spans(const PoseTrack& track, double speed_max, double min_duration) {
    std::vector<StaticSpan> spans;
    const auto& st = track.states();
    std::size_t i = 0;
    while (i < st.size()) {
        if (std::abs(st[i].speed()) >= speed_max) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < st.size() && std::abs(st[j + 1].speed()) < speed_max) ++j;
        if (st[j].time - st[i].time >= min_duration) {
            double e = 0.0, n = 0.0, c = 0.0, s = 0.0;
            for (std::size_t k = i; k <= j; ++k) {
                e += st[k].easting();
                n += st[k].northing();
                c += std::cos(st[k].heading());
                s += std::sin(st[k].heading());
            }
            const auto cnt = static_cast<double>(j - i + 1);
            spans.push_back({st[i].time, st[j].time, Pose2D(e / cnt, n / cnt, std::atan2(s, c))});
        }
        i = j + 1;
    }
    return spans;
}

/// One averaged detection per (static span, track), errors from the datasheet.
inline std::vector<Sighting> static_sightings(const DetectionLog& log, const std::string& radar_id, const RadarSpec& spec,
                                              double boresight, const std::vector<StaticSpan>& spans) {
    std::vector<Sighting> out;
    for (const auto& span : spans) {
        std::map<std::string, std::pair<Vec2, int>> acc;
        std::map<std::string, double> first_t;
        for (const auto& d : log) {
            if (d.radar_id != radar_id || d.t < span.t_begin - 1e-9 || d.t > span.t_end + 1e-9) continue;
            auto& [sum, n] = acc.try_emplace(d.track_id, Vec2::Zero(), 0).first->second;
            sum += Vec2(d.x, d.y);
            ++n;
            first_t.try_emplace(d.track_id, d.t);
        }
        for (const auto& [track, sn] : acc) {
            const Vec2 mean = sn.first / sn.second;
            out.push_back({span.pose, detection_from_point(spec, boresight, mean.x(), mean.y(), first_t[track], track)});
        }
    }
    return out;
}

/// Per-radar inputs shared by every scoring-function choice.
struct PreparedRadar {
    std::string radar_id;
    std::vector<Trajectory> trajectories;   // after the straight-line gate
    std::vector<DirectionSample> rotation_samples;
    std::vector<Sighting> sightings;        // deduplicated static detections
};

struct PreparedData {
    std::vector<PreparedRadar> radars;
    std::string static_error;  // why no static sightings could be built, if so
};

inline PreparedData prepare(const RunConfig& cfg, const CalibrationData& data) {
    cfg.validate();
    PreparedData out;
    const PoseTrack moving_track = [&] {
        try {
            return run_ego_filter(data.moving_ego, cfg.ego_filter);
        } catch (const Error& e) {
            throw Error("ego", std::string("moving sequence: ") + e.what());
        }
    }();

    std::vector<StaticSpan> spans;
    if (data.static_ego.empty()) {
        out.static_error = "no static sequence supplied";
    } else {
        try {
            spans = find_static_spans(run_ego_filter(data.static_ego, cfg.ego_filter), cfg.static_speed_max,
                                      cfg.min_static_duration);
            if (spans.empty()) out.static_error = "static sequence contains no standing pose";
        } catch (const Error& e) {
            out.static_error = std::string("static sequence: ") + e.what();
        }
    }

    for (const auto& radar : cfg.radars) {
        const RadarSpec& spec = cfg.model_of(radar);
        PreparedRadar pr;
        pr.radar_id = radar.id;
        const auto raw = build_trajectories(data.moving_detections, radar.id, spec, radar.boresight);
        pr.trajectories = straight_segment_filter(moving_track, raw, cfg.yaw_rate_max);
        pr.rotation_samples = ego_motion_samples(pr.trajectories, cfg.max_trajectory_points);
        if (!spans.empty()) pr.sightings = static_sightings(data.static_detections, radar.id, spec, radar.boresight, spans);
        out.radars.push_back(std::move(pr));
    }
    return out;
}

inline std::pair<RotationEstimate, ScoreField1D> estimate_radar_rotation(const PreparedRadar& pr, RotationScoring fn,
                                                                         double resolution) {
    if (pr.rotation_samples.empty()) {
        throw Error("rotation", "radar '" + pr.radar_id + "' has no usable straight-line trajectory");
    }
    ScoreField1D field = accumulate_rotation_score(pr.rotation_samples, fn, resolution);
    RotationEstimate est = estimate_rotation(field);
    est.n_samples = pr.rotation_samples.size();
    est.scoring_fn = fn;
    return {est, std::move(field)};
}

/// Gated detection-target offsets pooled over all static sightings.
inline std::vector<TranslationSample> translation_samples(const std::vector<Sighting>& sightings, double theta_r,
                                                          const TargetMap& map, const TranslationLimits& limits) {
    std::vector<TranslationSample> samples;
    std::vector<VehicleTarget> targets;
    for (const auto& s : sightings) {
        targets.clear();
        for (const auto& t : map.targets()) targets.push_back({t.id, world_to_vehicle(s.pose, t.position)});
        const CartesianDetection rotated = rotate_detection(theta_r, s.detection);
        gate_translations(std::span(&rotated, 1), targets, limits, samples);
    }
    return samples;
}

inline std::pair<TranslationEstimate, ScoreField2D> estimate_radar_translation(const PreparedRadar& pr, double theta_r,
                                                                               const TargetMap& map,
                                                                               const TranslationLimits& limits,
                                                                               TranslationScoring fn, double resolution) {
    if (pr.sightings.empty()) throw Error("translation", "radar '" + pr.radar_id + "' has no static sightings");
    const auto samples = translation_samples(pr.sightings, theta_r, map, limits);
    if (samples.empty()) {
        throw Error("translation", "radar '" + pr.radar_id +
                                       "': no detection-target offset inside the translation limits (wrong rotation?)");
    }
    ScoreField2D field = accumulate_translation_score(samples, fn, limits, resolution);
    TranslationEstimate est = estimate_translation(field);
    est.n_samples = samples.size();
    est.scoring_fn = fn;
    return {est, std::move(field)};
}

struct CalibrationRun {
    std::vector<ExtrinsicCalibration> results;
    std::vector<ScoreField1D> rotation_fields;
    std::vector<std::optional<ScoreField2D>> translation_fields;
};

/// Full pipeline for every configured radar with the configured scoring pair.
inline CalibrationRun calibrate(const RunConfig& cfg, const CalibrationData& data) {
    const PreparedData prep = prepare(cfg, data);
    CalibrationRun run;
    for (const auto& pr : prep.radars) {
        ExtrinsicCalibration cal;
        cal.radar_id = pr.radar_id;
        auto [rot, rot_field] = estimate_radar_rotation(pr, cfg.rotation_fn, cfg.angle_resolution);
        cal.rotation = rot;
        cal.n_trajectories = pr.trajectories.size();
        cal.n_sightings = pr.sightings.size();
        std::optional<ScoreField2D> trans_field;
        if (!prep.static_error.empty()) {
            cal.translation_error = prep.static_error;
        } else {
            try {
                auto [tr, field] = estimate_radar_translation(pr, rot.theta_r, data.map, cfg.limits(),
                                                              cfg.translation_fn, cfg.trans_resolution);
                cal.translation = tr;
                trans_field = std::move(field);
            } catch (const Error& e) {
                cal.translation_error = e.what();
            }
        }
        run.results.push_back(std::move(cal));
        run.rotation_fields.push_back(std::move(rot_field));
        run.translation_fields.push_back(std::move(trans_field));
    }
    return run;
}

/// Deduplicated static sightings for evaluation, rebuilt from logs.
inline std::vector<Sighting> evaluation_sightings(const RunConfig& cfg, const DetectionLog& static_log,
                                                  const std::vector<EgoMeasurement>& static_ego,
                                                  const std::string& radar_id) {
    const RadarEntry& radar = cfg.radar(radar_id);
    const auto spans = find_static_spans(run_ego_filter(static_ego, cfg.ego_filter), cfg.static_speed_max,
                                         cfg.min_static_duration);
    return static_sightings(static_log, radar_id, cfg.model_of(radar), radar.boresight, spans);
}

struct SweepCell {
    RotationScoring rotation_fn{};
    TranslationScoring translation_fn{};
    double theta_r = 0.0;
    Vec2 t = Vec2::Zero();
    std::optional<EvaluationReport> report;  // absent when translation failed
    std::string error;
};

/// Every rotation/translation scoring pair for one radar, scored with the
/// metrics on the static sightings. Row-major: rotation outer.
inline std::vector<SweepCell> sweep(const RunConfig& cfg, const CalibrationData& data, const std::string& radar_id) {
    (void)cfg.radar(radar_id);
    const PreparedData prep = prepare(cfg, data);
    const auto it = std::find_if(prep.radars.begin(), prep.radars.end(),
                                 [&](const PreparedRadar& p) { return p.radar_id == radar_id; });
    const PreparedRadar& pr = *it;
    if (!prep.static_error.empty()) throw Error("translation", prep.static_error);
    std::vector<SweepCell> cells;
    for (RotationScoring rf : kRotationScorings) {
        const RotationEstimate rot = estimate_radar_rotation(pr, rf, cfg.angle_resolution).first;
        for (TranslationScoring tf : kTranslationScorings) {
            SweepCell cell{rf, tf, rot.theta_r, Vec2::Zero(), std::nullopt, {}};
            try {
                cell.t = estimate_radar_translation(pr, rot.theta_r, data.map, cfg.limits(), tf, cfg.trans_resolution).first.t;
                cell.report = evaluate({rot.theta_r, cell.t}, pr.sightings, data.map, cfg.match_gate);
            } catch (const Error& e) {
                cell.error = e.what();
            }
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

// --- JSON -------------------------------------------------------------------

inline json calibration_to_json(const ExtrinsicCalibration& c) {
    json j{{"radar_id", c.radar_id},
           {"rotation",
            {{"theta_r", c.rotation.theta_r},
             {"band_halfwidth", c.rotation.band_halfwidth},
             {"n_samples", c.rotation.n_samples},
             {"n_trajectories", c.n_trajectories},
             {"scoring_fn", std::string(to_string(c.rotation.scoring_fn))}}}};
    if (c.translation) {
        j["translation"] = {{"tx", c.translation->t.x()},
                            {"ty", c.translation->t.y()},
                            {"n_samples", c.translation->n_samples},
                            {"n_sightings", c.n_sightings},
                            {"scoring_fn", std::string(to_string(c.translation->scoring_fn))}};
    } else {
        j["translation"] = nullptr;
        j["translation_error"] = c.translation_error;
    }
    return j;
}

inline ExtrinsicCalibration calibration_from_json(const json& j) {
    ExtrinsicCalibration c;
    c.radar_id = j.at("radar_id").get<std::string>();
    const auto& r = j.at("rotation");
    c.rotation.theta_r = r.at("theta_r").get<double>();
    c.rotation.band_halfwidth = r.at("band_halfwidth").get<double>();
    c.rotation.n_samples = r.at("n_samples").get<std::size_t>();
    c.rotation.scoring_fn = parse_rotation_scoring(r.at("scoring_fn").get<std::string>());
    c.n_trajectories = r.value("n_trajectories", std::size_t{0});
    if (j.contains("translation") && !j.at("translation").is_null()) {
        const auto& t = j.at("translation");
        TranslationEstimate te;
        te.t = Vec2(t.at("tx").get<double>(), t.at("ty").get<double>());
        te.n_samples = t.at("n_samples").get<std::size_t>();
        te.scoring_fn = parse_translation_scoring(t.at("scoring_fn").get<std::string>());
        c.translation = te;
        c.n_sightings = t.value("n_sightings", std::size_t{0});
    } else {
        c.translation_error = j.value("translation_error", std::string{});
    }
    return c;
}

}  // namespace radcal
