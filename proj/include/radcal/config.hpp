#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "radcal/common.hpp"
#include "radcal/ego_state.hpp"
#include "radcal/error_model.hpp"
#include "radcal/metrics.hpp"
#include "radcal/rotation_calib.hpp"
#include "radcal/sim.hpp"
#include "radcal/translation_calib.hpp"

namespace radcal {

using nlohmann::json;

/// A radar to calibrate: its id in the logs, its model and the boresight
/// direction inside its reporting frame.
struct RadarEntry {
    std::string id;
    std::string model;
    double boresight = 0.0;  // rad
};

/// True mount used by the simulator.
struct SimMount {
    std::string radar_id;
    double rotation = 0.0;
    Vec2 translation = Vec2::Zero();
};

struct SimConfig {
    SiteConfig site;
    std::vector<SimMount> mounts{{"ARS", 1.5708, Vec2(3.7, 0.0)}, {"SRR-L", 0.19, Vec2(-0.6, 0.85)}, {"SRR-R", 2.78, Vec2(-0.6, -0.85)}};
    EgoNoise ego_noise;
    double moving_speed = 20.0 / 3.6;
    double moving_duration = 60.0;
    double radar_rate = 15.0;
    int n_static_poses = 22;
    StaticPlan static_plan;
};

struct RunConfig {
    std::map<std::string, RadarSpec> models{{"ARS-308", ars308()}, {"SRR-208", srr208()}};
    std::vector<RadarEntry> radars{{"ARS", "ARS-308", -kPi / 2}, {"SRR-L", "SRR-208", kPi / 2}, {"SRR-R", "SRR-208", kPi / 2}};
    RotationScoring rotation_fn = RotationScoring::s1;
    TranslationScoring translation_fn = TranslationScoring::s5;
    double angle_resolution = 0.001;  // rad
    double trans_resolution = 0.02;   // m
    double vehicle_width = 1.79;
    double vehicle_length = 4.33;
    double gap_x = 1.0;
    double gap_y = 0.5;
    double yaw_rate_max = 0.02;       // rad/s
    double match_gate = kDefaultMatchGate;
    std::size_t max_trajectory_points = 200;
    double static_speed_max = 0.1;    // m/s
    double min_static_duration = 0.5; // s
    std::uint64_t seed = 1;
    bool zero_noise = false;
    std::optional<GeoPoint> map_reference;
    EgoFilterConfig ego_filter;
    SimConfig sim;

    TranslationLimits limits() const { return TranslationLimits::from_vehicle(vehicle_width, vehicle_length, gap_x, gap_y); }

    const RadarSpec& model_of(const RadarEntry& r) const {
        auto it = models.find(r.model);
        if (it == models.end()) throw Error("config", "radar '" + r.id + "' uses unknown model '" + r.model + "'");
        return it->second;
    }

    const RadarEntry& radar(const std::string& id) const {
        for (const auto& r : radars) {
            if (r.id == id) return r;
        }
        throw Error("config", "unknown radar id '" + id + "'");
    }

    void validate() const {
        if (!(angle_resolution > 0.0) || !(trans_resolution > 0.0)) throw Error("config", "grid resolutions must be positive");
        if (!(match_gate > 0.0)) throw Error("config", "match gate must be positive");
        if (!(yaw_rate_max > 0.0)) throw Error("config", "yaw_rate_max must be positive");
        if (max_trajectory_points < 2) throw Error("config", "max_trajectory_points must be at least 2");
        limits().validate();
        for (const auto& [name, m] : models) m.validate();
        for (const auto& r : radars) (void)model_of(r);
    }

    /// Simulator scenario implied by this configuration.
    Scenario scenario() const {
        Scenario sc;
        sc.site = sim.site;
        sc.target_map = make_site(sim.site);
        sc.ego_noise = sim.ego_noise;
        sc.seed = seed;
        sc.zero_noise = zero_noise;
        sc.radar_rate = sim.radar_rate;
        for (const auto& m : sim.mounts) {
            const RadarEntry& r = radar(m.radar_id);
            sc.mounts.push_back({r.id, model_of(r), r.boresight, {m.rotation, m.translation}});
        }
        return sc;
    }
};

// --- JSON -------------------------------------------------------------------

namespace detail {

template <class T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline json spec_to_json(const RadarSpec& s) {
    json bands = json::array();
    for (const auto& b : s.angle_bands) bands.push_back({rad2deg(b.fov_half_angle), rad2deg(b.accuracy)});
    json j{{"range_accuracy_min", s.range_accuracy_min},
           {"angle_bands_deg", bands},
           {"range_limit", s.range_limit}};
    j["range_accuracy_rel"] = s.range_accuracy_rel ? json(*s.range_accuracy_rel) : json(nullptr);
    return j;
}

inline RadarSpec spec_from_json(const std::string& name, const json& j) {
    RadarSpec s;
    s.name = name;
    s.range_accuracy_min = j.at("range_accuracy_min").get<double>();
    if (j.contains("range_accuracy_rel") && !j.at("range_accuracy_rel").is_null()) {
        s.range_accuracy_rel = j.at("range_accuracy_rel").get<double>();
    }
    for (const auto& b : j.at("angle_bands_deg")) {
        s.angle_bands.push_back({deg2rad(b.at(0).get<double>()), deg2rad(b.at(1).get<double>())});
    }
    s.range_limit = j.at("range_limit").get<double>();
    s.fov_limit = s.angle_bands.empty() ? 0.0 : s.angle_bands.back().fov_half_angle;
    s.validate();
    return s;
}

inline json config_to_json(const RunConfig& c) {
    json models = json::object();
    for (const auto& [name, m] : c.models) models[name] = spec_to_json(m);
    json radars = json::array();
    for (const auto& r : c.radars) radars.push_back({{"id", r.id}, {"model", r.model}, {"boresight_deg", rad2deg(r.boresight)}});
    json mounts = json::array();
    for (const auto& m : c.sim.mounts) {
        mounts.push_back({{"radar_id", m.radar_id}, {"rotation", m.rotation}, {"tx", m.translation.x()}, {"ty", m.translation.y()}});
    }
    const auto& st = c.sim.site;
    json j{
        {"radar_models", models},
        {"radars", radars},
        {"scoring", {{"rotation", std::string(to_string(c.rotation_fn))}, {"translation", std::string(to_string(c.translation_fn))}}},
        {"grid", {{"angle_res", c.angle_resolution}, {"trans_res", c.trans_resolution}}},
        {"vehicle", {{"width", c.vehicle_width}, {"length", c.vehicle_length}, {"gap_x", c.gap_x}, {"gap_y", c.gap_y}}},
        {"yaw_rate_max", c.yaw_rate_max},
        {"match_gate", c.match_gate},
        {"max_trajectory_points", c.max_trajectory_points},
        {"static_speed_max", c.static_speed_max},
        {"min_static_duration", c.min_static_duration},
        {"seed", c.seed},
        {"zero_noise", c.zero_noise},
        {"ego_filter",
         {{"process_variance_rate", std::vector<double>(c.ego_filter.process.variance_rate.data(), c.ego_filter.process.variance_rate.data() + 6)},
          {"initial_sigma", std::vector<double>(c.ego_filter.initial_sigma.data(), c.ego_filter.initial_sigma.data() + 6)},
          {"heading_seed_baseline", c.ego_filter.heading_seed_baseline}}},
        {"sim",
         {{"site",
           {{"origin_easting", st.origin.easting}, {"origin_northing", st.origin.northing}, {"heading", st.heading},
            {"length", st.length}, {"pole_spacing", st.pole_spacing}, {"row_offset", st.row_offset},
            {"lane_offset", st.lane_offset}, {"roundabout_poles", st.roundabout_poles},
            {"roundabout_radius", st.roundabout_radius}, {"roundabout_distance", st.roundabout_distance}, {"jitter", st.jitter},
            {"layout_seed", st.layout_seed}}},
          {"mounts", mounts},
          {"ego_noise",
           {{"sigma_E", c.sim.ego_noise.sigma_e}, {"sigma_N", c.sim.ego_noise.sigma_n}, {"sigma_v", c.sim.ego_noise.sigma_v},
            {"sigma_yaw_rate", c.sim.ego_noise.sigma_yaw_rate}, {"sigma_accel", c.sim.ego_noise.sigma_accel}}},
          {"moving_speed", c.sim.moving_speed},
          {"moving_duration", c.sim.moving_duration},
          {"radar_rate", c.sim.radar_rate},
          {"n_static_poses", c.sim.n_static_poses},
          {"static_dwell", c.sim.static_plan.dwell},
          {"static_last_pose_gap", c.sim.static_plan.last_pose_gap},
          {"static_hop_yaw_rate", c.sim.static_plan.hop_yaw_rate}}},
    };
    if (c.map_reference) j["map_reference"] = {{"lat", c.map_reference->latitude}, {"lon", c.map_reference->longitude}};
    return j;
}

inline RunConfig config_from_json(const json& j) {
    using detail::get_if;
    RunConfig c;
    if (j.contains("radar_models")) {
        for (const auto& [name, m] : j.at("radar_models").items()) c.models[name] = spec_from_json(name, m);
    }
    if (j.contains("radars")) {
        c.radars.clear();
        for (const auto& r : j.at("radars")) {
            c.radars.push_back({r.at("id").get<std::string>(), r.at("model").get<std::string>(),
                                deg2rad(r.value("boresight_deg", 0.0))});
        }
    }
    if (j.contains("scoring")) {
        const auto& s = j.at("scoring");
        if (s.contains("rotation")) c.rotation_fn = parse_rotation_scoring(s.at("rotation").get<std::string>());
        if (s.contains("translation")) c.translation_fn = parse_translation_scoring(s.at("translation").get<std::string>());
    }
    if (j.contains("grid")) {
        get_if(j.at("grid"), "angle_res", c.angle_resolution);
        get_if(j.at("grid"), "trans_res", c.trans_resolution);
    }
    if (j.contains("vehicle")) {
        const auto& v = j.at("vehicle");
        get_if(v, "width", c.vehicle_width);
        get_if(v, "length", c.vehicle_length);
        get_if(v, "gap_x", c.gap_x);
        get_if(v, "gap_y", c.gap_y);
    }
    get_if(j, "yaw_rate_max", c.yaw_rate_max);
    get_if(j, "match_gate", c.match_gate);
    get_if(j, "max_trajectory_points", c.max_trajectory_points);
    get_if(j, "static_speed_max", c.static_speed_max);
    get_if(j, "min_static_duration", c.min_static_duration);
    get_if(j, "seed", c.seed);
    get_if(j, "zero_noise", c.zero_noise);
    if (j.contains("map_reference")) {
        c.map_reference = GeoPoint{j.at("map_reference").at("lat").get<double>(), j.at("map_reference").at("lon").get<double>()};
    }
    if (j.contains("ego_filter")) {
        const auto& e = j.at("ego_filter");
        if (e.contains("process_variance_rate")) {
            const auto v = e.at("process_variance_rate").get<std::vector<double>>();
            if (v.size() != 6) throw Error("config", "ego_filter.process_variance_rate needs 6 values");
            for (int i = 0; i < 6; ++i) c.ego_filter.process.variance_rate[i] = v[static_cast<std::size_t>(i)];
        }
        if (e.contains("initial_sigma")) {
            const auto v = e.at("initial_sigma").get<std::vector<double>>();
            if (v.size() != 6) throw Error("config", "ego_filter.initial_sigma needs 6 values");
            for (int i = 0; i < 6; ++i) c.ego_filter.initial_sigma[i] = v[static_cast<std::size_t>(i)];
        }
        get_if(e, "heading_seed_baseline", c.ego_filter.heading_seed_baseline);
    }
    if (j.contains("sim")) {
        const auto& s = j.at("sim");
        if (s.contains("site")) {
            const auto& st = s.at("site");
            get_if(st, "origin_easting", c.sim.site.origin.easting);
            get_if(st, "origin_northing", c.sim.site.origin.northing);
            get_if(st, "heading", c.sim.site.heading);
            get_if(st, "length", c.sim.site.length);
            get_if(st, "pole_spacing", c.sim.site.pole_spacing);
            get_if(st, "row_offset", c.sim.site.row_offset);
            get_if(st, "lane_offset", c.sim.site.lane_offset);
            get_if(st, "roundabout_poles", c.sim.site.roundabout_poles);
            get_if(st, "roundabout_radius", c.sim.site.roundabout_radius);
            get_if(st, "roundabout_distance", c.sim.site.roundabout_distance);
            get_if(st, "jitter", c.sim.site.jitter);
            get_if(st, "layout_seed", c.sim.site.layout_seed);
        }
        if (s.contains("mounts")) {
            c.sim.mounts.clear();
            for (const auto& m : s.at("mounts")) {
                c.sim.mounts.push_back({m.at("radar_id").get<std::string>(), m.at("rotation").get<double>(),
                                        Vec2(m.at("tx").get<double>(), m.at("ty").get<double>())});
            }
        }
        if (s.contains("ego_noise")) {
            const auto& n = s.at("ego_noise");
            get_if(n, "sigma_E", c.sim.ego_noise.sigma_e);
            get_if(n, "sigma_N", c.sim.ego_noise.sigma_n);
            get_if(n, "sigma_v", c.sim.ego_noise.sigma_v);
            get_if(n, "sigma_yaw_rate", c.sim.ego_noise.sigma_yaw_rate);
            get_if(n, "sigma_accel", c.sim.ego_noise.sigma_accel);
        }
        get_if(s, "moving_speed", c.sim.moving_speed);
        get_if(s, "moving_duration", c.sim.moving_duration);
        get_if(s, "radar_rate", c.sim.radar_rate);
        get_if(s, "n_static_poses", c.sim.n_static_poses);
        get_if(s, "static_dwell", c.sim.static_plan.dwell);
        get_if(s, "static_last_pose_gap", c.sim.static_plan.last_pose_gap);
        get_if(s, "static_hop_yaw_rate", c.sim.static_plan.hop_yaw_rate);
    }
    c.validate();
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("config", "cannot open config '" + path + "'");
    try {
        return config_from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw Error("config", std::string("invalid config '") + path + "': " + e.what());
    }
}

}  // namespace radcal
