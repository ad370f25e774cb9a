// radcal: simulate, calibrate, evaluate and sweep radar-to-vehicle mounts.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "radcal/radcal.hpp"

namespace fs = std::filesystem;
using namespace radcal;

namespace {

struct Overrides {
    std::string config_path;
    std::string rotation_fn;
    std::string translation_fn;
    std::optional<double> angle_res;
    std::optional<double> trans_res;
    std::optional<std::uint64_t> seed;
    bool zero_noise = false;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
        app->add_option("--scoring-rotation", rotation_fn, "rotation scoring function (s1..s4)");
        app->add_option("--scoring-translation", translation_fn, "translation scoring function (s5..s8)");
        app->add_option("--grid-res-angle", angle_res, "rotation grid resolution [rad]");
        app->add_option("--grid-res-trans", trans_res, "translation grid resolution [m]");
        app->add_option("--seed", seed, "simulation seed");
        app->add_flag("--zero-noise", zero_noise, "simulate exact measurements (CAN quantization only)");
    }

    RunConfig resolve() const {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (!rotation_fn.empty()) cfg.rotation_fn = parse_rotation_scoring(rotation_fn);
        if (!translation_fn.empty()) cfg.translation_fn = parse_translation_scoring(translation_fn);
        if (angle_res) cfg.angle_resolution = *angle_res;
        if (trans_res) cfg.trans_resolution = *trans_res;
        if (seed) cfg.seed = *seed;
        if (zero_noise) cfg.zero_noise = true;
        cfg.validate();
        return cfg;
    }
};

/// Input files; `--data DIR` fills in the names `simulate` writes.
struct Inputs {
    std::string data_dir;
    std::string moving_detections, moving_ego, static_detections, static_ego, targets;

    void attach(CLI::App* app, bool need_moving) {
        app->add_option("--data", data_dir, "directory written by 'simulate'");
        if (need_moving) {
            app->add_option("--moving-detections", moving_detections, "detection log of the moving pass");
            app->add_option("--moving-ego", moving_ego, "ego log of the moving pass");
        }
        app->add_option("--static-detections", static_detections, "detection log of the static poses");
        app->add_option("--static-ego", static_ego, "ego log of the static poses");
        app->add_option("--targets", targets, "target map CSV");
    }

    void fill_defaults(bool need_moving) {
        auto def = [&](std::string& p, const char* name, bool required) {
            if (!p.empty()) return;
            if (!data_dir.empty() && (required || fs::exists(fs::path(data_dir) / name))) p = (fs::path(data_dir) / name).string();
            if (p.empty() && required) throw Error("io", std::string("missing input: ") + name + " (give --data or the explicit option)");
        };
        if (need_moving) {
            def(moving_detections, "moving_detections.csv", true);
            def(moving_ego, "moving_ego.csv", true);
        }
        def(static_detections, "static_detections.csv", false);
        def(static_ego, "static_ego.csv", false);
        def(targets, "targets.csv", true);
        if (static_detections.empty() != static_ego.empty()) {
            throw Error("io", "static detections and static ego log must be given together");
        }
    }

    std::vector<std::string> paths() const {
        std::vector<std::string> out;
        for (const auto* p : {&moving_detections, &moving_ego, &static_detections, &static_ego, &targets}) {
            if (!p->empty()) out.push_back(*p);
        }
        return out;
    }
};

void require_distinct(const std::vector<std::string>& paths) {
    std::set<std::string> seen;
    for (const auto& p : paths) {
        const std::string key = fs::weakly_canonical(fs::path(p)).string();
        if (!seen.insert(key).second) throw Error("config", "path used twice: '" + p + "'");
    }
}

void write_json(const std::string& path, const json& j) {
    io::Writer w(path);
    w.puts(j.dump(2));
    w.puts("\n");
}

json read_json(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw Error("io", std::string("cannot open ") + what + " '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error("io", std::string("invalid ") + what + " '" + path + "': " + e.what());
    }
}

void make_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error("io", "cannot create output directory '" + dir + "'");
}

CalibrationData load_data(const RunConfig& cfg, const Inputs& in) {
    CalibrationData d;
    if (!in.moving_detections.empty()) d.moving_detections = io::read_detection_log(in.moving_detections);
    if (!in.moving_ego.empty()) d.moving_ego = io::read_ego_log(in.moving_ego);
    if (!in.static_detections.empty()) {
        d.static_detections = io::read_detection_log(in.static_detections);
        d.static_ego = io::read_ego_log(in.static_ego);
    }
    d.map = io::read_target_map(in.targets, cfg.map_reference);
    return d;
}

json input_digests(const Inputs& in) {
    json j = json::object();
    auto add = [&](const char* key, const std::string& p) {
        if (!p.empty()) j[key] = {{"file", fs::path(p).filename().string()}, {"fnv1a64", io::file_digest(p)}};
    };
    add("moving_detections", in.moving_detections);
    add("moving_ego", in.moving_ego);
    add("static_detections", in.static_detections);
    add("static_ego", in.static_ego);
    add("targets", in.targets);
    return j;
}

// --- simulate ---------------------------------------------------------------

int cmd_simulate(const RunConfig& cfg, const std::string& out) {
    make_dir(out);
    const Scenario sc = cfg.scenario();
    const SimSequence moving = generate_moving_sequence(sc, cfg.sim.moving_speed, cfg.sim.moving_duration, cfg.sim.radar_rate);
    const auto [poses, statics] = generate_static_poses(sc, cfg.sim.n_static_poses, cfg.sim.static_plan);

    const fs::path dir(out);
    const std::vector<std::pair<std::string, std::function<void(const std::string&)>>> files{
        {"targets.csv", [&](const std::string& p) { io::write_target_map(p, sc.target_map); }},
        {"moving_detections.csv", [&](const std::string& p) { io::write_detection_log(p, moving.detections); }},
        {"moving_ego.csv", [&](const std::string& p) { io::write_ego_log(p, moving.ego_log); }},
        {"moving_ego_truth.csv", [&](const std::string& p) { io::write_pose_track(p, moving.ego_truth); }},
        {"static_detections.csv", [&](const std::string& p) { io::write_detection_log(p, statics.detections); }},
        {"static_ego.csv", [&](const std::string& p) { io::write_ego_log(p, statics.ego_log); }},
        {"static_ego_truth.csv", [&](const std::string& p) { io::write_pose_track(p, statics.ego_truth); }},
    };
    json digests = json::object();
    for (const auto& [name, write] : files) {
        const std::string p = (dir / name).string();
        write(p);
        digests[name] = io::file_digest(p);
    }

    json mounts = json::array();
    for (const auto& m : sc.mounts) {
        mounts.push_back({{"radar_id", m.id}, {"rotation", m.mount.rotation},
                          {"tx", m.mount.translation.x()}, {"ty", m.mount.translation.y()}});
    }
    json pose_list = json::array();
    for (const auto& p : poses) pose_list.push_back({{"E", p.easting}, {"N", p.northing}, {"phi", p.heading}});
    const json manifest{{"config", config_to_json(cfg)},
                        {"seed", cfg.seed},
                        {"zero_noise", cfg.zero_noise},
                        {"mounts", mounts},
                        {"static_poses", pose_list},
                        {"counts",
                         {{"moving_detections", moving.detections.size()}, {"static_detections", statics.detections.size()},
                          {"targets", sc.target_map.size()}}},
                        {"files", digests}};
    write_json((dir / "manifest.json").string(), manifest);
    std::printf("simulated %zu moving and %zu static detections, %zu static poses -> %s\n", moving.detections.size(),
                statics.detections.size(), poses.size(), out.c_str());
    return 0;
}

// --- calibrate --------------------------------------------------------------

std::string field_name(const char* kind, const std::string& radar_id) {
    std::string safe = radar_id;
    for (char& c : safe) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
    }
    return std::string(kind) + "_field_" + safe + ".csv";
}

int cmd_calibrate(const RunConfig& cfg, const Inputs& in, const std::string& out) {
    make_dir(out);
    const fs::path dir(out);
    std::vector<std::string> all = in.paths();
    all.push_back((dir / "calibration.json").string());
    for (const auto& r : cfg.radars) {
        all.push_back((dir / field_name("rotation", r.id)).string());
        all.push_back((dir / field_name("translation", r.id)).string());
    }
    require_distinct(all);

    const CalibrationData data = load_data(cfg, in);
    const CalibrationRun run = calibrate(cfg, data);

    json radars = json::array();
    for (std::size_t i = 0; i < run.results.size(); ++i) {
        const auto& r = run.results[i];
        radars.push_back(calibration_to_json(r));
        io::write_rotation_field((dir / field_name("rotation", r.radar_id)).string(), run.rotation_fields[i]);
        if (run.translation_fields[i]) {
            io::write_translation_field((dir / field_name("translation", r.radar_id)).string(), *run.translation_fields[i]);
        }
        if (r.translation) {
            std::printf("%-8s theta_R = %.4f rad (+/- %.4f)  t = (%.3f, %.3f) m\n", r.radar_id.c_str(), r.rotation.theta_r,
                        r.rotation.band_halfwidth, r.translation->t.x(), r.translation->t.y());
        } else {
            std::printf("%-8s theta_R = %.4f rad (+/- %.4f)  translation absent: %s\n", r.radar_id.c_str(),
                        r.rotation.theta_r, r.rotation.band_halfwidth, r.translation_error.c_str());
        }
    }
    write_json((dir / "calibration.json").string(),
               {{"config", config_to_json(cfg)}, {"inputs", input_digests(in)}, {"radars", radars}});
    return 0;
}

// --- evaluate ---------------------------------------------------------------

int cmd_evaluate(const std::string& cal_path, const Inputs& in, std::string manifest_path, const std::string& out) {
    const json cal = read_json(cal_path, "calibration");
    if (!cal.contains("config") || !cal.contains("radars")) throw Error("io", "calibration JSON lacks config or radars");
    const RunConfig cfg = config_from_json(cal.at("config"));
    if (in.static_detections.empty()) throw Error("metrics", "evaluation needs the static detections and ego log");
    std::vector<std::string> all = in.paths();
    all.push_back(cal_path);
    if (!out.empty()) all.push_back(out);
    require_distinct(all);

    const CalibrationData data = load_data(cfg, in);
    if (manifest_path.empty() && !in.data_dir.empty() && fs::exists(fs::path(in.data_dir) / "manifest.json")) {
        manifest_path = (fs::path(in.data_dir) / "manifest.json").string();
    }
    std::optional<json> manifest;
    if (!manifest_path.empty()) manifest = read_json(manifest_path, "manifest");

    std::set<std::string> logged;
    for (const auto& d : data.static_detections) logged.insert(d.radar_id);

    json reports = json::array();
    std::printf("%-8s %8s %9s %6s %10s %10s\n", "radar", "MDE[m]", "MAE[rad]", "n", "|dtheta|", "|dt|[m]");
    for (const auto& rj : cal.at("radars")) {
        const ExtrinsicCalibration c = calibration_from_json(rj);
        (void)cfg.radar(c.radar_id);
        if (!logged.count(c.radar_id)) throw Error("metrics", "radar '" + c.radar_id + "' does not appear in the static log");
        if (!c.translation) {
            std::printf("%-8s translation absent, skipped\n", c.radar_id.c_str());
            continue;
        }
        const auto sightings = evaluation_sightings(cfg, data.static_detections, data.static_ego, c.radar_id);
        const EvaluationReport rep = evaluate(c.radar_to_vehicle(), sightings, data.map, cfg.match_gate);
        json r{{"radar_id", c.radar_id}, {"mde", rep.mde}, {"mae", rep.mae}, {"n_matched", rep.n_matched},
               {"n_unmatched", rep.n_unmatched}};
        double dth = std::nan(""), dt = std::nan("");
        if (manifest) {
            for (const auto& m : manifest->at("mounts")) {
                if (m.at("radar_id").get<std::string>() != c.radar_id) continue;
                dth = std::abs(wrap_angle(c.rotation.theta_r - m.at("rotation").get<double>()));
                dt = (c.translation->t - Vec2(m.at("tx").get<double>(), m.at("ty").get<double>())).norm();
                r["rotation_error"] = dth;
                r["translation_error"] = dt;
            }
        }
        std::printf("%-8s %8.3f %9.4f %6zu %10.5f %10.3f\n", c.radar_id.c_str(), rep.mde, rep.mae, rep.n_matched, dth, dt);
        reports.push_back(r);
    }
    if (!out.empty()) write_json(out, {{"calibration", fs::path(cal_path).filename().string()}, {"reports", reports}});
    return 0;
}

// --- sweep ------------------------------------------------------------------

int cmd_sweep(const RunConfig& cfg, const Inputs& in, const std::vector<std::string>& radar_ids, const std::string& out) {
    if (in.static_detections.empty()) throw Error("translation", "sweep needs the static detections and ego log");
    std::vector<std::string> all = in.paths();
    if (!out.empty()) all.push_back(out);
    require_distinct(all);
    const CalibrationData data = load_data(cfg, in);
    std::vector<std::string> ids = radar_ids;
    if (ids.empty()) {
        for (const auto& r : cfg.radars) ids.push_back(r.id);
    }
    json radars = json::array();
    for (const auto& id : ids) {
        const auto cells = sweep(cfg, data, id);
        // rows: translation function, columns: rotation function
        std::printf("\n%s  MDE [m] | MAE [rad]\n%-4s", id.c_str(), "");
        for (auto rf : kRotationScorings) std::printf("  %-16s", to_string(rf).data());
        for (auto tf : kTranslationScorings) {
            std::printf("\n%-4s", to_string(tf).data());
            for (auto rf : kRotationScorings) {
                for (const auto& c : cells) {
                    if (c.rotation_fn != rf || c.translation_fn != tf) continue;
                    if (c.report) {
                        std::printf("  %6.3f | %7.4f", c.report->mde, c.report->mae);
                    } else {
                        std::printf("  %-16s", "n/a");
                    }
                }
            }
        }
        json rows = json::array();
        for (const auto& c : cells) {
            json cj{{"rotation_fn", std::string(to_string(c.rotation_fn))},
                    {"translation_fn", std::string(to_string(c.translation_fn))},
                    {"theta_r", c.theta_r}};
            if (c.report) {
                cj["tx"] = c.t.x();
                cj["ty"] = c.t.y();
                cj["mde"] = c.report->mde;
                cj["mae"] = c.report->mae;
                cj["n_matched"] = c.report->n_matched;
            } else {
                cj["error"] = c.error;
            }
            rows.push_back(cj);
        }
        std::printf("\n");
        radars.push_back({{"radar_id", id}, {"cells", rows}});
    }
    if (!out.empty()) {
        write_json(out, {{"config", config_to_json(cfg)}, {"inputs", input_digests(in)}, {"radars", radars}});
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Radar-to-vehicle extrinsic calibration from road-side targets"};
    app.require_subcommand(1);

    Overrides sim_o, cal_o, sweep_o;
    Inputs cal_in, eval_in, sweep_in;
    std::string sim_out = "sim_out", cal_out = "calib_out", eval_out, sweep_out, cal_json, manifest;
    std::vector<std::string> sweep_radars;

    auto* sim = app.add_subcommand("simulate", "generate a synthetic drive, ego logs and a manifest");
    sim_o.attach(sim);
    sim->add_option("--out", sim_out, "output directory");

    auto* cal = app.add_subcommand("calibrate", "estimate rotation and translation of every configured radar");
    cal_o.attach(cal);
    cal_in.attach(cal, true);
    cal->add_option("--out", cal_out, "output directory");

    auto* ev = app.add_subcommand("evaluate", "MDE/MAE of a calibration on the static poses");
    ev->add_option("--calibration", cal_json, "calibration.json from 'calibrate'")->required()->check(CLI::ExistingFile);
    eval_in.attach(ev, false);
    ev->add_option("--manifest", manifest, "simulation manifest with ground-truth mounts");
    ev->add_option("--out", eval_out, "write the report as JSON");

    auto* sw = app.add_subcommand("sweep", "4x4 scoring-function matrix of MDE/MAE");
    sweep_o.attach(sw);
    sweep_in.attach(sw, true);
    sw->add_option("--radar", sweep_radars, "radar id(s); default all");
    sw->add_option("--out", sweep_out, "write the matrix as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_o.resolve(), sim_out);
        if (cal->parsed()) {
            cal_in.fill_defaults(true);
            return cmd_calibrate(cal_o.resolve(), cal_in, cal_out);
        }
        if (ev->parsed()) {
            eval_in.fill_defaults(false);
            return cmd_evaluate(cal_json, eval_in, manifest, eval_out);
        }
        if (sw->parsed()) {
            sweep_in.fill_defaults(true);
            return cmd_sweep(sweep_o.resolve(), sweep_in, sweep_radars, sweep_out);
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "radcal: %s stage failed: %s\n", e.stage().c_str(), e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "radcal: %s\n", e.what());
        return 2;
    }
    return 0;
}
