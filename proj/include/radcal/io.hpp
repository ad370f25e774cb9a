#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "radcal/common.hpp"
#include "radcal/ego_state.hpp"
#include "radcal/geo_map.hpp"
#include "radcal/rotation_calib.hpp"
#include "radcal/sim.hpp"
#include "radcal/translation_calib.hpp"

namespace radcal::io {

/// Minimal header-addressed CSV table.
class CsvTable {
public:
    static CsvTable parse(std::istream& in, const std::string& what) {
        CsvTable t;
        t.what_ = what;
        std::string line;
        bool header = true;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line.front() == '#') continue;
            auto cells = split(line);
            if (header) {
                for (std::size_t i = 0; i < cells.size(); ++i) t.columns_[cells[i]] = i;
                t.header_ = std::move(cells);
                header = false;
                continue;
            }
            if (cells.size() != t.header_.size()) {
                throw Error("io", what + ": row " + std::to_string(t.rows_.size() + 1) + " has " +
                                      std::to_string(cells.size()) + " cells, header has " +
                                      std::to_string(t.header_.size()));
            }
            t.rows_.push_back(std::move(cells));
        }
        if (header) throw Error("io", what + ": missing header");
        return t;
    }

    static CsvTable read(const std::string& path, const std::string& what) {
        std::ifstream in(path);
        if (!in) throw Error("io", "cannot open " + what + " '" + path + "'");
        return parse(in, what + " '" + path + "'");
    }

    bool has(const std::string& col) const { return columns_.count(col) > 0; }
    std::size_t size() const { return rows_.size(); }

    const std::string& str(std::size_t row, const std::string& col) const { return rows_[row][index(col)]; }

    double num(std::size_t row, const std::string& col) const {
        const std::string& s = str(row, col);
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw Error("io", what_ + ": row " + std::to_string(row + 1) + " column '" + col + "' is not a number: '" +
                                  s + "'");
        }
    }

private:
    static std::vector<std::string> split(const std::string& line) {
        std::vector<std::string> out;
        std::string cell;
        std::istringstream ss(line);
        while (std::getline(ss, cell, ',')) {
            const auto b = cell.find_first_not_of(" \t");
            const auto e = cell.find_last_not_of(" \t");
            out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
        }
        if (!line.empty() && line.back() == ',') out.emplace_back();
        return out;
    }

    std::size_t index(const std::string& col) const {
        auto it = columns_.find(col);
        if (it == columns_.end()) throw Error("io", what_ + ": missing column '" + col + "'");
        return it->second;
    }

    std::string what_;
    std::vector<std::string> header_;
    std::map<std::string, std::size_t> columns_;
    std::vector<std::vector<std::string>> rows_;
};

class Writer {
public:
    explicit Writer(const std::string& path) : path_(path), f_(std::fopen(path.c_str(), "wb")) {
        if (!f_) throw Error("io", "cannot write '" + path + "'");
    }
    ~Writer() {
        if (f_) std::fclose(f_);
    }
    Writer(const Writer&) = delete;
    Writer& operator=(const Writer&) = delete;

    template <class... Args>
    void printf(const char* fmt, Args... args) {
        std::fprintf(f_, fmt, args...);
    }
    void puts(std::string_view s) { std::fwrite(s.data(), 1, s.size(), f_); }

private:
    std::string path_;
    std::FILE* f_;
};

// --- target map -------------------------------------------------------------

/// Reads `id,easting,northing` or `id,lat,lon` (several fixes per id are
/// centroided; geodetic input needs a projection reference).
inline TargetMap read_target_map(const std::string& path, std::optional<GeoPoint> reference = std::nullopt) {
    const auto t = CsvTable::read(path, "target map");
    std::vector<std::string> order;
    std::map<std::string, std::vector<EnPoint>> fixes;
    const bool geodetic = t.has("lat") && t.has("lon");
    if (!geodetic && !(t.has("easting") && t.has("northing"))) {
        throw Error("io", "target map '" + path + "' needs columns id,easting,northing or id,lat,lon");
    }
    if (geodetic && !reference) throw Error("config", "geodetic target map needs map_reference in the config");
    for (std::size_t r = 0; r < t.size(); ++r) {
        const std::string& id = t.str(r, "id");
        EnPoint p = geodetic ? mercator_project({t.num(r, "lat"), t.num(r, "lon")}, *reference)
                             : EnPoint{t.num(r, "easting"), t.num(r, "northing")};
        auto [it, inserted] = fixes.try_emplace(id);
        if (inserted) order.push_back(id);
        it->second.push_back(p);
    }
    std::vector<Target> targets;
    for (const auto& id : order) targets.push_back({id, centroid(fixes[id])});
    return TargetMap(std::move(targets));
}

inline void write_target_map(const std::string& path, const TargetMap& map) {
    Writer w(path);
    w.puts("id,easting,northing\n");
    for (const auto& t : map.targets()) w.printf("%s,%.4f,%.4f\n", t.id.c_str(), t.position.easting, t.position.northing);
}

// --- detection log ----------------------------------------------------------

inline void write_detection_log(const std::string& path, const DetectionLog& log) {
    Writer w(path);
    w.puts("t,radar_id,track_id,x,y\n");
    for (const auto& d : log) {
        w.printf("%.6f,%s,%s,%.1f,%.1f\n", d.t, d.radar_id.c_str(), d.track_id.c_str(), d.x + 0.0, d.y + 0.0);
    }
}

inline DetectionLog read_detection_log(const std::string& path) {
    const auto t = CsvTable::read(path, "detection log");
    DetectionLog log;
    log.reserve(t.size());
    for (std::size_t r = 0; r < t.size(); ++r) {
        log.push_back({t.num(r, "t"), t.str(r, "radar_id"), t.str(r, "track_id"), t.num(r, "x"), t.num(r, "y")});
    }
    return log;
}

// --- ego logs ---------------------------------------------------------------

inline void write_ego_log(const std::string& path, const std::vector<EgoMeasurement>& log) {
    Writer w(path);
    w.puts("t,E,N,v,yaw_rate,accel,sigma_E,sigma_N,sigma_v,sigma_yaw_rate,sigma_accel\n");
    for (const auto& m : log) {
        w.printf("%.3f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6g,%.6g,%.6g,%.6g,%.6g\n", m.time, m.easting, m.northing, m.speed,
                 m.yaw_rate, m.acceleration, m.sigma_e, m.sigma_n, m.sigma_v, m.sigma_yaw_rate, m.sigma_accel);
    }
}

inline std::vector<EgoMeasurement> read_ego_log(const std::string& path) {
    const auto t = CsvTable::read(path, "ego log");
    auto col = [&](const char* primary, const char* alt) { return t.has(primary) ? std::string(primary) : std::string(alt); };
    const std::string se = col("sigma_E", "σE"), sn = col("sigma_N", "σN"), sv = col("sigma_v", "σv"),
                      syr = col("sigma_yaw_rate", "σyr"), sa = col("sigma_accel", "σacc");
    std::vector<EgoMeasurement> out;
    out.reserve(t.size());
    for (std::size_t r = 0; r < t.size(); ++r) {
        EgoMeasurement m;
        m.time = t.num(r, "t");
        m.easting = t.num(r, "E");
        m.northing = t.num(r, "N");
        m.speed = t.num(r, "v");
        m.yaw_rate = t.num(r, "yaw_rate");
        m.acceleration = t.num(r, "accel");
        m.sigma_e = t.num(r, se);
        m.sigma_n = t.num(r, sn);
        m.sigma_v = t.num(r, sv);
        m.sigma_yaw_rate = t.num(r, syr);
        m.sigma_accel = t.num(r, sa);
        out.push_back(m);
    }
    return out;
}

/// Pose track / ego truth: `t,E,N,phi`.
inline void write_pose_track(const std::string& path, const std::vector<EgoState>& states) {
    Writer w(path);
    w.puts("t,E,N,phi\n");
    for (const auto& s : states) w.printf("%.3f,%.6f,%.6f,%.9f\n", s.time, s.easting(), s.northing(), s.heading());
}

// --- score fields -----------------------------------------------------------

inline void write_rotation_field(const std::string& path, const ScoreField1D& f) {
    Writer w(path);
    w.puts("theta_hat,score\n");
    for (std::size_t i = 0; i < f.size(); ++i) w.printf("%.6f,%.9e\n", f.center(i), f.values[i]);
}

inline void write_translation_field(const std::string& path, const ScoreField2D& f) {
    Writer w(path);
    w.puts("tx_hat,ty_hat,score\n");
    for (std::size_t iy = 0; iy < f.ny(); ++iy) {
        for (std::size_t ix = 0; ix < f.nx(); ++ix) {
            w.printf("%.4f,%.4f,%.9e\n", f.x_center(ix) + 0.0, f.y_center(iy) + 0.0, f.at(ix, iy));
        }
    }
}

// --- digests ----------------------------------------------------------------

/// FNV-1a 64-bit digest of a file's bytes, as 16 hex digits.
inline std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io", "cannot open '" + path + "' for hashing");
    std::uint64_t h = 1469598103934665603ULL;
    char buf[1 << 14];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

}  // namespace radcal::io
