#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "radcal/common.hpp"
#include "radcal/detail/parallel.hpp"
#include "radcal/ego_state.hpp"
#include "radcal/error_model.hpp"

namespace radcal {

enum class RotationScoring { s1, s2, s3, s4 };

inline constexpr RotationScoring kRotationScorings[] = {RotationScoring::s1, RotationScoring::s2, RotationScoring::s3,
                                                        RotationScoring::s4};

inline std::string_view to_string(RotationScoring fn) {
    switch (fn) {
        case RotationScoring::s1: return "s1";
        case RotationScoring::s2: return "s2";
        case RotationScoring::s3: return "s3";
        case RotationScoring::s4: return "s4";
    }
    return "?";
}

inline RotationScoring parse_rotation_scoring(std::string_view name) {
    for (auto fn : kRotationScorings) {
        if (to_string(fn) == name) return fn;
    }
    throw Error("config", "unknown rotation scoring function '" + std::string(name) + "' (expected s1..s4)");
}

/// Time-ordered radar-frame detections of one static object.
struct Trajectory {
    std::string track_id;
    std::vector<CartesianDetection> points;

    void validate() const {
        if (points.size() < 2) throw Error("rotation", "trajectory '" + track_id + "' has fewer than 2 points");
        for (std::size_t i = 1; i < points.size(); ++i) {
            if (!(points[i].timestamp > points[i - 1].timestamp)) {
                throw Error("rotation", "trajectory '" + track_id + "' timestamps are not strictly increasing");
            }
        }
    }
};

/// Index pairs (i, j), i < j, over a trajectory.
inline std::vector<std::pair<std::size_t, std::size_t>> enumerate_tuples(const Trajectory& traj) {
    traj.validate();
    const std::size_t n = traj.points.size();
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) out.emplace_back(i, j);
    }
    return out;
}

/// Direction of every forward tuple; coincident tuples are skipped.
inline std::vector<DirectionSample> trajectory_directions(const Trajectory& traj) {
    const auto& p = traj.points;
    std::vector<DirectionSample> out;
    for (auto [i, j] : enumerate_tuples(traj)) {
        if (p[i].x == p[j].x && p[i].y == p[j].y) continue;
        out.push_back(direction_between(p[i], p[j]));
    }
    if (out.empty()) throw Error("rotation", "trajectory '" + traj.track_id + "' is degenerate (all points coincide)");
    return out;
}

/// Uniformly subsamples a trajectory to at most `max_points`, keeping both ends.
inline Trajectory subsample(const Trajectory& traj, std::size_t max_points) {
    if (max_points < 2 || traj.points.size() <= max_points) return traj;
    Trajectory out{traj.track_id, {}};
    out.points.reserve(max_points);
    const std::size_t n = traj.points.size();
    for (std::size_t k = 0; k < max_points; ++k) {
        const std::size_t idx = (k * (n - 1) + (max_points - 1) / 2) / (max_points - 1);
        out.points.push_back(traj.points[idx]);
    }
    return out;
}

namespace detail {

inline double gaussian_pdf(double d, double sigma) {
    constexpr double kInvSqrt2Pi = 0.39894228040143267794;
    const double u = d / sigma;
    return kInvSqrt2Pi / sigma * std::exp(-0.5 * u * u);
}

/// Triangular kernel with unit area on |d| <= 2 sigma.
inline double triangle(double d, double sigma) {
    if (d > 2.0 * sigma) return 0.0;
    const double peak = 1.0 / (2.0 * sigma);
    const double slope = 1.0 / (4.0 * sigma * sigma);
    return std::max(0.0, peak - slope * d);
}

inline double rotation_kernel(double d, double sigma, RotationScoring fn) {
    d = std::abs(d);
    switch (fn) {
        case RotationScoring::s1: return gaussian_pdf(d, sigma);
        case RotationScoring::s2: return gaussian_pdf(std::max(d, sigma), sigma);
        case RotationScoring::s3: return triangle(d, sigma);
        case RotationScoring::s4: return triangle(std::max(d, sigma), sigma);
    }
    throw Error("rotation", "unknown rotation scoring function");
}

/// Half-width beyond which a kernel contributes nothing. Gaussians are cut
/// there (dropped mass below 2e-9); cells are kept iff their center lies within.
inline double kernel_support(double sigma, bool gaussian) { return (gaussian ? 6.0 : 2.0) * sigma; }

}  // namespace detail

/// Score of candidate direction `theta_hat` given one direction sample.
inline double score_rotation(double theta_hat, const DirectionSample& sample, RotationScoring fn) {
    if (!(sample.direction_error > 0.0)) throw Error("rotation", "direction error must be positive");
    return detail::rotation_kernel(sample.direction - theta_hat, sample.direction_error, fn);
}

/// Cumulative score over candidate angles on (-2pi, 2pi].
struct ScoreField1D {
    double lower = -kTwoPi;  // exclusive lower edge of the domain
    double resolution = 0.001;
    std::vector<double> values;
    bool normalized = false;

    std::size_t size() const { return values.size(); }
    double center(std::size_t i) const { return lower + (static_cast<double>(i) + 0.5) * resolution; }

    double mass() const {
        double m = 0.0;
        for (double v : values) m += v;
        return m * resolution;
    }
};

inline ScoreField1D make_rotation_grid(double resolution) {
    if (!(resolution > 0.0) || resolution > 1.0) throw Error("rotation", "angle grid resolution must be in (0, 1] rad");
    ScoreField1D f;
    const auto n = static_cast<std::size_t>(std::llround(2.0 * kTwoPi / resolution));
    f.resolution = 2.0 * kTwoPi / static_cast<double>(n);
    f.values.assign(n, 0.0);
    return f;
}

namespace detail {

/// Adds one Gaussian (optionally clamped inside one sigma) onto the grid.
/// Values are produced by walking outwards from the peak cell with the
/// exact ratio recurrence g(d + h) = g(d) * exp(-(2 d h + h^2) / (2 s^2)),
/// so every factor stays <= 1 and only two products are needed per cell.
inline void add_gaussian(std::vector<double>& acc, double lower, double res, double mu, double sigma, bool clamp) {
    const auto n = static_cast<std::ptrdiff_t>(acc.size());
    const double w = kernel_support(sigma, true);
    const double inv2s2 = 0.5 / (sigma * sigma);
    const double scale = 0.39894228040143267794 / sigma;
    const double cap = clamp ? std::exp(-0.5) : 1.0;
    const double q = std::exp(-2.0 * res * res * inv2s2);
    const auto p = static_cast<std::ptrdiff_t>(std::floor((mu - lower) / res));
    const double dp = lower + (static_cast<double>(p) + 0.5) * res - mu;
    const double gp = std::exp(-dp * dp * inv2s2);
    auto put = [&](std::ptrdiff_t i, double g) {
        if (i >= 0 && i < n) acc[static_cast<std::size_t>(i)] += scale * std::min(g, cap);
    };
    if (std::abs(dp) <= w) put(p, gp);
    double g = gp, r = std::exp(-(2.0 * dp * res + res * res) * inv2s2);
    for (std::ptrdiff_t k = 1; dp + static_cast<double>(k) * res <= w && p + k < n; ++k) {
        g *= r;
        r *= q;
        put(p + k, g);
    }
    g = gp;
    r = std::exp(-(-2.0 * dp * res + res * res) * inv2s2);
    for (std::ptrdiff_t k = 1; static_cast<double>(k) * res - dp <= w && p - k >= 0; ++k) {
        g *= r;
        r *= q;
        put(p - k, g);
    }
}

}  // namespace detail

/// Un-normalized sum of kernels on the grid.
inline ScoreField1D sum_rotation_scores(std::span<const DirectionSample> samples, RotationScoring fn,
                                        double resolution) {
    ScoreField1D field = make_rotation_grid(resolution);
    const bool gaussian = fn == RotationScoring::s1 || fn == RotationScoring::s2;
    const double lower = field.lower, res = field.resolution;
    const auto n = static_cast<std::ptrdiff_t>(field.size());
    field.values = detail::chunked_field_sum(samples.size(), field.size(), [&](std::size_t b, std::size_t e,
                                                                               std::vector<double>& acc) {
        for (std::size_t k = b; k < e; ++k) {
            const auto& s = samples[k];
            if (gaussian) {
                detail::add_gaussian(acc, lower, res, s.direction, s.direction_error, fn == RotationScoring::s2);
                continue;
            }
            const double w = detail::kernel_support(s.direction_error, false);
            const auto i0 = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::floor((s.direction - w - lower) / res)));
            const auto i1 = std::min<std::ptrdiff_t>(n - 1, static_cast<std::ptrdiff_t>(std::ceil((s.direction + w - lower) / res)));
            for (auto i = i0; i <= i1; ++i) {
                const double c = lower + (static_cast<double>(i) + 0.5) * res;
                acc[static_cast<std::size_t>(i)] += detail::rotation_kernel(s.direction - c, s.direction_error, fn);
            }
        }
    });
    return field;
}

inline void normalize(ScoreField1D& field) {
    const double m = field.mass();
    if (!(m > 0.0)) throw Error("rotation", "score field has no mass inside the domain");
    for (double& v : field.values) v /= m;
    field.normalized = true;
}

/// Sums every sample's kernel over the grid and normalizes to a density.
inline ScoreField1D accumulate_rotation_score(std::span<const DirectionSample> samples, RotationScoring fn,
                                              double resolution) {
    if (samples.empty()) throw Error("rotation", "no direction samples to score");
    for (const auto& s : samples) {
        if (!(s.direction_error > 0.0) || !std::isfinite(s.direction)) {
            throw Error("rotation", "invalid direction sample");
        }
    }
    ScoreField1D field = sum_rotation_scores(samples, fn, resolution);
    normalize(field);
    return field;
}

struct RotationEstimate {
    double theta_r = 0.0;
    double band_halfwidth = 0.0;
    std::size_t n_samples = 0;
    RotationScoring scoring_fn = RotationScoring::s1;
};

inline constexpr double kOneSigmaMass = 0.6827;

/// Index of the largest cell. A run of equal maxima (the flat top a
/// truncated kernel produces) is represented by its middle cell; separate
/// tied peaks are resolved toward the candidate nearest zero.
inline std::size_t argmax_cell(const ScoreField1D& field) {
    if (field.values.empty()) throw Error("rotation", "empty score field");
    const double top = *std::max_element(field.values.begin(), field.values.end());
    std::size_t best = 0;
    bool found = false;
    for (std::size_t i = 0; i < field.size();) {
        if (field.values[i] != top) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < field.size() && field.values[j + 1] == top) ++j;
        std::size_t mid = i + (j - i) / 2;
        if ((j - i) % 2 == 1 && std::abs(field.center(mid + 1)) < std::abs(field.center(mid))) ++mid;
        if (!found || std::abs(field.center(mid)) < std::abs(field.center(best))) best = mid;
        found = true;
        i = j + 1;
    }
    return best;
}

/// theta_R is minus the best-scoring direction; the band is the symmetric
/// half-width around it holding 68.27% of the mass.
inline RotationEstimate estimate_rotation(const ScoreField1D& field) {
    if (!field.normalized) throw Error("rotation", "estimate_rotation needs a normalized field");
    if (field.values.empty()) throw Error("rotation", "empty score field");
    const auto [mn, mx] = std::minmax_element(field.values.begin(), field.values.end());
    if (*mn == *mx) throw Error("rotation", "score field is flat; no rotation information");

    const std::size_t best = argmax_cell(field);
    const auto n = static_cast<std::ptrdiff_t>(field.size());
    const auto b = static_cast<std::ptrdiff_t>(best);
    double mass = field.values[best] * field.resolution;
    std::ptrdiff_t k = 0;
    while (mass < kOneSigmaMass && (b - k > 0 || b + k < n - 1)) {
        ++k;
        if (b - k >= 0) mass += field.values[static_cast<std::size_t>(b - k)] * field.resolution;
        if (b + k < n) mass += field.values[static_cast<std::size_t>(b + k)] * field.resolution;
    }
    RotationEstimate est;
    est.theta_r = wrap_angle(-field.center(best));
    est.band_halfwidth = (static_cast<double>(k) + 0.5) * field.resolution;
    return est;
}

/// Keeps only the spans of each trajectory recorded while |yaw rate| <=
/// yaw_rate_max; trajectories are split where the gate is violated.
inline std::vector<Trajectory> straight_segment_filter(const PoseTrack& ego, std::span<const Trajectory> trajectories,
                                                       double yaw_rate_max) {
    std::vector<Trajectory> out;
    for (const auto& traj : trajectories) {
        Trajectory run{traj.track_id, {}};
        int piece = 0;
        auto flush = [&] {
            if (run.points.size() >= 2) {
                if (piece > 0) run.track_id = traj.track_id + "/" + std::to_string(piece);
                out.push_back(std::move(run));
                ++piece;
            }
            run = Trajectory{traj.track_id, {}};
        };
        for (const auto& p : traj.points) {
            const auto s = ego.state_at(p.timestamp);
            if (s && std::abs(s->yaw_rate()) <= yaw_rate_max) {
                run.points.push_back(p);
            } else {
                flush();
            }
        }
        flush();
    }
    return out;
}

/// Turns trajectories into ego-motion direction samples.
///
/// A static target moves opposite to the vehicle, so each pair direction is
/// flipped by pi to give the vehicle's own displacement seen from the radar;
/// for a straight forward drive that direction is -theta_R. Samples are then
/// unwrapped to within pi of their circular mean so one cluster never
/// straddles the +/-pi seam.
inline std::vector<DirectionSample> ego_motion_samples(std::span<const Trajectory> trajectories,
                                                       std::size_t max_points = 200) {
    std::vector<DirectionSample> samples;
    for (const auto& traj : trajectories) {
        const Trajectory t = subsample(traj, max_points);
        std::vector<DirectionSample> dirs;
        try {
            dirs = trajectory_directions(t);
        } catch (const Error&) {
            continue;  // degenerate trajectory contributes nothing
        }
        for (auto& d : dirs) {
            d.direction = wrap_angle(d.direction + kPi);
            samples.push_back(d);
        }
    }
    if (samples.empty()) return samples;
    double sx = 0.0, sy = 0.0;
    for (const auto& s : samples) {
        const double w = 1.0 / (s.direction_error * s.direction_error);
        sx += w * std::cos(s.direction);
        sy += w * std::sin(s.direction);
    }
    const double ref = std::atan2(sy, sx);
    for (auto& s : samples) s.direction = ref + wrap_angle(s.direction - ref);
    return samples;
}

}  // namespace radcal
