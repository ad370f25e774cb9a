#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "radcal/common.hpp"
#include "radcal/detail/parallel.hpp"
#include "radcal/error_model.hpp"
#include "radcal/geo_map.hpp"
#include "radcal/rotation_calib.hpp"

namespace radcal {

enum class TranslationScoring { s5, s6, s7, s8 };

inline constexpr TranslationScoring kTranslationScorings[] = {TranslationScoring::s5, TranslationScoring::s6,
                                                              TranslationScoring::s7, TranslationScoring::s8};

inline std::string_view to_string(TranslationScoring fn) {
    switch (fn) {
        case TranslationScoring::s5: return "s5";
        case TranslationScoring::s6: return "s6";
        case TranslationScoring::s7: return "s7";
        case TranslationScoring::s8: return "s8";
    }
    return "?";
}

inline TranslationScoring parse_translation_scoring(std::string_view name) {
    for (auto fn : kTranslationScorings) {
        if (to_string(fn) == name) return fn;
    }
    throw Error("config", "unknown translation scoring function '" + std::string(name) + "' (expected s5..s8)");
}

/// Componentwise bound on admissible radar translations.
struct TranslationLimits {
    Vec2 t_l{5.33, 2.29};

    /// Limits from vehicle length/width plus safety gaps: (L + dx, W + dy).
    static TranslationLimits from_vehicle(double width, double length, double gap_x, double gap_y) {
        TranslationLimits lim;
        lim.t_l = Vec2(length + gap_x, width + gap_y);
        lim.validate();
        return lim;
    }

    void validate() const {
        if (!(t_l.x() > 0.0) || !(t_l.y() > 0.0)) throw Error("config", "translation limits must be positive");
    }

    bool contains(const Vec2& t) const { return std::abs(t.x()) <= t_l.x() && std::abs(t.y()) <= t_l.y(); }
};

struct TranslationSample {
    Vec2 t = Vec2::Zero();
    Vec2 error = Vec2::Constant(kCanResolution);
    std::string detection_id;
    std::string target_id;
};

/// Calibration target already expressed in the vehicle frame.
struct VehicleTarget {
    std::string id;
    Vec2 position;
};

/// Rotates a radar detection into the vehicle-aligned frame. Axis-aligned
/// errors are mapped to the enclosing axis-aligned box.
inline CartesianDetection rotate_detection(double theta_r, const CartesianDetection& d) {
    const double c = std::cos(theta_r), s = std::sin(theta_r);
    CartesianDetection out = d;
    out.x = c * d.x - s * d.y;
    out.y = s * d.x + c * d.y;
    out.x_error = std::abs(c) * d.x_error + std::abs(s) * d.y_error;
    out.y_error = std::abs(s) * d.x_error + std::abs(c) * d.y_error;
    return out;
}

/// Appends every gated target-minus-detection offset. Never throws on an
/// empty result; see candidate_translations.
inline void gate_translations(std::span<const CartesianDetection> detections, std::span<const VehicleTarget> targets,
                              const TranslationLimits& limits, std::vector<TranslationSample>& out) {
    for (const auto& d : detections) {
        for (const auto& ct : targets) {
            const Vec2 t = ct.position - d.position();
            if (!limits.contains(t)) continue;
            out.push_back({t, Vec2(d.x_error, d.y_error), d.track_id, ct.id});
        }
    }
}

inline std::vector<TranslationSample> candidate_translations(std::span<const CartesianDetection> detections,
                                                             std::span<const VehicleTarget> targets,
                                                             const TranslationLimits& limits) {
    std::vector<TranslationSample> out;
    gate_translations(detections, targets, limits, out);
    if (out.empty()) {
        throw Error("translation", "no detection-target offset falls inside the translation limits");
    }
    return out;
}

namespace detail {

/// Pyramid of unit volume on the rectangle |d| <= 2 sigma.
inline double pyramid(double dx, double dy, double sx, double sy) {
    if (dx > 2.0 * sx || dy > 2.0 * sy) return 0.0;
    const double peak = 3.0 / (16.0 * sx * sy);
    const double kx = 3.0 / (32.0 * sx * sx * sy);
    const double ky = 3.0 / (32.0 * sx * sy * sy);
    return std::max(0.0, peak - std::max(kx * dx, ky * dy));
}

inline double translation_kernel(double dx, double dy, double sx, double sy, TranslationScoring fn) {
    dx = std::abs(dx);
    dy = std::abs(dy);
    switch (fn) {
        case TranslationScoring::s5: return gaussian_pdf(dx, sx) * gaussian_pdf(dy, sy);
        case TranslationScoring::s6: {
            const double u = dx / sx, v = dy / sy;
            if (u * u + v * v <= 1.0) return gaussian_pdf(sx, sx) * gaussian_pdf(0.0, sy);
            return gaussian_pdf(dx, sx) * gaussian_pdf(dy, sy);
        }
        case TranslationScoring::s7: return pyramid(dx, dy, sx, sy);
        case TranslationScoring::s8:
            if (dx < sx && dy < sy) return pyramid(sx, sy, sx, sy);
            return pyramid(dx, dy, sx, sy);
    }
    throw Error("translation", "unknown translation scoring function");
}

}  // namespace detail

inline double score_translation(const Vec2& t_hat, const TranslationSample& sample, TranslationScoring fn) {
    if (!(sample.error.x() > 0.0) || !(sample.error.y() > 0.0)) {
        throw Error("translation", "translation error must be positive");
    }
    return detail::translation_kernel(sample.t.x() - t_hat.x(), sample.t.y() - t_hat.y(), sample.error.x(),
                                      sample.error.y(), fn);
}

/// Cumulative score over candidate translations. Cell centers sit on integer
/// multiples of the resolution, so (0, 0) is always a candidate. Row-major:
/// value(ix, iy) = values[iy * nx + ix].
struct ScoreField2D {
    double resolution = 0.02;
    int half_x = 0;  // centers run from -half_x*res to +half_x*res
    int half_y = 0;
    std::vector<double> values;
    bool normalized = false;

    std::size_t nx() const { return static_cast<std::size_t>(2 * half_x + 1); }
    std::size_t ny() const { return static_cast<std::size_t>(2 * half_y + 1); }
    double x_center(std::size_t ix) const { return (static_cast<double>(ix) - half_x) * resolution; }
    double y_center(std::size_t iy) const { return (static_cast<double>(iy) - half_y) * resolution; }
    double at(std::size_t ix, std::size_t iy) const { return values[iy * nx() + ix]; }
    double cell_area() const { return resolution * resolution; }

    double mass() const {
        double m = 0.0;
        for (double v : values) m += v;
        return m * cell_area();
    }
};

inline ScoreField2D make_translation_grid(const TranslationLimits& limits, double resolution) {
    limits.validate();
    if (!(resolution > 0.0)) throw Error("translation", "translation grid resolution must be positive");
    ScoreField2D f;
    f.resolution = resolution;
    f.half_x = static_cast<int>(std::floor(limits.t_l.x() / resolution + 1e-9));
    f.half_y = static_cast<int>(std::floor(limits.t_l.y() / resolution + 1e-9));
    f.values.assign(f.nx() * f.ny(), 0.0);
    return f;
}

inline ScoreField2D sum_translation_scores(std::span<const TranslationSample> samples, TranslationScoring fn,
                                           const TranslationLimits& limits, double resolution) {
    ScoreField2D field = make_translation_grid(limits, resolution);
    const bool gaussian = fn == TranslationScoring::s5 || fn == TranslationScoring::s6;
    const double res = field.resolution;
    const auto nx = static_cast<std::ptrdiff_t>(field.nx()), ny = static_cast<std::ptrdiff_t>(field.ny());
    const int hx = field.half_x, hy = field.half_y;

    auto index_range = [res](double center, double w, int half, std::ptrdiff_t n) {
        const auto lo = static_cast<std::ptrdiff_t>(std::ceil((center - w) / res)) + half;
        const auto hi = static_cast<std::ptrdiff_t>(std::floor((center + w) / res)) + half;
        return std::pair{std::max<std::ptrdiff_t>(0, lo), std::min<std::ptrdiff_t>(n - 1, hi)};
    };

    field.values = detail::chunked_field_sum(samples.size(), field.values.size(), [&](std::size_t b, std::size_t e,
                                                                                      std::vector<double>& acc) {
        std::vector<double> gx, gy;
        for (std::size_t k = b; k < e; ++k) {
            const auto& s = samples[k];
            const double sx = s.error.x(), sy = s.error.y();
            const auto [x0, x1] = index_range(s.t.x(), detail::kernel_support(sx, gaussian), hx, nx);
            const auto [y0, y1] = index_range(s.t.y(), detail::kernel_support(sy, gaussian), hy, ny);
            if (x0 > x1 || y0 > y1) continue;
            if (fn == TranslationScoring::s5) {
                // separable: outer product of the two 1-D densities
                gx.resize(static_cast<std::size_t>(x1 - x0 + 1));
                gy.resize(static_cast<std::size_t>(y1 - y0 + 1));
                for (auto ix = x0; ix <= x1; ++ix) {
                    gx[static_cast<std::size_t>(ix - x0)] = detail::gaussian_pdf(s.t.x() - (ix - hx) * res, sx);
                }
                for (auto iy = y0; iy <= y1; ++iy) {
                    gy[static_cast<std::size_t>(iy - y0)] = detail::gaussian_pdf(s.t.y() - (iy - hy) * res, sy);
                }
                for (auto iy = y0; iy <= y1; ++iy) {
                    double* row = acc.data() + iy * nx;
                    const double wy = gy[static_cast<std::size_t>(iy - y0)];
                    for (auto ix = x0; ix <= x1; ++ix) row[ix] += gx[static_cast<std::size_t>(ix - x0)] * wy;
                }
                continue;
            }
            for (auto iy = y0; iy <= y1; ++iy) {
                const double dy = s.t.y() - (iy - hy) * res;
                double* row = acc.data() + iy * nx;
                for (auto ix = x0; ix <= x1; ++ix) {
                    row[ix] += detail::translation_kernel(s.t.x() - (ix - hx) * res, dy, sx, sy, fn);
                }
            }
        }
    });
    return field;
}

inline void normalize(ScoreField2D& field) {
    const double m = field.mass();
    if (!(m > 0.0)) throw Error("translation", "score field has no mass inside the translation limits");
    for (double& v : field.values) v /= m;
    field.normalized = true;
}

inline ScoreField2D accumulate_translation_score(std::span<const TranslationSample> samples, TranslationScoring fn,
                                                 const TranslationLimits& limits, double resolution) {
    if (samples.empty()) throw Error("translation", "no translation samples to score");
    for (const auto& s : samples) {
        if (!(s.error.x() > 0.0) || !(s.error.y() > 0.0) || !s.t.allFinite()) {
            throw Error("translation", "invalid translation sample");
        }
    }
    ScoreField2D field = sum_translation_scores(samples, fn, limits, resolution);
    normalize(field);
    return field;
}

struct TranslationEstimate {
    Vec2 t = Vec2::Zero();
    std::size_t n_samples = 0;
    TranslationScoring scoring_fn = TranslationScoring::s5;
};

/// Best-scoring translation. Each 4-connected plateau of equal maxima is
/// represented by its member cell closest to the plateau centroid; separate
/// tied peaks are resolved toward the smallest Euclidean norm.
inline TranslationEstimate estimate_translation(const ScoreField2D& field) {
    if (!field.normalized) throw Error("translation", "estimate_translation needs a normalized field");
    if (field.values.empty()) throw Error("translation", "empty score field");
    const auto [mn, mx] = std::minmax_element(field.values.begin(), field.values.end());
    if (*mn == *mx) throw Error("translation", "score field is flat; no translation information");

    const double top = *mx;
    const std::size_t nx = field.nx(), ny = field.ny();
    std::vector<char> seen(field.values.size(), 0);
    auto center = [&](std::size_t k) { return Vec2(field.x_center(k % nx), field.y_center(k / nx)); };
    std::optional<Vec2> best;
    std::vector<std::size_t> component, stack;
    for (std::size_t k0 = 0; k0 < field.values.size(); ++k0) {
        if (seen[k0] || field.values[k0] != top) continue;
        component.clear();
        stack.assign(1, k0);
        seen[k0] = 1;
        while (!stack.empty()) {
            const std::size_t k = stack.back();
            stack.pop_back();
            component.push_back(k);
            const std::size_t ix = k % nx, iy = k / nx;
            auto visit = [&](std::size_t j) {
                if (!seen[j] && field.values[j] == top) {
                    seen[j] = 1;
                    stack.push_back(j);
                }
            };
            if (ix > 0) visit(k - 1);
            if (ix + 1 < nx) visit(k + 1);
            if (iy > 0) visit(k - nx);
            if (iy + 1 < ny) visit(k + nx);
        }
        Vec2 mean = Vec2::Zero();
        for (std::size_t k : component) mean += center(k);
        mean /= static_cast<double>(component.size());
        Vec2 rep = center(component.front());
        for (std::size_t k : component) {
            const Vec2 c = center(k);
            const double dc = (c - mean).squaredNorm(), dr = (rep - mean).squaredNorm();
            if (dc < dr || (dc == dr && c.norm() < rep.norm())) rep = c;
        }
        if (!best || rep.norm() < best->norm()) best = rep;
    }
    TranslationEstimate est;
    est.t = *best;
    return est;
}

}  // namespace radcal
