#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance runner. Nothing here calls the field accumulators under test.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "radcal/rotation_calib.hpp"
#include "radcal/translation_calib.hpp"

namespace oracle {

/// Gaussian kernels are accumulated over +/- this many sigma.
inline constexpr double kGaussianWindow = 6.0;

inline double windowed_rotation_score(double theta, const radcal::DirectionSample& s, radcal::RotationScoring fn) {
    const bool gaussian = fn == radcal::RotationScoring::s1 || fn == radcal::RotationScoring::s2;
    if (gaussian && std::abs(theta - s.direction) > kGaussianWindow * s.direction_error) return 0.0;
    return radcal::score_rotation(theta, s, fn);
}

inline double windowed_translation_score(const radcal::Vec2& t, const radcal::TranslationSample& s,
                                         radcal::TranslationScoring fn) {
    const bool gaussian = fn == radcal::TranslationScoring::s5 || fn == radcal::TranslationScoring::s6;
    if (gaussian && (std::abs(t.x() - s.t.x()) > kGaussianWindow * s.error.x() ||
                     std::abs(t.y() - s.t.y()) > kGaussianWindow * s.error.y())) {
        return 0.0;
    }
    return radcal::score_translation(t, s, fn);
}

/// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

/// Tensor-product Simpson rule over [ax, bx] x [ay, by].
inline double simpson2(const std::function<double(double, double)>& f, double ax, double bx, double ay, double by,
                       int n = 1000) {
    return simpson([&](double y) { return simpson([&](double x) { return f(x, y); }, ax, bx, n); }, ay, by, n);
}

/// Dense 1-D argmax of the summed kernels by direct evaluation on a grid of
/// spacing `step` over (-2pi, 2pi]. Runs of equal maxima resolve to their
/// midpoint; separate peaks to the smallest |theta|.
inline double dense_rotation_argmax(std::span<const radcal::DirectionSample> samples, radcal::RotationScoring fn,
                                    double step) {
    const auto n = static_cast<std::size_t>(std::llround(4.0 * radcal::kPi / step));
    const double lower = -2.0 * radcal::kPi;
    std::vector<double> v(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double th = lower + (static_cast<double>(i) + 0.5) * step;
        for (const auto& s : samples) v[i] += windowed_rotation_score(th, s, fn);
    }
    const double top = *std::max_element(v.begin(), v.end());
    const double tol = top * 1e-12;
    double best = 0.0;
    bool found = false;
    for (std::size_t i = 0; i < n;) {
        if (v[i] < top - tol) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < n && v[j + 1] >= top - tol) ++j;
        const double mid = lower + (0.5 * static_cast<double>(i + j) + 0.5) * step;
        if (!found || std::abs(mid) < std::abs(best)) best = mid;
        found = true;
        i = j + 1;
    }
    return best;
}

/// Dense 2-D argmax over [-t_L, t_L] with spacing `step`. Connected regions of
/// equal maxima resolve to the member nearest their centroid; separate
/// regions to the smallest norm.
inline radcal::Vec2 dense_translation_argmax(std::span<const radcal::TranslationSample> samples,
                                             radcal::TranslationScoring fn, const radcal::TranslationLimits& lim,
                                             double step) {
    const int hx = static_cast<int>(std::floor(lim.t_l.x() / step + 1e-9));
    const int hy = static_cast<int>(std::floor(lim.t_l.y() / step + 1e-9));
    const int nx = 2 * hx + 1, ny = 2 * hy + 1;
    std::vector<double> v(static_cast<std::size_t>(nx) * ny, 0.0);
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const radcal::Vec2 t((ix - hx) * step, (iy - hy) * step);
            double acc = 0.0;
            for (const auto& s : samples) acc += windowed_translation_score(t, s, fn);
            v[static_cast<std::size_t>(iy) * nx + ix] = acc;
        }
    }
    const double top = *std::max_element(v.begin(), v.end());
    const double tol = top * 1e-12;
    std::vector<char> seen(v.size(), 0);
    radcal::Vec2 best(0, 0);
    bool found = false;
    for (std::size_t start = 0; start < v.size(); ++start) {
        if (seen[start] || v[start] < top - tol) continue;
        std::vector<std::size_t> members{start}, stack{start};
        seen[start] = 1;
        while (!stack.empty()) {
            const std::size_t c = stack.back();
            stack.pop_back();
            const int cx = static_cast<int>(c % nx), cy = static_cast<int>(c / nx);
            const int nb[4][2] = {{cx - 1, cy}, {cx + 1, cy}, {cx, cy - 1}, {cx, cy + 1}};
            for (const auto& q : nb) {
                if (q[0] < 0 || q[0] >= nx || q[1] < 0 || q[1] >= ny) continue;
                const std::size_t k = static_cast<std::size_t>(q[1]) * nx + q[0];
                if (seen[k] || v[k] < top - tol) continue;
                seen[k] = 1;
                members.push_back(k);
                stack.push_back(k);
            }
        }
        auto pos = [&](std::size_t k) {
            return radcal::Vec2((static_cast<int>(k % nx) - hx) * step, (static_cast<int>(k / nx) - hy) * step);
        };
        radcal::Vec2 mean(0, 0);
        for (auto k : members) mean += pos(k);
        mean /= static_cast<double>(members.size());
        radcal::Vec2 rep = pos(members.front());
        for (auto k : members) {
            if ((pos(k) - mean).norm() < (rep - mean).norm()) rep = pos(k);
        }
        if (!found || rep.norm() < best.norm()) best = rep;
        found = true;
    }
    return best;
}

}  // namespace oracle
