#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace radcal {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Error raised by any stage of the toolkit. `stage()` names the pipeline
/// stage so the CLI can report "[rotation] ..." style messages.
class Error : public std::runtime_error {
public:
    Error(std::string stage, const std::string& what)
        : std::runtime_error(what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
    a = std::remainder(a, kTwoPi);  // [-pi, pi]
    if (a <= -kPi) a += kTwoPi;
    return a;
}

}  // namespace radcal
