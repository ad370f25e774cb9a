#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "radcal/common.hpp"
#include "radcal/geo_map.hpp"

namespace radcal {

using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Vector5 = Eigen::Matrix<double, 5, 1>;
using Matrix5 = Eigen::Matrix<double, 5, 5>;

/// Vehicle state [E N phi v phi_dot v_dot] with covariance.
struct EgoState {
    enum Index { kE = 0, kN, kPhi, kV, kYawRate, kAccel };

    Vector6 x = Vector6::Zero();
    Matrix6 covariance = Matrix6::Zero();
    double time = 0.0;

    double easting() const { return x[kE]; }
    double northing() const { return x[kN]; }
    double heading() const { return x[kPhi]; }
    double speed() const { return x[kV]; }
    double yaw_rate() const { return x[kYawRate]; }
    double acceleration() const { return x[kAccel]; }
};

/// DGNSS position, CAN speed, IMU yaw rate and acceleration at one instant.
struct EgoMeasurement {
    double time = 0.0;
    double easting = 0.0;
    double northing = 0.0;
    double speed = 0.0;
    double yaw_rate = 0.0;
    double acceleration = 0.0;
    // 1-sigma noise per channel, same order as above
    double sigma_e = 0.02;
    double sigma_n = 0.02;
    double sigma_v = 0.05;
    double sigma_yaw_rate = 0.002;
    double sigma_accel = 0.05;

    Vector5 z() const { return {easting, northing, speed, yaw_rate, acceleration}; }
};

/// Process noise as per-second variances added to each state component.
struct ProcessNoise {
    Vector6 variance_rate = Vector6::Zero();

    static ProcessNoise defaults() {
        ProcessNoise q;
        q.variance_rate << 1e-4, 1e-4, 1e-6, 1e-2, 1e-3, 0.25;
        return q;
    }
};

inline constexpr double kMaxEgoStep = 0.1;  // s

namespace detail {

inline void make_psd(Matrix6& p) {
    p = 0.5 * (p + p.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix6> es(p);
    Vector6 ev = es.eigenvalues();
    if ((ev.array() < 0.0).any()) {
        ev = ev.cwiseMax(0.0);
        p = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
        p = 0.5 * (p + p.transpose()).eval();
    }
}

/// CTRA step with midpoint heading and speed; exact for straight or
/// constant-acceleration motion, second order on arcs.
inline Vector6 ctra_step(const Vector6& x, double dt, Matrix6* jacobian = nullptr) {
    const double a = x[EgoState::kPhi] + 0.5 * x[EgoState::kYawRate] * dt;
    const double s = x[EgoState::kV] + 0.5 * x[EgoState::kAccel] * dt;
    const double ca = std::cos(a), sa = std::sin(a);
    Vector6 out = x;
    out[EgoState::kE] += s * ca * dt;
    out[EgoState::kN] += s * sa * dt;
    out[EgoState::kPhi] = wrap_angle(x[EgoState::kPhi] + x[EgoState::kYawRate] * dt);
    out[EgoState::kV] += x[EgoState::kAccel] * dt;
    if (jacobian) {
        Matrix6& f = *jacobian;
        f.setIdentity();
        f(EgoState::kE, EgoState::kPhi) = -s * sa * dt;
        f(EgoState::kE, EgoState::kV) = ca * dt;
        f(EgoState::kE, EgoState::kYawRate) = -s * sa * dt * dt * 0.5;
        f(EgoState::kE, EgoState::kAccel) = ca * dt * dt * 0.5;
        f(EgoState::kN, EgoState::kPhi) = s * ca * dt;
        f(EgoState::kN, EgoState::kV) = sa * dt;
        f(EgoState::kN, EgoState::kYawRate) = s * ca * dt * dt * 0.5;
        f(EgoState::kN, EgoState::kAccel) = sa * dt * dt * 0.5;
        f(EgoState::kPhi, EgoState::kYawRate) = dt;
        f(EgoState::kV, EgoState::kAccel) = dt;
    }
    return out;
}

/// Propagates the mean only, sub-stepping at kMaxEgoStep.
inline Vector6 propagate_mean(Vector6 x, double dt) {
    while (dt > 1e-12) {
        const double h = std::min(dt, kMaxEgoStep);
        x = ctra_step(x, h);
        dt -= h;
    }
    return x;
}

}  // namespace detail

inline EgoState ekf_predict(const EgoState& state, double dt, const ProcessNoise& noise = ProcessNoise::defaults()) {
    if (!(dt > 0.0)) throw Error("ego", "ekf_predict needs a positive time step");
    EgoState out = state;
    double remaining = dt;
    while (remaining > 1e-12) {
        const double h = std::min(remaining, kMaxEgoStep);
        Matrix6 f;
        out.x = detail::ctra_step(out.x, h, &f);
        out.covariance = f * out.covariance * f.transpose();
        out.covariance.diagonal() += noise.variance_rate * h;
        remaining -= h;
    }
    detail::make_psd(out.covariance);
    out.time = state.time + dt;
    return out;
}

/// Linear-selection update with z = [E N v phi_dot v_dot]. A measurement newer
/// than the state is first predicted to with `noise`.
inline EgoState ekf_update(const EgoState& state, const EgoMeasurement& m, const ProcessNoise& noise = ProcessNoise::defaults()) {
    const Vector5 z = m.z();
    if (!z.allFinite() || !std::isfinite(m.time)) throw Error("ego", "non-finite ego measurement");
    const Vector5 sig{m.sigma_e, m.sigma_n, m.sigma_v, m.sigma_yaw_rate, m.sigma_accel};
    if (!(sig.array() > 0.0).all()) throw Error("ego", "ego measurement noise must be positive");
    if (m.time < state.time - 1e-9) throw Error("ego", "ego measurement is older than the filter state");

    EgoState s = m.time > state.time + 1e-9 ? ekf_predict(state, m.time - state.time, noise) : state;

    Eigen::Matrix<double, 5, 6> h = Eigen::Matrix<double, 5, 6>::Zero();
    h(0, EgoState::kE) = 1.0;
    h(1, EgoState::kN) = 1.0;
    h(2, EgoState::kV) = 1.0;
    h(3, EgoState::kYawRate) = 1.0;
    h(4, EgoState::kAccel) = 1.0;
    const Matrix5 r = sig.array().square().matrix().asDiagonal();

    const Vector5 innovation = z - h * s.x;
    const Matrix5 innov_cov = h * s.covariance * h.transpose() + r;
    const Eigen::Matrix<double, 6, 5> gain = s.covariance * h.transpose() * innov_cov.inverse();
    s.x += gain * innovation;
    s.x[EgoState::kPhi] = wrap_angle(s.x[EgoState::kPhi]);
    const Matrix6 ikh = Matrix6::Identity() - gain * h;
    s.covariance = ikh * s.covariance * ikh.transpose() + gain * r * gain.transpose();
    detail::make_psd(s.covariance);
    return s;
}

inline Pose2D state_to_pose(const EgoState& state) {
    return Pose2D(state.easting(), state.northing(), state.heading());
}

struct EgoFilterConfig {
    ProcessNoise process = ProcessNoise::defaults();
    Vector6 initial_sigma = (Vector6() << 0.05, 0.05, 0.1, 0.2, 0.02, 0.2).finished();
    double heading_seed_baseline = 0.5;  // m between the two seeding fixes
};

/// Filtered ego states at the measurement instants.
class PoseTrack {
public:
    PoseTrack() = default;
    explicit PoseTrack(std::vector<EgoState> states) : states_(std::move(states)) {}

    const std::vector<EgoState>& states() const { return states_; }
    bool empty() const { return states_.empty(); }

    /// Filtered state propagated (mean only) to time t. Empty outside the track.
    std::optional<EgoState> state_at(double t) const {
        if (states_.empty() || t < states_.front().time - 1e-9 || t > states_.back().time + kMaxEgoStep) {
            return std::nullopt;
        }
        auto it = std::upper_bound(states_.begin(), states_.end(), t,
                                   [](double v, const EgoState& s) { return v < s.time; });
        const EgoState& base = it == states_.begin() ? *it : *std::prev(it);
        EgoState out = base;
        if (t > base.time) {
            out.x = detail::propagate_mean(base.x, t - base.time);
            out.time = t;
        }
        return out;
    }

    std::optional<Pose2D> pose_at(double t) const {
        auto s = state_at(t);
        if (!s) return std::nullopt;
        return state_to_pose(*s);
    }

private:
    std::vector<EgoState> states_;
};

/// Runs the EKF over a time-ordered ego log.
inline PoseTrack run_ego_filter(std::span<const EgoMeasurement> log, const EgoFilterConfig& cfg = {}) {
    if (log.size() < 2) throw Error("ego", "ego log needs at least two measurements");
    for (std::size_t i = 1; i < log.size(); ++i) {
        if (!(log[i].time > log[i - 1].time)) throw Error("ego", "ego log timestamps must be strictly increasing");
    }
    std::optional<double> heading;
    for (std::size_t k = 1; k < log.size(); ++k) {
        const double de = log[k].easting - log[0].easting;
        const double dn = log[k].northing - log[0].northing;
        if (std::hypot(de, dn) >= cfg.heading_seed_baseline) {
            heading = std::atan2(dn, de);
            break;
        }
    }
    if (!heading) throw Error("ego", "vehicle never moves; heading cannot be initialized");

    EgoState s;
    s.time = log[0].time;
    s.x << log[0].easting, log[0].northing, *heading, log[0].speed, log[0].yaw_rate, log[0].acceleration;
    s.covariance = cfg.initial_sigma.array().square().matrix().asDiagonal();

    std::vector<EgoState> out;
    out.reserve(log.size());
    out.push_back(s);
    for (std::size_t k = 1; k < log.size(); ++k) {
        s = ekf_update(s, log[k], cfg.process);
        out.push_back(s);
    }
    return PoseTrack(std::move(out));
}

}  // namespace radcal
