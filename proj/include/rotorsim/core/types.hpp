#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cmath>

namespace rotorsim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

inline constexpr int kNumRotors = 4;

/// Rigid-body state: position and velocity in the world frame, attitude as the
/// world<-body rotation, angular rate in the body frame. World z points up.
struct QuadrotorState {
    Vec3 p_WB = Vec3::Zero();
    Quat q_WB = Quat::Identity();
    Vec3 v_WB = Vec3::Zero();
    Vec3 omega_B = Vec3::Zero();

    bool all_finite() const {
        return p_WB.allFinite() && q_WB.coeffs().allFinite() && v_WB.allFinite() &&
               omega_B.allFinite();
    }
};

/// Body-frame force/torque pair.
struct Wrench {
    Vec3 f = Vec3::Zero();
    Vec3 tau = Vec3::Zero();

    Wrench& operator+=(const Wrench& o) {
        f += o.f;
        tau += o.tau;
        return *this;
    }
    friend Wrench operator+(Wrench a, const Wrench& b) { return a += b; }
    friend Wrench operator-(const Wrench& a, const Wrench& b) { return {a.f - b.f, a.tau - b.tau}; }
    friend Wrench operator*(double s, const Wrench& w) { return {s * w.f, s * w.tau}; }

    bool all_finite() const { return f.allFinite() && tau.allFinite(); }
};

/// Rotor angular rates [rad/s], one per rotor, all non-negative.
struct RotorSpeeds {
    std::array<double, kNumRotors> omega{};

    double& operator[](std::size_t i) { return omega[i]; }
    double operator[](std::size_t i) const { return omega[i]; }

    static RotorSpeeds uniform(double w) {
        RotorSpeeds r;
        r.omega.fill(w);
        return r;
    }
};

/// Time derivative of QuadrotorState. q_dot holds (w, x, y, z).
struct StateDerivative {
    Vec3 p_dot = Vec3::Zero();
    Eigen::Vector4d q_dot = Eigen::Vector4d::Zero();
    Vec3 v_dot = Vec3::Zero();
    Vec3 omega_dot = Vec3::Zero();
};

} // namespace rotorsim
